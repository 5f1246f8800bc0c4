// Control state: ranges, clamping, named presets, and URL round-tripping.

import type { Family, WhatIfControls } from './types.js';

export const FAMILIES: Family[] = ['t_ind', 't_paired', 'chi2_1', 'r', 'F_oneway', 'Z'];

export const FAMILY_LABELS: Record<Family, string> = {
  t_ind: 'independent t',
  t_paired: 'paired t',
  chi2_1: 'chi-square (1 df)',
  r: 'correlation',
  F_oneway: 'one-way F',
  Z: 'Z',
};

// Slider presets for the canonical appraisal classes.
export const BIAS_PRESETS = [
  { value: 0.0, label: 'theoretical minimum (u=0)' },
  { value: 0.2, label: 'well-run RCT (u=.2)' },
  { value: 0.3, label: 'weak RCT (u=.3)' },
  { value: 0.8, label: 'biased study (u=.8)' },
];

export const PRIOR_PRESETS = [
  { value: 0.1, label: 'exploratory (prior=.1)' },
  { value: 0.2, label: 'intermediate (prior=.2)' },
  { value: 0.5, label: 'confirmatory (prior=.5)' },
];

export const THRESHOLD_PRESETS = [
  { value: 0.2, label: 'small (d=.2)' },
  { value: 0.5, label: 'medium (d=.5)' },
  { value: 0.8, label: 'large (d=.8)' },
];

interface Range {
  min: number;
  max: number;
  integer?: boolean;
}

// Clamped to the open/closed ranges the service accepts (422 otherwise).
const RANGES: Record<Exclude<keyof WhatIfControls, 'family' | 'mcc_m'>, Range> = {
  p_obs: { min: 1e-8, max: 1.0 },
  n_total: { min: 4, max: 100_000, integer: true },
  d_threshold: { min: 0.05, max: 2.0 },
  bias_u: { min: 0.0, max: 1.0 },
  prior: { min: 0.01, max: 0.99 },
  fpr_target: { min: 0.01, max: 0.5 },
};

export const DEFAULT_CONTROLS: WhatIfControls = {
  p_obs: 0.05,
  n_total: 128,
  family: 'Z',
  d_threshold: 0.5,
  bias_u: 0.3,
  prior: 0.2,
  fpr_target: 0.05,
  mcc_m: null,
};

export function clampControl<K extends keyof WhatIfControls>(
  key: K,
  value: WhatIfControls[K],
): WhatIfControls[K] {
  if (key === 'family') {
    return (FAMILIES.includes(value as Family) ? value : 'Z') as WhatIfControls[K];
  }
  if (key === 'mcc_m') {
    if (value === null || value === undefined) return null as WhatIfControls[K];
    const m = Math.round(Number(value));
    return (Number.isFinite(m) && m >= 1 ? Math.min(m, 1000) : null) as WhatIfControls[K];
  }
  const range = RANGES[key as keyof typeof RANGES];
  let x = Number(value);
  if (!Number.isFinite(x)) x = DEFAULT_CONTROLS[key] as number;
  x = Math.min(range.max, Math.max(range.min, x));
  if (range.integer) x = Math.round(x);
  return x as WhatIfControls[K];
}

export function clampControls(partial: Partial<WhatIfControls>): WhatIfControls {
  const merged: WhatIfControls = { ...DEFAULT_CONTROLS, ...partial };
  const out = { ...merged };
  for (const key of Object.keys(merged) as (keyof WhatIfControls)[]) {
    (out as Record<string, unknown>)[key] = clampControl(key, merged[key]);
  }
  return out;
}

// Keep appraisals shareable: the whole control state lives in the query
// string, e.g. ?p_obs=0.05&n_total=128&family=Z&...
export function controlsToQuery(controls: WhatIfControls): string {
  const params = new URLSearchParams();
  params.set('p_obs', String(controls.p_obs));
  params.set('n_total', String(controls.n_total));
  params.set('family', controls.family);
  params.set('d_threshold', String(controls.d_threshold));
  params.set('bias_u', String(controls.bias_u));
  params.set('prior', String(controls.prior));
  params.set('fpr_target', String(controls.fpr_target));
  if (controls.mcc_m !== null) params.set('mcc_m', String(controls.mcc_m));
  return params.toString();
}

export function controlsFromQuery(query: string): WhatIfControls {
  const params = new URLSearchParams(query);
  const partial: Partial<WhatIfControls> = {};
  const num = (key: string): number | undefined => {
    const raw = params.get(key);
    if (raw === null) return undefined;
    const x = Number(raw);
    return Number.isFinite(x) ? x : undefined;
  };
  const assign = <K extends keyof WhatIfControls>(key: K, value: WhatIfControls[K] | undefined) => {
    if (value !== undefined) partial[key] = value;
  };
  assign('p_obs', num('p_obs'));
  assign('n_total', num('n_total'));
  assign('d_threshold', num('d_threshold'));
  assign('bias_u', num('bias_u'));
  assign('prior', num('prior'));
  assign('fpr_target', num('fpr_target'));
  const family = params.get('family');
  if (family !== null) assign('family', family as Family);
  const mcc = num('mcc_m');
  if (mcc !== undefined) assign('mcc_m', mcc);
  return clampControls(partial);
}

/** Log-spaced sample sizes for the FPR-vs-n curve. */
export function logSampleGrid(points: number, min = 8, max = 4096): number[] {
  const grid: number[] = [];
  const ratio = Math.log(max / min);
  for (let i = 0; i < points; i++) {
    const n = Math.round(min * Math.exp((ratio * i) / (points - 1)));
    if (grid.length === 0 || grid[grid.length - 1] !== n) grid.push(n);
  }
  return grid;
}
