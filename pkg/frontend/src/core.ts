// DOM-free explorer engine: debounced what-if requests (latest wins),
// the FPR-vs-n curve sampler, and the dataset overlay cache. The DOM layer
// in main.ts only renders what this class emits, and the e2e tests drive
// this class directly against a live service.

import { ApiClient } from './api.js';
import { fmtLR, fmtProb } from './format.js';
import { clampControl, clampControls, DEFAULT_CONTROLS, logSampleGrid } from './state.js';
import type {
  OverlayData,
  OverlayPoint,
  ScenarioInfo,
  WhatIfControls,
  WhatIfResponse,
} from './types.js';

export interface Readouts {
  fpr: string;
  ppv: string;
  lr: string;
  rbp: string;
  power: string;
  p_effective: string;
}

export interface CurvePoint {
  n: number;
  fpr: number;
}

export interface Snapshot {
  controls: WhatIfControls;
  response: WhatIfResponse;
  readouts: Readouts;
  curve: CurvePoint[];
}

export interface CoreOptions {
  /** Debounce for control changes; the UI contract is at least 150 ms. */
  debounceMs?: number;
  /** Number of log-grid points on the FPR-vs-n curve; 0 disables the curve. */
  curvePoints?: number;
}

export function readoutsFrom(response: WhatIfResponse): Readouts {
  return {
    fpr: fmtProb(response.fpr),
    ppv: fmtProb(response.ppv),
    lr: fmtLR(response.lr),
    rbp: fmtProb(response.rbp),
    power: fmtProb(response.power),
    p_effective: fmtProb(response.p_effective),
  };
}

const DENSITY_BINS = 20;

export class ExplorerCore {
  readonly debounceMs: number;
  readonly curvePoints: number;

  private controls: WhatIfControls;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private token = 0;
  private readonly overlayCache = new Map<string, OverlayData>();

  onSnapshot: ((snapshot: Snapshot) => void) | null = null;
  onError: ((err: unknown) => void) | null = null;

  constructor(
    readonly client: ApiClient,
    options: CoreOptions = {},
    initial: Partial<WhatIfControls> = {},
  ) {
    this.debounceMs = Math.max(150, options.debounceMs ?? 150);
    this.curvePoints = options.curvePoints ?? 16;
    this.controls = clampControls({ ...DEFAULT_CONTROLS, ...initial });
  }

  getControls(): WhatIfControls {
    return { ...this.controls };
  }

  /** Clamp and stage one control; the refresh goes out after the debounce. */
  setControl<K extends keyof WhatIfControls>(key: K, value: WhatIfControls[K]): void {
    this.controls = { ...this.controls, [key]: clampControl(key, value) };
    if (this.timer !== null) clearTimeout(this.timer);
    const token = ++this.token;
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.refresh(token);
    }, this.debounceMs);
  }

  /** Fetch immediately (cancelling any pending debounce) and return the snapshot. */
  async flush(): Promise<Snapshot> {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    const token = ++this.token;
    const snapshot = await this.fetchSnapshot();
    if (token === this.token) this.onSnapshot?.(snapshot);
    return snapshot;
  }

  private async refresh(token: number): Promise<void> {
    try {
      const snapshot = await this.fetchSnapshot();
      if (token === this.token) this.onSnapshot?.(snapshot); // stale responses dropped
    } catch (err) {
      if (token === this.token) this.onError?.(err);
    }
  }

  private async fetchSnapshot(): Promise<Snapshot> {
    const controls = this.getControls();
    const main = this.client.whatif(controls);
    const curve = this.curvePoints > 0 ? this.fetchCurve(controls) : Promise.resolve([]);
    const [response, curvePoints] = await Promise.all([main, curve]);
    return {
      controls,
      response,
      readouts: readoutsFrom(response),
      curve: curvePoints,
    };
  }

  private async fetchCurve(controls: WhatIfControls): Promise<CurvePoint[]> {
    const grid = logSampleGrid(this.curvePoints);
    const responses = await Promise.all(
      grid.map((n) => this.client.whatif({ ...controls, n_total: clampControl('n_total', n) })),
    );
    return responses.map((r, i) => ({ n: grid[i]!, fpr: r.fpr }));
  }

  /** Fetch (once) all per-test rows for a scenario via the dataset routes. */
  async loadOverlay(scenario: ScenarioInfo): Promise<OverlayData> {
    const cached = this.overlayCache.get(scenario.key);
    if (cached) return cached;
    const studies = await this.client.studies();
    const slices = await Promise.all(
      studies.studies.map((s) => this.client.studyTests(s.study_id, scenario)),
    );
    const points: OverlayPoint[] = [];
    for (const slice of slices) {
      for (const row of slice.tests) {
        points.push({
          studyId: row.study_id,
          testId: row.test_id,
          n: row.n_total,
          fpr: row.metrics_adjusted.fpr,
          significant: row.metrics_adjusted.significant_adjusted,
        });
      }
    }
    const densityBins = new Array<number>(DENSITY_BINS).fill(0);
    for (const p of points) {
      const bin = Math.min(DENSITY_BINS - 1, Math.floor(p.fpr * DENSITY_BINS));
      densityBins[bin]! += 1;
    }
    const data: OverlayData = { scenario, points, densityBins };
    this.overlayCache.set(scenario.key, data);
    return data;
  }

  highlighted(overlay: OverlayData, studyId: string | null): OverlayPoint[] {
    if (studyId === null) return [];
    return overlay.points.filter((p) => p.studyId === studyId);
  }
}
