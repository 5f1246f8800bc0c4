// DOM wiring for the what-if explorer. All numbers on screen come from
// service responses relayed through ExplorerCore snapshots.

import { ApiClient, ApiError } from './api.js';
import { renderCurve, renderGauge, renderOverlay, studyColor } from './charts.js';
import { ExplorerCore, type Snapshot } from './core.js';
import {
  BIAS_PRESETS,
  controlsFromQuery,
  controlsToQuery,
  FAMILIES,
  FAMILY_LABELS,
  PRIOR_PRESETS,
  THRESHOLD_PRESETS,
} from './state.js';
import type { OverlayData, ScenarioInfo, WhatIfControls } from './types.js';

const API_BASE = new URLSearchParams(location.search).get('api') ?? 'http://127.0.0.1:8080';

const client = new ApiClient(API_BASE);
const core = new ExplorerCore(client, {}, controlsFromQuery(location.search));

function $(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function setBanner(text: string | null): void {
  const banner = $('banner');
  banner.textContent = text ?? '';
  banner.style.display = text ? 'block' : 'none';
}

// -- controls -----------------------------------------------------------------

interface SliderSpec {
  key: keyof WhatIfControls;
  label: string;
  min: number;
  max: number;
  step: number;
  presets?: { value: number; label: string }[];
  log?: boolean;
}

const SLIDERS: SliderSpec[] = [
  { key: 'p_obs', label: 'observed p', min: 0.0001, max: 1, step: 0.0001 },
  { key: 'n_total', label: 'sample size n', min: 4, max: 2000, step: 1, log: true },
  { key: 'd_threshold', label: 'effect threshold d', min: 0.05, max: 2, step: 0.01,
    presets: THRESHOLD_PRESETS },
  { key: 'bias_u', label: 'bias u', min: 0, max: 1, step: 0.01, presets: BIAS_PRESETS },
  { key: 'prior', label: 'prior', min: 0.01, max: 0.99, step: 0.01, presets: PRIOR_PRESETS },
  { key: 'fpr_target', label: 'target FPR', min: 0.01, max: 0.5, step: 0.01 },
];

function buildControls(): void {
  const host = $('controls');
  const controls = core.getControls();
  for (const spec of SLIDERS) {
    const row = document.createElement('div');
    row.className = 'control';
    const label = document.createElement('label');
    label.textContent = spec.label;
    const value = document.createElement('span');
    value.className = 'value';
    value.id = `value-${spec.key}`;
    value.textContent = String(controls[spec.key]);
    const input = document.createElement('input');
    input.type = 'range';
    input.min = String(spec.min);
    input.max = String(spec.max);
    input.step = String(spec.step);
    input.value = String(controls[spec.key]);
    input.id = `slider-${spec.key}`;
    input.addEventListener('input', () => {
      const x = Number(input.value);
      value.textContent = String(x);
      core.setControl(spec.key, x as never);
      syncUrl();
    });
    row.append(label, input, value);
    if (spec.presets) {
      const presets = document.createElement('div');
      presets.className = 'presets';
      for (const preset of spec.presets) {
        const button = document.createElement('button');
        button.textContent = preset.label;
        button.addEventListener('click', () => {
          input.value = String(preset.value);
          value.textContent = String(preset.value);
          core.setControl(spec.key, preset.value as never);
          syncUrl();
        });
        presets.append(button);
      }
      row.append(presets);
    }
    host.append(row);
  }

  const familyRow = document.createElement('div');
  familyRow.className = 'control';
  const familyLabel = document.createElement('label');
  familyLabel.textContent = 'test family';
  const select = document.createElement('select');
  for (const family of FAMILIES) {
    const option = document.createElement('option');
    option.value = family;
    option.textContent = FAMILY_LABELS[family];
    select.append(option);
  }
  select.value = controls.family;
  select.addEventListener('change', () => {
    core.setControl('family', select.value as never);
    syncUrl();
  });
  familyRow.append(familyLabel, select);
  host.append(familyRow);

  const mccRow = document.createElement('div');
  mccRow.className = 'control';
  const mccLabel = document.createElement('label');
  mccLabel.textContent = 'family size m (MCC)';
  const mcc = document.createElement('input');
  mcc.type = 'number';
  mcc.min = '1';
  mcc.placeholder = 'none';
  mcc.value = controls.mcc_m === null ? '' : String(controls.mcc_m);
  mcc.addEventListener('change', () => {
    core.setControl('mcc_m', (mcc.value === '' ? null : Number(mcc.value)) as never);
    syncUrl();
  });
  mccRow.append(mccLabel, mcc);
  host.append(mccRow);
}

function syncUrl(): void {
  const query = controlsToQuery(core.getControls());
  const api = new URLSearchParams(location.search).get('api');
  const suffix = api ? `&api=${encodeURIComponent(api)}` : '';
  history.replaceState(null, '', `?${query}${suffix}`);
}

// -- what-if panel ----------------------------------------------------------

function renderSnapshot(snapshot: Snapshot): void {
  setBanner(null);
  $('gauge').innerHTML = renderGauge(snapshot.response.fpr);
  $('readout-ppv').textContent = snapshot.readouts.ppv;
  $('readout-lr').textContent = snapshot.readouts.lr;
  $('readout-rbp').textContent = snapshot.readouts.rbp;
  $('readout-power').textContent = snapshot.readouts.power;
  $('readout-peff').textContent = snapshot.readouts.p_effective;
  $('curve').innerHTML = renderCurve(snapshot.curve);
  for (const spec of SLIDERS) {
    $(`slider-${spec.key}`).classList.remove('invalid');
  }
}

function renderError(err: unknown): void {
  if (err instanceof ApiError && err.status === 422) {
    // Keep the last good readouts off screen rather than showing stale values.
    for (const field of err.invalidFields) {
      const slider = document.getElementById(`slider-${field}`);
      slider?.classList.add('invalid');
    }
    setBanner(`invalid field: ${err.invalidFields.join(', ') || 'request'}`);
    return;
  }
  setBanner('service unreachable; start it with: evidencelab serve --input <table.csv>');
}

// -- dataset overlay ----------------------------------------------------------

let scenarios: ScenarioInfo[] = [];
let currentOverlay: OverlayData | null = null;
let highlightedStudy: string | null = null;

function drawOverlay(): void {
  if (!currentOverlay) return;
  const highlighted = core.highlighted(currentOverlay, highlightedStudy);
  $('overlay').innerHTML = renderOverlay(currentOverlay, highlighted);
  $('overlay-note').textContent =
    `${currentOverlay.points.length} tests · ${currentOverlay.scenario.label}`;
}

async function selectScenario(key: string): Promise<void> {
  const scenario = scenarios.find((sc) => sc.key === key);
  if (!scenario) return;
  try {
    currentOverlay = await core.loadOverlay(scenario);
    drawOverlay();
    const picker = $('study-picker') as HTMLSelectElement;
    const studyIds = [...new Set(currentOverlay.points.map((p) => p.studyId))].sort();
    picker.innerHTML = '<option value="">all studies</option>';
    for (const sid of studyIds) {
      const option = document.createElement('option');
      option.value = sid;
      option.textContent = sid;
      option.style.color = studyColor(studyIds, sid);
      picker.append(option);
    }
  } catch (err) {
    if (err instanceof ApiError && err.noDataset) {
      $('overlay-note').textContent =
        'no dataset loaded on the service; the what-if panel still works';
      $('overlay').innerHTML = '';
    } else {
      renderError(err);
    }
  }
}

async function buildOverlayControls(): Promise<void> {
  const picker = $('scenario-picker') as HTMLSelectElement;
  try {
    const body = await client.scenarios();
    scenarios = body.scenarios;
  } catch (err) {
    renderError(err);
    return;
  }
  for (const sc of scenarios) {
    const option = document.createElement('option');
    option.value = sc.key;
    option.textContent = sc.label;
    picker.append(option);
  }
  const start = scenarios.find((sc) => sc.key === 'd0.5_u0.3_p0.2') ?? scenarios[0];
  if (start) {
    picker.value = start.key;
    await selectScenario(start.key);
  }
  picker.addEventListener('change', () => void selectScenario(picker.value));
  ($('study-picker') as HTMLSelectElement).addEventListener('change', (event) => {
    const value = (event.target as HTMLSelectElement).value;
    highlightedStudy = value === '' ? null : value;
    drawOverlay();
  });
}

// -- boot ---------------------------------------------------------------------

core.onSnapshot = renderSnapshot;
core.onError = renderError;

buildControls();
syncUrl();
void core.flush().catch(renderError);
void buildOverlayControls();
