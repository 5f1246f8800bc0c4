// End-to-end against the real Python service; no mocks. The suite spawns
// `evidencelab serve` on the shipped fixture, then drives ExplorerCore (the
// same engine the DOM layer renders from) over live HTTP.

import { spawn, type ChildProcess } from 'node:child_process';
import { existsSync } from 'node:fs';
import { resolve } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { ExplorerCore, readoutsFrom } from '../src/core.js';
import { parseProb } from '../src/format.js';
import type { ScenarioInfo } from '../src/types.js';

const PORT = 8719;
const BASE = `http://127.0.0.1:${PORT}`;
const FIXTURE = resolve(__dirname, '../../tests/golden/fixture.csv');

let server: ChildProcess | null = null;
let client: ApiClient;

async function waitForService(timeoutMs = 60_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const response = await fetch(`${BASE}/api/scenarios`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error('service did not come up');
    await new Promise((r) => setTimeout(r, 250));
  }
}

beforeAll(async () => {
  expect(existsSync(FIXTURE), `fixture at ${FIXTURE}`).toBe(true);
  server = spawn(
    'python3',
    ['-m', 'evidencelab.cli', 'serve', '--input', FIXTURE, '--port', String(PORT)],
    { stdio: 'ignore' },
  );
  await waitForService();
  client = new ApiClient(BASE);
}, 90_000);

afterAll(() => {
  server?.kill();
});

describe('what-if panel against the live service', () => {
  it('readouts equal a direct service response within display rounding', async () => {
    const core = new ExplorerCore(client, { curvePoints: 8 });
    const snapshot = await core.flush();
    const direct = await client.whatif(core.getControls());
    expect(Math.abs(parseProb(snapshot.readouts.fpr) - direct.fpr)).toBeLessThanOrEqual(0.0005);
    expect(Math.abs(parseProb(snapshot.readouts.ppv) - direct.ppv)).toBeLessThanOrEqual(0.0005);
    expect(Math.abs(parseProb(snapshot.readouts.rbp) - direct.rbp)).toBeLessThanOrEqual(0.0005);
    expect(Math.abs(parseProb(snapshot.readouts.power) - direct.power)).toBeLessThanOrEqual(0.0005);
    expect(snapshot.readouts).toEqual(readoutsFrom(direct));
  });

  it('default controls give an FPR within 0.01 of the direct response', async () => {
    const core = new ExplorerCore(client, { curvePoints: 0 });
    core.setControl('p_obs', 0.05);
    core.setControl('d_threshold', 0.5);
    core.setControl('bias_u', 0.3);
    core.setControl('prior', 0.2);
    core.setControl('family', 'Z');
    core.setControl('n_total', 128);
    const snapshot = await core.flush();
    const direct = await client.whatif(snapshot.controls);
    expect(Math.abs(parseProb(snapshot.readouts.fpr) - direct.fpr)).toBeLessThanOrEqual(0.01);
  });

  it('u slider at 1 makes the FPR readout equal 1 - prior', async () => {
    const core = new ExplorerCore(client, { curvePoints: 0 });
    core.setControl('prior', 0.2);
    core.setControl('bias_u', 1.0);
    const snapshot = await core.flush();
    expect(parseProb(snapshot.readouts.fpr)).toBeCloseTo(0.8, 3);
  });

  it('sweeping u from 0 to .8 never decreases the FPR readout', async () => {
    const core = new ExplorerCore(client, { curvePoints: 0 });
    core.setControl('p_obs', 0.01);  // power (0.807) stays above p: monotone regime
    const sweep = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
    const readouts: number[] = [];
    for (const u of sweep) {
      core.setControl('bias_u', u);
      const snapshot = await core.flush();
      readouts.push(parseProb(snapshot.readouts.fpr));
    }
    for (let i = 1; i < readouts.length; i++) {
      expect(readouts[i]!).toBeGreaterThanOrEqual(readouts[i - 1]!);
    }
  });

  it('debounces rapid control changes into one request burst', async () => {
    const core = new ExplorerCore(client, { curvePoints: 0, debounceMs: 150 });
    await core.flush();
    const before = client.requestCount;
    core.setControl('prior', 0.11);
    core.setControl('prior', 0.12);
    core.setControl('prior', 0.13);
    core.setControl('prior', 0.14);
    await new Promise((r) => setTimeout(r, 450));
    expect(client.requestCount - before).toBe(1);
  });

  it('samples the FPR-vs-n curve on a log grid at fixed controls', async () => {
    const core = new ExplorerCore(client, { curvePoints: 10 });
    core.setControl('bias_u', 0.0);
    core.setControl('prior', 0.5);
    const snapshot = await core.flush();
    expect(snapshot.curve.length).toBeGreaterThanOrEqual(9);
    for (let i = 1; i < snapshot.curve.length; i++) {
      expect(snapshot.curve[i]!.n).toBeGreaterThan(snapshot.curve[i - 1]!.n);
    }
    // Spot-check one curve point against a direct request.
    const mid = snapshot.curve[Math.floor(snapshot.curve.length / 2)]!;
    const direct = await client.whatif({ ...snapshot.controls, n_total: mid.n });
    expect(mid.fpr).toBeCloseTo(direct.fpr, 12);
  });

  it('rejected requests name the offending field', async () => {
    await expect(client.whatif({
      p_obs: 0.05, n_total: 128, family: 'Z', d_threshold: 0.5,
      bias_u: 0, prior: 0 as number, fpr_target: 0.05, mcc_m: null,
    })).rejects.toMatchObject({ status: 422 });
  });
});

describe('dataset overlay against the live service', () => {
  let scenario: ScenarioInfo;

  beforeAll(async () => {
    const body = await client.scenarios();
    expect(body.scenarios).toHaveLength(36);
    scenario = body.scenarios.find((sc) => sc.key === 'd0.5_u0.3_p0.2')!;
    expect(scenario).toBeDefined();
  });

  it('overlay point count equals the dataset endpoints', async () => {
    const core = new ExplorerCore(client, { curvePoints: 0 });
    const overlay = await core.loadOverlay(scenario);
    const studies = await client.studies();
    const expected = studies.studies.reduce((acc, s) => acc + s.n_tests, 0);
    expect(overlay.points.length).toBe(expected);
    const binTotal = overlay.densityBins.reduce((a, b) => a + b, 0);
    expect(binTotal).toBe(expected);
  });

  it('caches per scenario: one selection, one fetch burst', async () => {
    const core = new ExplorerCore(client, { curvePoints: 0 });
    await core.loadOverlay(scenario);
    const before = client.requestCount;
    await core.loadOverlay(scenario);
    expect(client.requestCount).toBe(before);
  });

  it('study highlight equals that study\'s rows from the endpoint', async () => {
    const core = new ExplorerCore(client, { curvePoints: 0 });
    const overlay = await core.loadOverlay(scenario);
    const studies = await client.studies();
    const sid = studies.studies[0]!.study_id;
    const highlighted = core.highlighted(overlay, sid);
    const direct = await client.studyTests(sid, scenario);
    expect(highlighted.length).toBe(direct.tests.length);
    const keys = new Set(highlighted.map((p) => p.testId));
    for (const row of direct.tests) {
      expect(keys.has(row.test_id)).toBe(true);
    }
    expect(core.highlighted(overlay, null)).toHaveLength(0);
  });

  it('unknown scenario filter returns zero points, not an error', async () => {
    const core = new ExplorerCore(client, { curvePoints: 0 });
    const overlay = await core.loadOverlay({
      key: 'none', label: 'none', d_threshold: 0.33, bias_u: 0.5, prior: 0.42,
    });
    expect(overlay.points).toHaveLength(0);
  });
});
