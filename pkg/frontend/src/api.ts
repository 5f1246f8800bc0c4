// Thin typed client for the evidencelab HTTP API. Every number the UI
// shows comes from these responses; nothing is computed locally.

import type {
  ScenariosResponse,
  StudiesResponse,
  StudyTestsResponse,
  SummaryResponse,
  WhatIfControls,
  WhatIfResponse,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: unknown,
    message?: string,
  ) {
    super(message ?? `API error ${status}`);
  }

  get noDataset(): boolean {
    const detail = (this.body as { detail?: { status?: string } })?.detail;
    return this.status === 503 && detail?.status === 'no_dataset';
  }

  /** Field names flagged by a 422 validation response. */
  get invalidFields(): string[] {
    const detail = (this.body as { detail?: { loc?: unknown[] }[] })?.detail;
    if (!Array.isArray(detail)) return [];
    return detail
      .map((d) => (Array.isArray(d.loc) ? String(d.loc[d.loc.length - 1]) : ''))
      .filter((f) => f.length > 0);
  }
}

export class ApiClient {
  requestCount = 0;

  constructor(readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    this.requestCount += 1;
    let response: Response;
    try {
      response = await fetch(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(0, null, `service unreachable: ${String(err)}`);
    }
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      throw new ApiError(response.status, body);
    }
    return body as T;
  }

  scenarios(): Promise<ScenariosResponse> {
    return this.request('/api/scenarios');
  }

  summary(): Promise<SummaryResponse> {
    return this.request('/api/summary');
  }

  studies(): Promise<StudiesResponse> {
    return this.request('/api/studies');
  }

  studyTests(
    studyId: string,
    scenario?: { d_threshold: number; bias_u: number; prior: number },
  ): Promise<StudyTestsResponse> {
    let query = '';
    if (scenario) {
      const params = new URLSearchParams({
        d: String(scenario.d_threshold),
        bias: String(scenario.bias_u),
        prior: String(scenario.prior),
      });
      query = `?${params.toString()}`;
    }
    return this.request(`/api/studies/${encodeURIComponent(studyId)}/tests${query}`);
  }

  whatif(controls: WhatIfControls): Promise<WhatIfResponse> {
    const body: Record<string, unknown> = { ...controls };
    if (controls.mcc_m === null) delete body['mcc_m'];
    return this.request('/api/whatif', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }
}
