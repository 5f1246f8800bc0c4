// Wire types mirroring the evidencelab HTTP API.

export type Family = 't_ind' | 't_paired' | 'chi2_1' | 'r' | 'F_oneway' | 'Z';

export interface WhatIfControls {
  p_obs: number;
  n_total: number;
  family: Family;
  d_threshold: number;
  bias_u: number;
  prior: number;
  fpr_target: number;
  mcc_m: number | null;
}

export interface WhatIfResponse {
  schema_version: number;
  power: number;
  p_effective: number;
  ppv: number;
  fpr: number;
  lr: number;
  rbp: number;
  notes: { alpha: number; two_sided: boolean; mcc: string };
}

export interface ScenarioInfo {
  key: string;
  label: string;
  d_threshold: number;
  bias_u: number;
  prior: number;
}

export interface ScenariosResponse {
  schema_version: number;
  config: Record<string, unknown>;
  scenarios: ScenarioInfo[];
}

export interface ScenarioSummary {
  kind: 'summary';
  scenario: ScenarioInfo;
  n_tests: number;
  n_significant_raw: number;
  n_significant_adjusted: number;
  median_lr_raw: number | null;
  median_lr_adjusted: number | null;
  expected_true_adjusted: number;
  expected_false_adjusted: number;
  fraction_true_adjusted: number | null;
  fraction_rbp_ge_half_raw: number | null;
  fraction_rbp_ge_half_adjusted: number | null;
}

export interface SummaryResponse {
  schema_version: number;
  summaries: ScenarioSummary[];
}

export interface StudySummary {
  kind: 'study_summary';
  study_id: string;
  year: number;
  acpa: number;
  n_tests: number;
  max_ppv: Record<string, number>;
  n_significant_raw: Record<string, number>;
  n_significant_adjusted: Record<string, number>;
  median_lr_adjusted: Record<string, number | null>;
}

export interface StudiesResponse {
  schema_version: number;
  studies: StudySummary[];
}

export interface MetricsBlock {
  power: number;
  ppv: number;
  fpr: number;
  lr: number;
  rbp: number;
  significant_raw: boolean;
  significant_adjusted: boolean;
}

export interface TestRow {
  kind: 'row';
  study_id: string;
  test_id: string;
  scenario: ScenarioInfo;
  n_total: number;
  p_raw: number;
  p_adjusted: number;
  metrics_raw: MetricsBlock;
  metrics_adjusted: MetricsBlock;
}

export interface StudyTestsResponse {
  schema_version: number;
  study_id: string;
  tests: TestRow[];
}

export interface OverlayPoint {
  studyId: string;
  testId: string;
  n: number;
  fpr: number;
  significant: boolean;
}

export interface OverlayData {
  scenario: ScenarioInfo;
  points: OverlayPoint[];
  /** Binned counts of the FPR values for the density margin (display only). */
  densityBins: number[];
}
