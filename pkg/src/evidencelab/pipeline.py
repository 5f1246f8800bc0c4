"""End-to-end scenario-grid evaluation over a coded-test dataset.

For every scenario (effect-size threshold d, bias u, prior) the pipeline
computes per-test power, applies the per-study family-wise correction, and
evaluates the evidence metrics on both the raw and the adjusted p-value.
Output is a pure function of (Dataset, AnalysisConfig): rows are emitted in
canonical (study_id, test_id) order per scenario, so runs are reproducible
regardless of parallelism.

The study-level association between evidence strength (median adjusted RBP)
and citations (ACPA) is assessed with a Spearman rank correlation and a
seeded permutation test; a hierarchical model adds nothing recoverable here
and would not be deterministic across fitting backends.
"""

from __future__ import annotations

import logging
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dataset import AnalysisConfig, CodedTest, Dataset, MccMethod, StudyRecord, TestFamily
from .effects import PowerQuery, power_at_threshold, recompute_p
from .errors import DegenerateEffectError, InsufficientDataError
from .mcc import adjust_family
from .metrics import EvidenceInputs, EvidenceMetrics, evaluate, expected_true_positives

__all__ = [
    "Scenario",
    "TestMetricsRow",
    "ScenarioSummary",
    "StudySummary",
    "HeatmapResult",
    "AssociationResult",
    "make_scenario",
    "scenarios_from_config",
    "run_scenario",
    "run_grid",
    "summarize",
    "build_study_summaries",
    "heatmap_max_ppv",
    "citation_association",
]

logger = logging.getLogger(__name__)

_THRESHOLD_NAMES = {0.2: "small", 0.5: "medium", 0.8: "large"}
_BIAS_NAMES = {0.0: "no bias", 0.2: "well-run RCT", 0.3: "weak RCT", 0.8: "biased study"}
_PRIOR_NAMES = {0.1: "exploratory", 0.2: "intermediate", 0.5: "confirmatory"}


@dataclass(frozen=True)
class Scenario:
    """One (effect threshold, bias, prior) cell of the analysis grid."""

    d_threshold: float
    bias_u: float
    prior: float
    key: str
    label: str


def make_scenario(d_threshold: float, bias_u: float, prior: float) -> Scenario:
    t_name = _THRESHOLD_NAMES.get(d_threshold, f"d={d_threshold:g}")
    b_name = _BIAS_NAMES.get(bias_u, f"u={bias_u:g}")
    p_name = _PRIOR_NAMES.get(prior, f"prior={prior:g}")
    return Scenario(
        d_threshold=d_threshold,
        bias_u=bias_u,
        prior=prior,
        key=f"d{d_threshold:g}_u{bias_u:g}_p{prior:g}",
        label=f"{t_name} (d={d_threshold:g}) / {b_name} (u={bias_u:g}) / {p_name} (prior={prior:g})",
    )


def scenarios_from_config(cfg: AnalysisConfig) -> tuple[Scenario, ...]:
    """Cross product of the configured grids, thresholds outermost."""
    return tuple(
        make_scenario(d, u, prior)
        for d in cfg.thresholds
        for u in cfg.biases
        for prior in cfg.priors
    )


@dataclass(frozen=True)
class TestMetricsRow:
    __test__ = False  # not a pytest class despite the name

    study_id: str
    test_id: str
    scenario: Scenario
    n_total: int
    p_raw: float
    p_adjusted: float
    metrics_raw: EvidenceMetrics
    metrics_adjusted: EvidenceMetrics


@dataclass(frozen=True)
class ScenarioSummary:
    """Aggregate view of one scenario across all tests."""

    scenario: Scenario
    n_tests: int
    n_significant_raw: int
    n_significant_adjusted: int
    median_lr_raw: float | None
    median_lr_adjusted: float | None
    expected_true_adjusted: float
    expected_false_adjusted: float
    fraction_true_adjusted: float | None
    fraction_rbp_ge_half_raw: float | None
    fraction_rbp_ge_half_adjusted: float | None


@dataclass(frozen=True)
class StudySummary:
    """Per-study aggregates, keyed by scenario where scenario-dependent."""

    study_id: str
    year: int
    acpa: float
    n_tests: int
    max_ppv: dict[str, float]
    n_significant_raw: dict[str, int]
    n_significant_adjusted: dict[str, int]
    median_lr_adjusted: dict[str, float | None]


@dataclass(frozen=True)
class HeatmapResult:
    """Study-by-scenario matrix of maximum adjusted PPV."""

    study_ids: tuple[str, ...]
    scenario_keys: tuple[str, ...]
    values: tuple[tuple[float | None, ...], ...]
    fraction_ge_half: tuple[float, ...]


@dataclass(frozen=True)
class AssociationResult:
    rho: float
    p_perm: float
    n_studies: int
    n_reports: int


# ---------------------------------------------------------------------------
# Per-study preparation (scenario-independent, cached)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4096)
def _prepare_study(
    study: StudyRecord, two_sided: bool, mcc_method: MccMethod
) -> tuple[tuple[CodedTest, ...], tuple[float, ...], tuple[float, ...], tuple[str, ...]]:
    """Usable tests with raw and family-adjusted p-values.

    The raw p is recomputed from the coded statistic when possible (reported
    p-values are often thresholded); the coded p is the fallback. Tests with
    neither are dropped. The correction family is every usable test of the
    study, whether or not a power value is obtainable later.
    """
    usable: list[CodedTest] = []
    p_raw: list[float] = []
    skipped: list[str] = []
    for t in study.tests:
        try:
            p = recompute_p(t, two_sided=two_sided)
        except (InsufficientDataError, DegenerateEffectError):
            p = t.p_reported
        if p is None:
            skipped.append(f"{t.study_id}/{t.test_id}: no recomputable or reported p")
            continue
        usable.append(t)
        p_raw.append(p)
    p_adj = adjust_family(p_raw, mcc_method)
    return tuple(usable), tuple(p_raw), tuple(p_adj), tuple(skipped)


@lru_cache(maxsize=65536)
def _power_cached(
    family: TestFamily,
    n_total: int,
    n1: int | None,
    n2: int | None,
    df1: int | None,
    d: float,
    alpha: float,
    two_sided: bool,
) -> float:
    return power_at_threshold(PowerQuery(
        family=family, n_total=n_total, d_threshold=d, alpha=alpha,
        two_sided=two_sided, n1=n1, n2=n2, df1=df1,
    ))


def _test_power(t: CodedTest, d: float, alpha: float, two_sided: bool) -> float:
    df1 = t.df1 if t.family is TestFamily.ONE_WAY_F else None
    return _power_cached(t.family, t.n_total, t.n1, t.n2, df1, d, alpha, two_sided)


# ---------------------------------------------------------------------------
# Scenario and grid evaluation
# ---------------------------------------------------------------------------

def run_scenario(ds: Dataset, cfg: AnalysisConfig, sc: Scenario) -> list[TestMetricsRow]:
    """Evaluate one scenario; rows ordered by (study_id, test_id)."""
    rows: list[TestMetricsRow] = []
    for study in ds.studies:
        usable, p_raw, p_adj, skipped = _prepare_study(study, cfg.two_sided, cfg.mcc_method)
        for reason in skipped:
            logger.info("skipping %s", reason)
        for t, praw, padj in zip(usable, p_raw, p_adj):
            try:
                power = _test_power(t, sc.d_threshold, cfg.alpha, cfg.two_sided)
            except InsufficientDataError as exc:
                logger.info("skipping %s/%s: %s", t.study_id, t.test_id, exc)
                continue
            sig_raw = praw < cfg.alpha
            sig_adj = padj < cfg.alpha
            metrics_raw = evaluate(
                EvidenceInputs(p_obs=praw, power=power, prior=sc.prior, bias_u=sc.bias_u),
                cfg.fpr_target, sig_raw, sig_adj,
            )
            metrics_adj = evaluate(
                EvidenceInputs(p_obs=padj, power=power, prior=sc.prior, bias_u=sc.bias_u),
                cfg.fpr_target, sig_raw, sig_adj,
            )
            rows.append(TestMetricsRow(
                study_id=t.study_id, test_id=t.test_id, scenario=sc,
                n_total=t.n_total, p_raw=praw, p_adjusted=padj,
                metrics_raw=metrics_raw, metrics_adjusted=metrics_adj,
            ))
    rows.sort(key=lambda r: (r.study_id, r.test_id))
    return rows


def run_grid(ds: Dataset, cfg: AnalysisConfig, max_workers: int = 1) -> list[TestMetricsRow]:
    """Evaluate every scenario of the configured grid.

    Scenarios are independent, so they may be evaluated concurrently; the
    result is always assembled in grid order and is bit-identical for any
    `max_workers`.
    """
    scenarios = scenarios_from_config(cfg)
    if max_workers <= 1:
        per_scenario = [run_scenario(ds, cfg, sc) for sc in scenarios]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            per_scenario = list(pool.map(lambda sc: run_scenario(ds, cfg, sc), scenarios))
    return [row for rows in per_scenario for row in rows]


def summarize(rows: list[TestMetricsRow], sc: Scenario, cfg: AnalysisConfig) -> ScenarioSummary:
    """Aggregate one scenario's rows; medians/fractions over significant rows."""
    for r in rows:
        if r.scenario.key != sc.key:
            raise ValueError(f"row from scenario {r.scenario.key} passed to summarize({sc.key})")
    sig_raw = [r for r in rows if r.metrics_raw.significant_raw]
    sig_adj = [r for r in rows if r.metrics_adjusted.significant_adjusted]
    expected = expected_true_positives([r.metrics_adjusted for r in sig_adj])
    return ScenarioSummary(
        scenario=sc,
        n_tests=len(rows),
        n_significant_raw=len(sig_raw),
        n_significant_adjusted=len(sig_adj),
        median_lr_raw=statistics.median(r.metrics_raw.lr for r in sig_raw) if sig_raw else None,
        median_lr_adjusted=statistics.median(r.metrics_adjusted.lr for r in sig_adj) if sig_adj else None,
        expected_true_adjusted=expected.expected_true,
        expected_false_adjusted=expected.expected_false,
        fraction_true_adjusted=expected.fraction_true,
        fraction_rbp_ge_half_raw=(
            sum(r.metrics_raw.rbp >= 0.5 for r in sig_raw) / len(sig_raw) if sig_raw else None
        ),
        fraction_rbp_ge_half_adjusted=(
            sum(r.metrics_adjusted.rbp >= 0.5 for r in sig_adj) / len(sig_adj) if sig_adj else None
        ),
    )


def build_study_summaries(ds: Dataset, rows: list[TestMetricsRow]) -> list[StudySummary]:
    """Per-study aggregates over all scenarios present in `rows`."""
    by_study: dict[str, dict[str, list[TestMetricsRow]]] = {}
    for r in rows:
        by_study.setdefault(r.study_id, {}).setdefault(r.scenario.key, []).append(r)
    meta = {s.study_id: s for s in ds.studies}
    summaries: list[StudySummary] = []
    for study_id in sorted(by_study):
        per_scenario = by_study[study_id]
        max_ppv: dict[str, float] = {}
        n_sig_raw: dict[str, int] = {}
        n_sig_adj: dict[str, int] = {}
        med_lr: dict[str, float | None] = {}
        n_tests = 0
        for key, scenario_rows in per_scenario.items():
            n_tests = max(n_tests, len(scenario_rows))
            max_ppv[key] = max(r.metrics_adjusted.ppv for r in scenario_rows)
            n_sig_raw[key] = sum(r.metrics_raw.significant_raw for r in scenario_rows)
            sig = [r for r in scenario_rows if r.metrics_adjusted.significant_adjusted]
            n_sig_adj[key] = len(sig)
            med_lr[key] = statistics.median(r.metrics_adjusted.lr for r in sig) if sig else None
        study = meta.get(study_id)
        summaries.append(StudySummary(
            study_id=study_id,
            year=study.year if study else 0,
            acpa=study.acpa if study else 0.0,
            n_tests=n_tests,
            max_ppv=max_ppv,
            n_significant_raw=n_sig_raw,
            n_significant_adjusted=n_sig_adj,
            median_lr_adjusted=med_lr,
        ))
    return summaries


def heatmap_max_ppv(rows: list[TestMetricsRow]) -> HeatmapResult:
    """Study-by-scenario maxima of adjusted PPV, studies in descending order."""
    scenario_keys: list[str] = []
    cells: dict[str, dict[str, float]] = {}
    for r in rows:
        if r.scenario.key not in scenario_keys:
            scenario_keys.append(r.scenario.key)
        row_cells = cells.setdefault(r.study_id, {})
        key = r.scenario.key
        ppv = r.metrics_adjusted.ppv
        if key not in row_cells or ppv > row_cells[key]:
            row_cells[key] = ppv
    overall = {
        sid: max(per.values()) if per else 0.0 for sid, per in cells.items()
    }
    study_ids = tuple(sorted(cells, key=lambda sid: (-overall[sid], sid)))
    values = tuple(
        tuple(cells[sid].get(key) for key in scenario_keys) for sid in study_ids
    )
    fractions = []
    for col, key in enumerate(scenario_keys):
        col_vals = [values[i][col] for i in range(len(study_ids)) if values[i][col] is not None]
        fractions.append(
            sum(v >= 0.5 for v in col_vals) / len(col_vals) if col_vals else 0.0
        )
    return HeatmapResult(
        study_ids=study_ids,
        scenario_keys=tuple(scenario_keys),
        values=values,
        fraction_ge_half=tuple(fractions),
    )


# ---------------------------------------------------------------------------
# Citation association
# ---------------------------------------------------------------------------

def _ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties replaced by their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    ranks[order] = np.arange(1, len(values) + 1, dtype=float)
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        if j > i:
            ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _spearman(x: np.ndarray, y: np.ndarray) -> float:
    rx = _ranks(x)
    ry = _ranks(y)
    rx_c = rx - rx.mean()
    ry_c = ry - ry.mean()
    den = math.sqrt(float(rx_c @ rx_c) * float(ry_c @ ry_c))
    if den == 0.0:
        return 0.0
    return float(rx_c @ ry_c) / den


def citation_association(
    summaries: list[StudySummary],
    rows: list[TestMetricsRow],
    seed: int,
    n_perm: int = 10_000,
) -> AssociationResult:
    """Spearman correlation of per-study median adjusted RBP against ACPA.

    Two-sided permutation p-value over `n_perm` shuffles of the ACPA labels,
    deterministic for a fixed seed. Requires at least three studies with
    significant (adjusted) rows.
    """
    sig = [r for r in rows if r.metrics_adjusted.significant_adjusted]
    rbp_by_study: dict[str, list[float]] = {}
    for r in sig:
        rbp_by_study.setdefault(r.study_id, []).append(r.metrics_adjusted.rbp)
    acpa_by_study = {s.study_id: s.acpa for s in summaries}
    study_ids = sorted(sid for sid in rbp_by_study if sid in acpa_by_study)
    if len(study_ids) < 3:
        raise InsufficientDataError(
            f"citation association needs >= 3 studies with significant rows, got {len(study_ids)}"
        )
    x = np.array([statistics.median(rbp_by_study[sid]) for sid in study_ids])
    y = np.array([acpa_by_study[sid] for sid in study_ids])
    rho = _spearman(x, y)

    rx_c = _ranks(x) - _ranks(x).mean()
    ry = _ranks(y)
    ry_c = ry - ry.mean()
    den = math.sqrt(float(rx_c @ rx_c) * float(ry_c @ ry_c))
    rng = np.random.Generator(np.random.PCG64(seed))
    perms = rng.permuted(np.tile(ry, (n_perm, 1)), axis=1)
    if den == 0.0:
        p_perm = 1.0
    else:
        rhos = (perms - ry.mean()) @ rx_c / den
        exceed = int(np.count_nonzero(np.abs(rhos) >= abs(rho) - 1e-12))
        p_perm = (1 + exceed) / (1 + n_perm)
    return AssociationResult(
        rho=rho, p_perm=p_perm, n_studies=len(study_ids), n_reports=len(sig)
    )
