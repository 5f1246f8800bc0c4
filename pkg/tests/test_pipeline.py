"""Scenario grid, summaries, heatmap, and the citation association."""

import numpy as np
import pytest

from evidencelab import (
    AnalysisConfig,
    CodedTest,
    Dataset,
    InsufficientDataError,
    StudyRecord,
    TestFamily,
    build_study_summaries,
    citation_association,
    heatmap_max_ppv,
    make_scenario,
    run_grid,
    run_scenario,
    scenarios_from_config,
    summarize,
)
from evidencelab.metrics import EvidenceMetrics
from evidencelab.pipeline import TestMetricsRow, _spearman


def _single_test_dataset(p_reported=0.01, n=128):
    test = CodedTest(study_id="S1", test_id="T1", family=TestFamily.Z_TEST,
                     n_total=n, n1=n // 2, n2=n // 2, p_reported=p_reported)
    return Dataset(studies=(StudyRecord("S1", 2012, 1.0, (test,)),))


def test_single_z_test_reference_scenario():
    ds = _single_test_dataset(p_reported=0.01, n=128)
    sc = make_scenario(0.5, 0.0, 0.5)
    rows = run_scenario(ds, AnalysisConfig(), sc)
    assert len(rows) == 1
    row = rows[0]
    assert row.p_raw == 0.01
    assert row.p_adjusted == 0.01  # family of one
    assert row.metrics_raw.power == pytest.approx(0.807, abs=0.005)
    assert row.metrics_raw.ppv == pytest.approx(0.9878, abs=0.001)


def test_empty_dataset_gives_empty_rows():
    ds = Dataset(studies=())
    sc = make_scenario(0.5, 0.3, 0.2)
    assert run_scenario(ds, AnalysisConfig(), sc) == []


def test_grid_cardinality_for_single_test():
    ds = _single_test_dataset()
    rows = run_grid(ds, AnalysisConfig())
    assert len(rows) == 3 * 4 * 3


def test_grid_restricted_to_scenario_equals_run_scenario(fixture_dataset, default_config):
    rows = run_grid(fixture_dataset, default_config)
    sc = scenarios_from_config(default_config)[5]
    subset = [r for r in rows if r.scenario.key == sc.key]
    assert subset == run_scenario(fixture_dataset, default_config, sc)


def test_grid_parallelism_invariance(fixture_dataset, default_config):
    serial = run_grid(fixture_dataset, default_config, max_workers=1)
    for workers in (4, 16):
        assert run_grid(fixture_dataset, default_config, max_workers=workers) == serial


def test_row_invariants(fixture_dataset, default_config):
    rows = run_grid(fixture_dataset, default_config)
    for r in rows:
        assert r.p_adjusted >= r.p_raw
        for m in (r.metrics_raw, r.metrics_adjusted):
            assert m.ppv + m.fpr == pytest.approx(1.0, abs=1e-12)
            assert 0.0 < m.ppv < 1.0
        assert r.metrics_raw.power == r.metrics_adjusted.power


def test_adjusted_fpr_monotone_in_bias(fixture_dataset, default_config):
    """FPR rises with bias u exactly when power exceeds the adjusted p.

    The derivative of the bias-adjusted PPV in u has the constant sign of
    (p - power), so the direction flips for tests whose adjusted p exceeds
    their power; both directions are asserted.
    """
    rows = run_grid(fixture_dataset, default_config)
    by_test_prior: dict = {}
    for r in rows:
        key = (r.study_id, r.test_id, r.scenario.d_threshold, r.scenario.prior)
        by_test_prior.setdefault(key, []).append(
            (r.scenario.bias_u, r.metrics_adjusted.fpr,
             r.metrics_adjusted.power, r.p_adjusted)
        )
    checked_up = checked_down = 0
    for series in by_test_prior.values():
        series.sort()
        fprs = [f for _, f, _, _ in series]
        power, p_adj = series[0][2], series[0][3]
        if power > p_adj + 1e-12:
            assert all(b >= a - 1e-12 for a, b in zip(fprs, fprs[1:]))
            checked_up += 1
        elif power < p_adj - 1e-12:
            assert all(b <= a + 1e-12 for a, b in zip(fprs, fprs[1:]))
            checked_down += 1
    assert checked_up > 100 and checked_down > 100


def test_significant_adjusted_never_exceeds_raw(fixture_dataset, default_config):
    rows = run_grid(fixture_dataset, default_config)
    for sc in scenarios_from_config(default_config):
        subset = [r for r in rows if r.scenario.key == sc.key]
        n_raw = sum(r.metrics_raw.significant_raw for r in subset)
        n_adj = sum(r.metrics_adjusted.significant_adjusted for r in subset)
        assert n_adj <= n_raw


def test_skipped_test_without_p(caplog):
    no_p = CodedTest(study_id="S1", test_id="T1", family=TestFamily.INDEPENDENT_T,
                     n_total=40, effect_d=0.5)  # effect only: no statistic, no p
    ok = CodedTest(study_id="S1", test_id="T2", family=TestFamily.Z_TEST,
                   n_total=40, p_reported=0.02)
    ds = Dataset(studies=(StudyRecord("S1", 2010, 0.5, (no_p, ok)),))
    rows = run_scenario(ds, AnalysisConfig(), make_scenario(0.5, 0.3, 0.2))
    assert [r.test_id for r in rows] == ["T2"]


def _summary_rows(lrs, sc):
    rows = []
    for i, lr in enumerate(lrs):
        m = EvidenceMetrics(power=0.5, ppv=0.6, fpr=0.4, lr=lr, rbp=0.3,
                            significant_raw=True, significant_adjusted=True)
        rows.append(TestMetricsRow(
            study_id="S1", test_id=f"T{i}", scenario=sc, n_total=50,
            p_raw=0.01, p_adjusted=0.01, metrics_raw=m, metrics_adjusted=m,
        ))
    return rows


def test_summarize_empty():
    sc = make_scenario(0.5, 0.3, 0.2)
    s = summarize([], sc, AnalysisConfig())
    assert s.n_tests == 0
    assert s.n_significant_adjusted == 0
    assert s.median_lr_adjusted is None
    assert s.fraction_true_adjusted is None


def test_summarize_median_of_two():
    sc = make_scenario(0.5, 0.3, 0.2)
    s = summarize(_summary_rows([4.0, 6.0], sc), sc, AnalysisConfig())
    assert s.median_lr_adjusted == pytest.approx(5.0)
    assert s.n_significant_adjusted == 2
    assert s.expected_true_adjusted == pytest.approx(1.2)


def test_summarize_rejects_foreign_rows():
    sc = make_scenario(0.5, 0.3, 0.2)
    other = make_scenario(0.2, 0.0, 0.5)
    with pytest.raises(ValueError):
        summarize(_summary_rows([4.0], other), sc, AnalysisConfig())


def test_heatmap_singleton_and_max():
    sc1 = make_scenario(0.5, 0.3, 0.2)
    rows = _summary_rows([4.0], sc1)
    h = heatmap_max_ppv(rows)
    assert h.study_ids == ("S1",)
    assert h.values == ((0.6,),)

    m_low = EvidenceMetrics(power=0.5, ppv=0.3, fpr=0.7, lr=2.0, rbp=0.3,
                            significant_raw=True, significant_adjusted=True)
    m_high = EvidenceMetrics(power=0.5, ppv=0.7, fpr=0.3, lr=9.0, rbp=0.3,
                             significant_raw=True, significant_adjusted=True)
    rows = [
        TestMetricsRow("S1", "T1", sc1, 50, 0.01, 0.01, m_low, m_low),
        TestMetricsRow("S1", "T2", sc1, 50, 0.01, 0.01, m_high, m_high),
    ]
    h = heatmap_max_ppv(rows)
    assert h.values == ((0.7,),)
    assert h.fraction_ge_half == (1.0,)


def test_heatmap_ordering_and_fraction(fixture_dataset, default_config):
    rows = run_grid(fixture_dataset, default_config)
    h = heatmap_max_ppv(rows)
    overall = [max(v for v in row if v is not None) for row in h.values]
    assert all(b <= a for a, b in zip(overall, overall[1:]))
    assert len(h.fraction_ge_half) == len(h.scenario_keys) == 36
    assert all(0.0 <= f <= 1.0 for f in h.fraction_ge_half)


def test_weak_rct_intermediate_prior_fpr_floor(fixture_dataset, default_config):
    """u=.3 with prior=.2 leaves every test above 50% FPR on the fixture."""
    sc = make_scenario(0.5, 0.3, 0.2)
    rows = run_scenario(fixture_dataset, default_config, sc)
    assert rows
    for r in rows:
        if r.p_adjusted >= 0.001:
            assert r.metrics_adjusted.fpr > 0.5


def test_spearman_reference_values():
    assert _spearman(np.array([1.0, 2, 3]), np.array([3.0, 1, 2])) == pytest.approx(-0.5)
    assert _spearman(np.array([1.0, 2, 3]), np.array([10.0, 20, 30])) == pytest.approx(1.0)
    assert _spearman(np.array([1.0, 2, 3, 4]), np.array([8.0, 7, 6, 5])) == pytest.approx(-1.0)


def test_association_monotone_dependence(fixture_dataset, default_config):
    sc = make_scenario(0.5, 0.3, 0.2)
    rows = run_scenario(fixture_dataset, default_config, sc)
    summaries = build_study_summaries(fixture_dataset, rows)
    # Rewire ACPA to follow median RBP exactly: rho must be 1, p small.
    sig = [r for r in rows if r.metrics_adjusted.significant_adjusted]
    med: dict = {}
    for r in sig:
        med.setdefault(r.study_id, []).append(r.metrics_adjusted.rbp)
    rigged = [
        type(s)(study_id=s.study_id, year=s.year,
                acpa=float(np.median(med[s.study_id])) if s.study_id in med else 0.0,
                n_tests=s.n_tests, max_ppv=s.max_ppv,
                n_significant_raw=s.n_significant_raw,
                n_significant_adjusted=s.n_significant_adjusted,
                median_lr_adjusted=s.median_lr_adjusted)
        for s in summaries
    ]
    result = citation_association(rigged, rows, seed=3)
    assert result.rho == pytest.approx(1.0)
    assert result.p_perm < 0.01


def test_association_determinism(fixture_dataset, default_config, golden):
    sc = make_scenario(0.5, 0.3, 0.2)
    rows = run_scenario(fixture_dataset, default_config, sc)
    summaries = build_study_summaries(fixture_dataset, rows)
    a = citation_association(summaries, rows, seed=1)
    b = citation_association(summaries, rows, seed=1)
    assert a == b
    ref = golden["association_seed1"]
    assert a.rho == pytest.approx(ref["rho"], abs=1e-12)
    assert a.p_perm == pytest.approx(ref["p_perm"], abs=1e-12)
    assert (a.n_studies, a.n_reports) == (ref["n_studies"], ref["n_reports"])


def test_association_needs_three_studies():
    ds = _single_test_dataset()
    sc = make_scenario(0.5, 0.3, 0.2)
    rows = run_scenario(ds, AnalysisConfig(), sc)
    summaries = build_study_summaries(ds, rows)
    with pytest.raises(InsufficientDataError):
        citation_association(summaries, rows, seed=1)


def test_golden_reference_scenario(fixture_dataset, default_config, golden):
    sc = make_scenario(0.5, 0.3, 0.2)
    rows = run_scenario(fixture_dataset, default_config, sc)
    s = summarize(rows, sc, default_config)
    ref = golden["reference_scenario"]
    assert s.n_tests == ref["n_tests"]
    assert s.n_significant_raw == ref["n_significant_raw"]
    assert s.n_significant_adjusted == ref["n_significant_adjusted"]
    assert s.median_lr_adjusted == pytest.approx(ref["median_lr_adjusted"], rel=1e-12)
    assert s.expected_true_adjusted == pytest.approx(ref["expected_true_adjusted"], rel=1e-12)
    assert s.fraction_rbp_ge_half_adjusted == pytest.approx(
        ref["fraction_rbp_ge_half_adjusted"], rel=1e-12)
    row = rows[0]
    ref_row = golden["reference_row"]
    assert (row.study_id, row.test_id) == (ref_row["study_id"], ref_row["test_id"])
    assert row.metrics_raw.power == pytest.approx(ref_row["power"], rel=1e-12)
    assert row.metrics_adjusted.ppv == pytest.approx(ref_row["ppv_adjusted"], rel=1e-12)
    assert row.metrics_adjusted.rbp == pytest.approx(ref_row["rbp_adjusted"], rel=1e-12)
