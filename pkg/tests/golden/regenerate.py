"""Regenerate the shipped fixture and golden values.

Run from the repository root:

    python3 tests/golden/regenerate.py

Before freezing anything, one row of the reference scenario is audited
against independent evaluations: the power against a fresh two-sample
simulation and the metric formulas against 50-digit mpmath arithmetic.
"""

import hashlib
import json
import sys
from pathlib import Path

import mpmath
import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from _fixture import FIXTURE_ARGS, FIXTURE_CSV, GOLDEN_JSON  # noqa: E402

from evidencelab import (  # noqa: E402
    AnalysisConfig,
    ExportFormat,
    TestFamily,
    build_study_summaries,
    citation_association,
    export_results,
    generate_synthetic,
    heatmap_max_ppv,
    make_scenario,
    run_grid,
    scenarios_from_config,
    serialize_dataset,
    summarize,
)
from evidencelab.export import build_metadata  # noqa: E402

mpmath.mp.dps = 50

REFERENCE_SCENARIO = (0.5, 0.3, 0.2)


def mp_ppv_biased(p, power, prior, u):
    p, power, prior, u = map(mpmath.mpf, (p, power, prior, u))
    r = prior / (1 - prior)
    beta = 1 - power
    num = power * r + u * beta * r
    den = r + p - beta * r + u - u * p + u * beta * r
    return num / den


def mp_rbp(p, power, target):
    p, power, target = map(mpmath.mpf, (p, power, target))
    num = p * (1 - target)
    return num / (num + power * target)


def simulate_t_power(d, n1, n2, crit, draws, seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    g1 = rng.standard_normal((draws, n1))
    g2 = rng.standard_normal((draws, n2)) + d
    m1, m2 = g1.mean(axis=1), g2.mean(axis=1)
    v1, v2 = g1.var(axis=1, ddof=1), g2.var(axis=1, ddof=1)
    sp = np.sqrt(((n1 - 1) * v1 + (n2 - 1) * v2) / (n1 + n2 - 2))
    t = (m2 - m1) / (sp * np.sqrt(1 / n1 + 1 / n2))
    return float(np.mean(np.abs(t) > crit))


def audit_row(row, cfg):
    """Independently re-derive one row's metrics before trusting the run."""
    sc = row.scenario
    if row.metrics_adjusted.power != row.metrics_raw.power:
        raise AssertionError("raw/adjusted power must agree")
    ppv = mp_ppv_biased(row.p_adjusted, row.metrics_adjusted.power, sc.prior, sc.bias_u)
    if abs(float(ppv) - row.metrics_adjusted.ppv) > 1e-12:
        raise AssertionError("adjusted PPV fails the mpmath audit")
    rbp_val = mp_rbp(row.p_adjusted, row.metrics_adjusted.power, cfg.fpr_target)
    if abs(float(rbp_val) - row.metrics_adjusted.rbp) > 1e-12:
        raise AssertionError("adjusted RBP fails the mpmath audit")
    lr = row.metrics_raw.power / row.p_raw
    if abs(lr - row.metrics_raw.lr) > 1e-9 * max(1.0, lr):
        raise AssertionError("raw LR fails the audit")
    print(f"audited row {row.study_id}/{row.test_id}: ppv/rbp/lr match mpmath")


def audit_power(ds, rows, cfg):
    """Monte Carlo power audit on one independent-t row of the fixture."""
    for study in ds.studies:
        for t in study.tests:
            if t.family is TestFamily.INDEPENDENT_T and t.n1 and t.n2:
                row = next(r for r in rows
                           if r.study_id == t.study_id and r.test_id == t.test_id)
                from evidencelab import DistKind, DistSpec, quantile
                crit = quantile(DistSpec(DistKind.STUDENT_T, df1=float(t.n1 + t.n2 - 2)),
                                1 - cfg.alpha / 2)
                mc = simulate_t_power(row.scenario.d_threshold, t.n1, t.n2, crit,
                                      200_000, seed=9)
                if abs(mc - row.metrics_raw.power) > 0.01:
                    raise AssertionError(
                        f"power audit failed: mc={mc}, analytic={row.metrics_raw.power}"
                    )
                print(f"audited power for {t.study_id}/{t.test_id}: "
                      f"analytic={row.metrics_raw.power:.4f} mc={mc:.4f}")
                return
    raise AssertionError("no independent-t row found to audit")


def main():
    ds = generate_synthetic(**FIXTURE_ARGS)
    FIXTURE_CSV.write_text(serialize_dataset(ds), encoding="utf-8")
    print(f"wrote {FIXTURE_CSV} ({ds.n_tests} tests, {len(ds.studies)} studies)")

    cfg = AnalysisConfig()
    rows = run_grid(ds, cfg)
    sc_ref = make_scenario(*REFERENCE_SCENARIO)
    ref_rows = [r for r in rows if r.scenario.key == sc_ref.key]
    audit_row(ref_rows[0], cfg)
    audit_power(ds, ref_rows, cfg)

    summaries = [
        summarize([r for r in rows if r.scenario.key == sc.key], sc, cfg)
        for sc in scenarios_from_config(cfg)
    ]
    heatmap = heatmap_max_ppv(rows)
    metadata = build_metadata(cfg, input="fixture.csv", command="grid")
    jsonl = export_results(rows, summaries, heatmap, ExportFormat.JSONL, metadata=metadata)
    csv_bytes = export_results(rows, summaries, heatmap, ExportFormat.CSV, metadata=metadata)

    ref_summary = next(s for s in summaries if s.scenario.key == sc_ref.key)
    assoc = citation_association(build_study_summaries(ds, ref_rows), ref_rows, seed=1)
    heat_idx = heatmap.scenario_keys.index(sc_ref.key)

    golden = {
        "fixture_sha256": hashlib.sha256(FIXTURE_CSV.read_bytes()).hexdigest(),
        "grid_jsonl_sha256": hashlib.sha256(jsonl).hexdigest(),
        "grid_csv_sha256": hashlib.sha256(csv_bytes).hexdigest(),
        "n_rows": len(rows),
        "reference_scenario": {
            "key": sc_ref.key,
            "n_tests": ref_summary.n_tests,
            "n_significant_raw": ref_summary.n_significant_raw,
            "n_significant_adjusted": ref_summary.n_significant_adjusted,
            "median_lr_adjusted": ref_summary.median_lr_adjusted,
            "expected_true_adjusted": ref_summary.expected_true_adjusted,
            "expected_false_adjusted": ref_summary.expected_false_adjusted,
            "fraction_true_adjusted": ref_summary.fraction_true_adjusted,
            "fraction_rbp_ge_half_adjusted": ref_summary.fraction_rbp_ge_half_adjusted,
            "heatmap_fraction_ge_half": heatmap.fraction_ge_half[heat_idx],
        },
        "reference_row": {
            "study_id": ref_rows[0].study_id,
            "test_id": ref_rows[0].test_id,
            "p_raw": ref_rows[0].p_raw,
            "p_adjusted": ref_rows[0].p_adjusted,
            "power": ref_rows[0].metrics_raw.power,
            "ppv_adjusted": ref_rows[0].metrics_adjusted.ppv,
            "rbp_adjusted": ref_rows[0].metrics_adjusted.rbp,
            "lr_adjusted": ref_rows[0].metrics_adjusted.lr,
        },
        "association_seed1": {
            "rho": assoc.rho,
            "p_perm": assoc.p_perm,
            "n_studies": assoc.n_studies,
            "n_reports": assoc.n_reports,
        },
    }
    GOLDEN_JSON.write_text(json.dumps(golden, indent=2, sort_keys=True) + "\n",
                           encoding="utf-8")
    print(f"wrote {GOLDEN_JSON}")
    print(json.dumps(golden["reference_scenario"], indent=2))


if __name__ == "__main__":
    main()
