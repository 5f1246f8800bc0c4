"""Stable serialization of pipeline results, plus the scatter smoother.

Two formats share one metadata block (schema version, config digest, MCC
method, and notes on the formula variant and p-value clamping):

* JSON lines: one object per record, tagged with a `kind` field
  (metadata / row / summary / heatmap / association). This format round
  trips: parse_results(export_results(...)) reproduces the inputs.
* CSV: the metadata as `#`-prefixed comment lines followed by the rows
  table (ingest-style identifiers plus metric columns).

Rows are canonically sorted before writing, so exports do not depend on
input order, evaluation order, or parallelism.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
from dataclasses import dataclass
from enum import Enum

from .dataset import AnalysisConfig
from .errors import InsufficientDataError, SchemaError
from .metrics import EvidenceMetrics
from .pipeline import (
    AssociationResult,
    HeatmapResult,
    Scenario,
    ScenarioSummary,
    StudySummary,
    TestMetricsRow,
    make_scenario,
)

__all__ = [
    "ExportFormat",
    "SeriesPoint",
    "ResultsBundle",
    "build_metadata",
    "export_results",
    "parse_results",
    "smooth_series",
]

SCHEMA_VERSION = 1

_NOTES = {
    "ppv_bias_formula": (
        "Ioannidis-consistent denominator: the bias-adjusted PPV subtracts "
        "(1-power)*R, keeping results inside (0,1)"
    ),
    "p_clamp": "p-values are clamped to >= 1e-300 at ingest so likelihood ratios stay finite",
    "p_substitution": "observed (and MCC-adjusted) p-values substitute for alpha in the PPV formulas",
    "smoothing": "loess-like: single-pass local-linear fit with tricube weights, no robustness iterations",
    "association": (
        "citation association uses a study-level Spearman rank correlation with a "
        "seeded permutation test instead of a hierarchical model"
    ),
}


class ExportFormat(Enum):
    CSV = "csv"
    JSONL = "jsonl"


@dataclass(frozen=True)
class SeriesPoint:
    """One scatter point: metric value y at sample size x, within a group."""

    x: float
    y: float
    group: str


@dataclass
class ResultsBundle:
    metadata: dict
    rows: list[TestMetricsRow]
    summaries: list[ScenarioSummary]
    heatmap: HeatmapResult | None
    association: AssociationResult | None = None


def config_digest(cfg: AnalysisConfig) -> str:
    canon = json.dumps(cfg.as_dict(), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canon.encode()).hexdigest()[:16]


def build_metadata(cfg: AnalysisConfig, **extra) -> dict:
    meta = {
        "kind": "metadata",
        "schema_version": SCHEMA_VERSION,
        "config": cfg.as_dict(),
        "config_digest": config_digest(cfg),
        "mcc_method": cfg.mcc_method.value,
        "notes": dict(_NOTES),
    }
    meta.update(extra)
    return meta


# ---------------------------------------------------------------------------
# JSON encoding of the result dataclasses
# ---------------------------------------------------------------------------

def _scenario_json(sc: Scenario) -> dict:
    return {
        "d_threshold": sc.d_threshold,
        "bias_u": sc.bias_u,
        "prior": sc.prior,
        "key": sc.key,
        "label": sc.label,
    }


def _metrics_json(m: EvidenceMetrics) -> dict:
    return {
        "power": m.power, "ppv": m.ppv, "fpr": m.fpr, "lr": m.lr, "rbp": m.rbp,
        "significant_raw": m.significant_raw,
        "significant_adjusted": m.significant_adjusted,
    }


def row_json(r: TestMetricsRow) -> dict:
    return {
        "kind": "row",
        "study_id": r.study_id,
        "test_id": r.test_id,
        "scenario": _scenario_json(r.scenario),
        "n_total": r.n_total,
        "p_raw": r.p_raw,
        "p_adjusted": r.p_adjusted,
        "metrics_raw": _metrics_json(r.metrics_raw),
        "metrics_adjusted": _metrics_json(r.metrics_adjusted),
    }


def summary_json(s: ScenarioSummary) -> dict:
    return {
        "kind": "summary",
        "scenario": _scenario_json(s.scenario),
        "n_tests": s.n_tests,
        "n_significant_raw": s.n_significant_raw,
        "n_significant_adjusted": s.n_significant_adjusted,
        "median_lr_raw": s.median_lr_raw,
        "median_lr_adjusted": s.median_lr_adjusted,
        "expected_true_adjusted": s.expected_true_adjusted,
        "expected_false_adjusted": s.expected_false_adjusted,
        "fraction_true_adjusted": s.fraction_true_adjusted,
        "fraction_rbp_ge_half_raw": s.fraction_rbp_ge_half_raw,
        "fraction_rbp_ge_half_adjusted": s.fraction_rbp_ge_half_adjusted,
    }


def heatmap_json(h: HeatmapResult) -> dict:
    return {
        "kind": "heatmap",
        "study_ids": list(h.study_ids),
        "scenario_keys": list(h.scenario_keys),
        "values": [list(row) for row in h.values],
        "fraction_ge_half": list(h.fraction_ge_half),
    }


def association_json(a: AssociationResult) -> dict:
    return {
        "kind": "association",
        "rho": a.rho,
        "p_perm": a.p_perm,
        "n_studies": a.n_studies,
        "n_reports": a.n_reports,
    }


def series_json(
    metric: str,
    bias_u: float,
    prior: float,
    raw: list[SeriesPoint],
    smoothed: list[SeriesPoint],
) -> dict:
    """One plottable facet: metric vs sample size, grouped by threshold class."""
    smooth_by_key = {(p.group, p.x): p.y for p in smoothed}
    return {
        "kind": "series",
        "metric": metric,
        "bias_u": bias_u,
        "prior": prior,
        "points": [
            {"x": p.x, "y": p.y, "y_smooth": smooth_by_key.get((p.group, p.x)), "group": p.group}
            for p in raw
        ],
    }


def study_summary_json(s: StudySummary) -> dict:
    return {
        "kind": "study_summary",
        "study_id": s.study_id,
        "year": s.year,
        "acpa": s.acpa,
        "n_tests": s.n_tests,
        "max_ppv": s.max_ppv,
        "n_significant_raw": s.n_significant_raw,
        "n_significant_adjusted": s.n_significant_adjusted,
        "median_lr_adjusted": s.median_lr_adjusted,
    }


def _dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _row_sort_key(r: TestMetricsRow):
    return (r.scenario.d_threshold, r.scenario.bias_u, r.scenario.prior,
            r.study_id, r.test_id)


def _summary_sort_key(s: ScenarioSummary):
    return (s.scenario.d_threshold, s.scenario.bias_u, s.scenario.prior)


def export_results(
    rows: list[TestMetricsRow],
    summaries: list[ScenarioSummary],
    heatmap: HeatmapResult | None,
    fmt: ExportFormat,
    metadata: dict | None = None,
    association: AssociationResult | None = None,
) -> bytes:
    """Serialize results deterministically; see the module docstring."""
    if metadata is None:
        metadata = build_metadata(AnalysisConfig())
    rows = sorted(rows, key=_row_sort_key)
    summaries = sorted(summaries, key=_summary_sort_key)
    if fmt is ExportFormat.JSONL:
        lines = [_dumps(metadata)]
        lines.extend(_dumps(row_json(r)) for r in rows)
        lines.extend(_dumps(summary_json(s)) for s in summaries)
        if heatmap is not None:
            lines.append(_dumps(heatmap_json(heatmap)))
        if association is not None:
            lines.append(_dumps(association_json(association)))
        return ("\n".join(lines) + "\n").encode()

    out = io.StringIO()
    for key in sorted(metadata):
        if key in ("kind", "notes", "config"):
            continue
        out.write(f"# {key}={metadata[key]}\n")
    header = (
        "study_id,test_id,d_threshold,bias_u,prior,n_total,p_raw,p_adjusted,power,"
        "ppv_raw,fpr_raw,lr_raw,rbp_raw,ppv_adjusted,fpr_adjusted,lr_adjusted,"
        "rbp_adjusted,significant_raw,significant_adjusted"
    )
    out.write(header + "\n")
    for r in rows:
        mr, ma = r.metrics_raw, r.metrics_adjusted
        cells = [
            r.study_id, r.test_id, repr(r.scenario.d_threshold), repr(r.scenario.bias_u),
            repr(r.scenario.prior), str(r.n_total), repr(r.p_raw), repr(r.p_adjusted),
            repr(mr.power), repr(mr.ppv), repr(mr.fpr), repr(mr.lr), repr(mr.rbp),
            repr(ma.ppv), repr(ma.fpr), repr(ma.lr), repr(ma.rbp),
            str(mr.significant_raw).lower(), str(ma.significant_adjusted).lower(),
        ]
        out.write(",".join(cells) + "\n")
    return out.getvalue().encode()


# ---------------------------------------------------------------------------
# Parsing (JSON lines round trip)
# ---------------------------------------------------------------------------

def _scenario_from_json(obj: dict) -> Scenario:
    return make_scenario(obj["d_threshold"], obj["bias_u"], obj["prior"])


def _metrics_from_json(obj: dict) -> EvidenceMetrics:
    return EvidenceMetrics(
        power=obj["power"], ppv=obj["ppv"], fpr=obj["fpr"], lr=obj["lr"],
        rbp=obj["rbp"], significant_raw=obj["significant_raw"],
        significant_adjusted=obj["significant_adjusted"],
    )


def parse_results(data: bytes) -> ResultsBundle:
    """Reconstruct a ResultsBundle from a JSON-lines export."""
    metadata: dict | None = None
    rows: list[TestMetricsRow] = []
    summaries: list[ScenarioSummary] = []
    heatmap: HeatmapResult | None = None
    association: AssociationResult | None = None
    for line_no, line in enumerate(data.decode().splitlines(), start=1):
        if not line.strip():
            continue
        obj = json.loads(line)
        kind = obj.get("kind")
        if kind == "metadata":
            if obj.get("schema_version") != SCHEMA_VERSION:
                raise SchemaError(
                    f"line {line_no}: schema_version {obj.get('schema_version')} "
                    f"!= supported {SCHEMA_VERSION}"
                )
            metadata = obj
        elif kind == "row":
            rows.append(TestMetricsRow(
                study_id=obj["study_id"], test_id=obj["test_id"],
                scenario=_scenario_from_json(obj["scenario"]),
                n_total=obj["n_total"], p_raw=obj["p_raw"], p_adjusted=obj["p_adjusted"],
                metrics_raw=_metrics_from_json(obj["metrics_raw"]),
                metrics_adjusted=_metrics_from_json(obj["metrics_adjusted"]),
            ))
        elif kind == "summary":
            summaries.append(ScenarioSummary(
                scenario=_scenario_from_json(obj["scenario"]),
                n_tests=obj["n_tests"],
                n_significant_raw=obj["n_significant_raw"],
                n_significant_adjusted=obj["n_significant_adjusted"],
                median_lr_raw=obj["median_lr_raw"],
                median_lr_adjusted=obj["median_lr_adjusted"],
                expected_true_adjusted=obj["expected_true_adjusted"],
                expected_false_adjusted=obj["expected_false_adjusted"],
                fraction_true_adjusted=obj["fraction_true_adjusted"],
                fraction_rbp_ge_half_raw=obj["fraction_rbp_ge_half_raw"],
                fraction_rbp_ge_half_adjusted=obj["fraction_rbp_ge_half_adjusted"],
            ))
        elif kind == "heatmap":
            heatmap = HeatmapResult(
                study_ids=tuple(obj["study_ids"]),
                scenario_keys=tuple(obj["scenario_keys"]),
                values=tuple(tuple(row) for row in obj["values"]),
                fraction_ge_half=tuple(obj["fraction_ge_half"]),
            )
        elif kind == "association":
            association = AssociationResult(
                rho=obj["rho"], p_perm=obj["p_perm"],
                n_studies=obj["n_studies"], n_reports=obj["n_reports"],
            )
        else:
            raise SchemaError(f"line {line_no}: unknown record kind {kind!r}")
    if metadata is None:
        raise SchemaError("export has no metadata record")
    return ResultsBundle(metadata=metadata, rows=rows, summaries=summaries,
                         heatmap=heatmap, association=association)


# ---------------------------------------------------------------------------
# Scatter smoothing
# ---------------------------------------------------------------------------

def smooth_series(points: list[SeriesPoint], span: float = 0.75) -> list[SeriesPoint]:
    """Local-linear tricube smoother evaluated at each input x, per group.

    For each point, the window is the span-fraction of nearest neighbors
    (by |x - x0|); a weighted degree-1 fit supplies the smoothed value.
    Exactly reproduces linear and constant inputs.
    """
    if not 0.0 < span <= 1.0:
        raise SchemaError(f"span must lie in (0, 1], got {span}")
    groups: dict[str, list[SeriesPoint]] = {}
    for p in points:
        if not (math.isfinite(p.x) and math.isfinite(p.y)):
            raise SchemaError(f"non-finite point ({p.x}, {p.y}) in group {p.group!r}")
        groups.setdefault(p.group, []).append(p)
    out: list[SeriesPoint] = []
    for group, pts in groups.items():
        xs = [p.x for p in pts]
        if len(set(xs)) < 2:
            raise InsufficientDataError(
                f"group {group!r} needs >= 2 distinct x values to smooth"
            )
        ys = [p.y for p in pts]
        window = max(2, math.ceil(span * len(pts)))
        for p in pts:
            out.append(SeriesPoint(x=p.x, y=_local_linear(xs, ys, p.x, window), group=group))
    return out


def _tricube(z: float) -> float:
    if z >= 1.0:
        return 0.0
    c = 1.0 - z * z * z
    return c * c * c


def _local_linear(xs: list[float], ys: list[float], x0: float, window: int) -> float:
    dists = sorted(abs(x - x0) for x in xs)
    h = dists[min(window, len(xs)) - 1]
    if h == 0.0:
        # Every windowed point coincides with x0; widen to the nearest distinct x.
        positive = [d for d in dists if d > 0.0]
        h = positive[0] if positive else 1.0
    # Weighted least squares for y ~ a + b (x - x0); the intercept is the fit.
    sw = swx = swxx = swy = swxy = 0.0
    for x, y in zip(xs, ys):
        w = _tricube(abs(x - x0) / h)
        if w <= 0.0:
            continue
        dx = x - x0
        sw += w
        swx += w * dx
        swxx += w * dx * dx
        swy += w * y
        swxy += w * dx * y
    det = sw * swxx - swx * swx
    if det <= 1e-300 * max(1.0, sw * swxx):
        return swy / sw if sw > 0 else 0.0
    return (swxx * swy - swx * swxy) / det
