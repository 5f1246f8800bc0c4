"""evidencelab: strength-of-evidence analysis for coded statistical tests.

Given a table of published test statistics (t, chi-square, r, one-way F, Z)
the package computes statistical power at configurable effect thresholds,
positive predictive value and false positive risk under reporting bias,
likelihood ratios, and reverse-Bayesian priors, across a scenario grid of
(effect threshold, bias, prior) assumptions. Results can be exported to
stable CSV/JSON-lines files or served over an HTTP what-if API.
"""

from .dataset import (
    AnalysisConfig,
    CodedTest,
    Dataset,
    MccMethod,
    StudyRecord,
    TestFamily,
    generate_synthetic,
    parse_dataset,
    parse_dataset_with_report,
    serialize_dataset,
    validate_record,
)
from .distributions import DistKind, DistSpec, cdf, mc_cdf_oracle, quantile
from .effects import PowerQuery, power_at_threshold, recompute_p, standardize_effect
from .errors import (
    DegenerateEffectError,
    EvidenceLabError,
    InsufficientDataError,
    NumericsError,
    ParameterError,
    SchemaError,
)
from .export import ExportFormat, SeriesPoint, export_results, parse_results, smooth_series
from .mcc import adjust_family
from .metrics import (
    EvidenceInputs,
    EvidenceMetrics,
    expected_true_positives,
    lr_plt,
    ppv_basic,
    ppv_biased,
    rbp,
)
from .pipeline import (
    AssociationResult,
    HeatmapResult,
    Scenario,
    ScenarioSummary,
    StudySummary,
    TestMetricsRow,
    build_study_summaries,
    citation_association,
    heatmap_max_ppv,
    make_scenario,
    run_grid,
    run_scenario,
    scenarios_from_config,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig", "CodedTest", "Dataset", "MccMethod", "StudyRecord",
    "TestFamily", "generate_synthetic", "parse_dataset", "parse_dataset_with_report",
    "serialize_dataset", "validate_record",
    "DistKind", "DistSpec", "cdf", "mc_cdf_oracle", "quantile",
    "PowerQuery", "power_at_threshold", "recompute_p", "standardize_effect",
    "DegenerateEffectError", "EvidenceLabError", "InsufficientDataError",
    "NumericsError", "ParameterError", "SchemaError",
    "ExportFormat", "SeriesPoint", "export_results", "parse_results", "smooth_series",
    "adjust_family",
    "EvidenceInputs", "EvidenceMetrics", "expected_true_positives",
    "lr_plt", "ppv_basic", "ppv_biased", "rbp",
    "AssociationResult", "HeatmapResult", "Scenario", "ScenarioSummary",
    "StudySummary", "TestMetricsRow", "build_study_summaries",
    "citation_association", "heatmap_max_ppv", "make_scenario", "run_grid",
    "run_scenario", "scenarios_from_config", "summarize",
    "__version__",
]
