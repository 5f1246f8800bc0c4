"""Command-line entry point: validate / analyze / grid / report / serve.

Configuration precedence is built-in defaults < --config file (JSON with
AnalysisConfig field names) < individual flags; the effective configuration
is echoed into every export's metadata so runs can be reproduced.

Exit codes: 0 success, 1 data or runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .dataset import AnalysisConfig, Dataset, MccMethod, parse_dataset_with_report
from .errors import EvidenceLabError, InsufficientDataError, ParameterError
from .export import (
    ExportFormat,
    SeriesPoint,
    build_metadata,
    export_results,
    series_json,
    smooth_series,
    study_summary_json,
)
from .pipeline import (
    build_study_summaries,
    citation_association,
    heatmap_max_ppv,
    make_scenario,
    run_grid,
    run_scenario,
    scenarios_from_config,
    summarize,
)

logger = logging.getLogger(__name__)

_CONFIG_KEYS = {
    "alpha", "thresholds", "biases", "priors", "mcc_method",
    "fpr_target", "smooth_span", "two_sided",
}


def _float_list(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value list: {text!r}") from None
    if not values or len(values) != len(text.split(",")):
        raise argparse.ArgumentTypeError(f"bad value list: {text!r}")
    return values


def _bool_flag(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _add_config_flags(p: argparse.ArgumentParser, grid: bool) -> None:
    p.add_argument("--config", type=Path, help="JSON config file (AnalysisConfig keys)")
    p.add_argument("--alpha", type=float, help="significance level (default 0.05)")
    p.add_argument("--mcc", choices=[m.value for m in MccMethod],
                   help="multiple-comparison correction (default holm)")
    p.add_argument("--fpr-target", type=float, dest="fpr_target",
                   help="target false positive risk for the reverse prior (default 0.05)")
    p.add_argument("--two-sided", type=_bool_flag, dest="two_sided", metavar="{true|false}",
                   help="two-sided tests for symmetric families (default true)")
    if grid:
        p.add_argument("--d", type=_float_list, metavar="LIST",
                       help="comma-separated effect-size thresholds (default 0.2,0.5,0.8)")
        p.add_argument("--bias", type=_float_list, metavar="LIST",
                       help="comma-separated bias proportions (default 0.0,0.2,0.3,0.8)")
        p.add_argument("--prior", type=_float_list, metavar="LIST",
                       help="comma-separated priors (default 0.1,0.2,0.5)")
    else:
        p.add_argument("--d", type=float, default=0.5, help="effect-size threshold (default 0.5)")
        p.add_argument("--bias", type=float, default=0.3, help="bias proportion (default 0.3)")
        p.add_argument("--prior", type=float, default=0.2, help="prior probability (default 0.2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evidencelab",
        description="Strength-of-evidence analysis over a coded statistical-test table.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="parse the input table and report rejected rows")
    p_validate.add_argument("--input", type=Path, required=True, help="CSV table")

    p_analyze = sub.add_parser("analyze", help="run a single (d, bias, prior) scenario")
    p_analyze.add_argument("--input", type=Path, required=True)
    p_analyze.add_argument("--out", type=Path, help="output path (stdout if omitted)")
    p_analyze.add_argument("--format", choices=[f.value for f in ExportFormat],
                           default="jsonl")
    p_analyze.add_argument("--seed", type=int, default=0,
                           help="permutation seed for the citation association")
    _add_config_flags(p_analyze, grid=False)

    p_grid = sub.add_parser("grid", help="run the full scenario grid")
    p_grid.add_argument("--input", type=Path, required=True)
    p_grid.add_argument("--out", type=Path)
    p_grid.add_argument("--format", choices=[f.value for f in ExportFormat], default="jsonl")
    p_grid.add_argument("--workers", type=int, default=1, help="parallel scenario workers")
    _add_config_flags(p_grid, grid=True)

    p_report = sub.add_parser("report", help="emit scenario summaries, study summaries, and heatmap")
    p_report.add_argument("--input", type=Path, required=True)
    p_report.add_argument("--out", type=Path)
    p_report.add_argument("--seed", type=int, default=0)
    _add_config_flags(p_report, grid=True)

    p_serve = sub.add_parser("serve", help="serve the HTTP what-if API over the analyzed dataset")
    p_serve.add_argument("--input", type=Path, help="CSV table (optional; what-if works without)")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--host", default="127.0.0.1")
    _add_config_flags(p_serve, grid=True)
    return parser


def load_config(args: argparse.Namespace) -> AnalysisConfig:
    """Merge defaults, config file, and flags into an AnalysisConfig."""
    values: dict = {}
    config_path = getattr(args, "config", None)
    if config_path is not None:
        try:
            loaded = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise FileNotFoundError(f"config file not found: {config_path}") from None
        except json.JSONDecodeError as exc:
            raise ParameterError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise ParameterError("config file must hold a JSON object")
        unknown = set(loaded) - _CONFIG_KEYS
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)

    if getattr(args, "alpha", None) is not None:
        values["alpha"] = args.alpha
    if getattr(args, "mcc", None) is not None:
        values["mcc_method"] = args.mcc
    if getattr(args, "fpr_target", None) is not None:
        values["fpr_target"] = args.fpr_target
    if getattr(args, "two_sided", None) is not None:
        values["two_sided"] = args.two_sided
    if args.command in ("grid", "report", "serve"):
        if getattr(args, "d", None) is not None:
            values["thresholds"] = args.d
        if getattr(args, "bias", None) is not None:
            values["biases"] = args.bias
        if getattr(args, "prior", None) is not None:
            values["priors"] = args.prior
    if "mcc_method" in values and isinstance(values["mcc_method"], str):
        values["mcc_method"] = MccMethod(values["mcc_method"])
    for key in ("thresholds", "biases", "priors"):
        if key in values:
            values[key] = tuple(values[key])
    return AnalysisConfig(**values)


def _load_input(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise EvidenceLabError(f"cannot read input {path}: {exc}") from None
    return parse_dataset_with_report(text)


def _emit(data: bytes, out: Path | None, metadata: dict) -> None:
    if out is None:
        sys.stdout.buffer.write(data)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(data)
    sidecar = out.with_name("metadata.json")
    sidecar.write_text(json.dumps(metadata, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _cmd_validate(args: argparse.Namespace) -> int:
    result = _load_input(args.input)
    ds = result.dataset
    print(f"{len(ds.studies)} studies, {ds.n_tests} records retained, "
          f"{result.n_rejected} rows rejected")
    for issue in result.issues:
        ident = f"{issue.study_id}/{issue.test_id}".strip("/") or "<unidentified>"
        print(f"  row {issue.row} ({ident}): {'; '.join(issue.reasons)}")
    return 0


def _association_or_none(summaries, rows, seed: int):
    try:
        return citation_association(summaries, rows, seed=seed)
    except InsufficientDataError as exc:
        logger.info("citation association skipped: %s", exc)
        return None


def _cmd_analyze(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    sc = make_scenario(args.d, args.bias, args.prior)
    ds = _load_input(args.input).dataset
    rows = run_scenario(ds, cfg, sc)
    summaries = [summarize(rows, sc, cfg)]
    heatmap = heatmap_max_ppv(rows)
    association = _association_or_none(build_study_summaries(ds, rows), rows, args.seed)
    metadata = build_metadata(cfg, scenario=sc.key, input=str(args.input), command="analyze")
    data = export_results(rows, summaries, heatmap, ExportFormat(args.format),
                          metadata=metadata, association=association)
    _emit(data, args.out, metadata)
    return 0


def _cmd_grid(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    ds = _load_input(args.input).dataset
    rows = run_grid(ds, cfg, max_workers=max(1, args.workers))
    summaries = [
        summarize([r for r in rows if r.scenario.key == sc.key], sc, cfg)
        for sc in scenarios_from_config(cfg)
    ]
    heatmap = heatmap_max_ppv(rows)
    metadata = build_metadata(cfg, input=str(args.input), command="grid")
    data = export_results(rows, summaries, heatmap, ExportFormat(args.format),
                          metadata=metadata)
    _emit(data, args.out, metadata)
    return 0


def _fpr_series(rows, cfg: AnalysisConfig) -> list[dict]:
    """Smoothed FPR-vs-n facets, one per (bias, prior), grouped by threshold."""
    facets: list[dict] = []
    for bias_u in cfg.biases:
        for prior in cfg.priors:
            raw = [
                SeriesPoint(x=float(r.n_total), y=r.metrics_adjusted.fpr,
                            group=f"d={r.scenario.d_threshold:g}")
                for r in rows
                if r.scenario.bias_u == bias_u and r.scenario.prior == prior
            ]
            if not raw:
                continue
            try:
                smoothed = smooth_series(raw, span=cfg.smooth_span)
            except InsufficientDataError:
                smoothed = []
            facets.append(series_json("fpr_adjusted", bias_u, prior, raw, smoothed))
    return facets


def _cmd_report(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    ds = _load_input(args.input).dataset
    rows = run_grid(ds, cfg)
    scenarios = scenarios_from_config(cfg)
    summaries = [
        summarize([r for r in rows if r.scenario.key == sc.key], sc, cfg)
        for sc in scenarios
    ]
    heatmap = heatmap_max_ppv(rows)
    study_summaries = build_study_summaries(ds, rows)
    association = _association_or_none(study_summaries, rows, args.seed)
    metadata = build_metadata(cfg, input=str(args.input), command="report")
    data = export_results([], summaries, heatmap, ExportFormat.JSONL,
                          metadata=metadata, association=association)
    lines = data.decode().splitlines()
    lines.extend(
        json.dumps(study_summary_json(s), sort_keys=True, separators=(",", ":"))
        for s in study_summaries
    )
    lines.extend(
        json.dumps(facet, sort_keys=True, separators=(",", ":"))
        for facet in _fpr_series(rows, cfg)
    )
    _emit(("\n".join(lines) + "\n").encode(), args.out, metadata)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    cfg = load_config(args)
    dataset: Dataset | None = None
    if args.input is not None:
        dataset = _load_input(args.input).dataset
    app = create_app(dataset=dataset, cfg=cfg)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "analyze": _cmd_analyze,
    "grid": _cmd_grid,
    "report": _cmd_report,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except (EvidenceLabError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
