"""Stateless HTTP JSON facade over an analyzed dataset.

All state is computed once at startup and never mutated, so request
handling is trivially concurrent. `/api/whatif` is a pure function of the
request body and works with or without a loaded dataset; the dataset routes
answer 503 with a `no_dataset` marker when the server was started without
an input table.

Routes (all JSON, schema-versioned):
    GET  /api/scenarios            grid definition and effective config
    GET  /api/summary              per-scenario aggregate summaries
    GET  /api/studies              per-study summaries
    GET  /api/studies/{id}/tests   per-test metric rows (optional d/bias/prior filter)
    POST /api/whatif               hypothetical single-test appraisal
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .dataset import AnalysisConfig, Dataset, TestFamily
from .effects import PowerQuery, power_at_threshold
from .errors import InsufficientDataError
from .export import (
    SCHEMA_VERSION,
    build_metadata,
    row_json,
    study_summary_json,
    summary_json,
)
from .metrics import EvidenceInputs, lr_plt, ppv_biased, rbp
from .pipeline import (
    build_study_summaries,
    run_grid,
    scenarios_from_config,
    summarize,
)

__all__ = ["create_app", "WhatIfBody"]


class WhatIfBody(BaseModel):
    """Hypothetical single test: observed p plus scenario assumptions."""

    p_obs: float = Field(gt=0, le=1)
    n_total: int = Field(ge=1)
    family: TestFamily = TestFamily.Z_TEST
    d_threshold: float = Field(default=0.5, gt=0)
    bias_u: float = Field(default=0.0, ge=0, le=1)
    prior: float = Field(default=0.5, gt=0, lt=1)
    fpr_target: float = Field(default=0.05, gt=0, lt=1)
    mcc_m: int | None = Field(default=None, ge=1)


def create_app(dataset: Dataset | None = None, cfg: AnalysisConfig | None = None) -> FastAPI:
    cfg = cfg or AnalysisConfig()
    app = FastAPI(title="evidencelab", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    scenarios = scenarios_from_config(cfg)
    if dataset is not None:
        rows = run_grid(dataset, cfg)
        summaries = [
            summarize([r for r in rows if r.scenario.key == sc.key], sc, cfg)
            for sc in scenarios
        ]
        study_summaries = build_study_summaries(dataset, rows)
        rows_by_study: dict[str, list] = {}
        for r in rows:
            rows_by_study.setdefault(r.study_id, []).append(r)
    else:
        summaries = []
        study_summaries = []
        rows_by_study = {}

    metadata = build_metadata(cfg)

    def require_dataset() -> None:
        if dataset is None:
            raise HTTPException(
                status_code=503,
                detail={"status": "no_dataset",
                        "hint": "start the server with --input to load a table"},
            )

    @app.get("/api/scenarios")
    def get_scenarios() -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "config": cfg.as_dict(),
            "scenarios": [
                {"key": sc.key, "label": sc.label, "d_threshold": sc.d_threshold,
                 "bias_u": sc.bias_u, "prior": sc.prior}
                for sc in scenarios
            ],
        }

    @app.get("/api/summary")
    def get_summary() -> dict:
        require_dataset()
        return {
            "schema_version": SCHEMA_VERSION,
            "metadata": metadata,
            "summaries": [summary_json(s) for s in summaries],
        }

    @app.get("/api/studies")
    def get_studies() -> dict:
        require_dataset()
        return {
            "schema_version": SCHEMA_VERSION,
            "studies": [study_summary_json(s) for s in study_summaries],
        }

    @app.get("/api/studies/{study_id}/tests")
    def get_study_tests(
        study_id: str,
        d: float | None = Query(default=None),
        bias: float | None = Query(default=None),
        prior: float | None = Query(default=None),
    ) -> dict:
        require_dataset()
        if study_id not in rows_by_study:
            raise HTTPException(status_code=404, detail=f"unknown study id {study_id!r}")
        selected = [
            r for r in rows_by_study[study_id]
            if (d is None or r.scenario.d_threshold == d)
            and (bias is None or r.scenario.bias_u == bias)
            and (prior is None or r.scenario.prior == prior)
        ]
        return {
            "schema_version": SCHEMA_VERSION,
            "study_id": study_id,
            "tests": [row_json(r) for r in selected],
        }

    @app.post("/api/whatif")
    def whatif(body: WhatIfBody) -> dict:
        p_effective = min(1.0, body.mcc_m * body.p_obs) if body.mcc_m else body.p_obs
        try:
            power = power_at_threshold(PowerQuery(
                family=body.family,
                n_total=body.n_total,
                d_threshold=body.d_threshold,
                alpha=cfg.alpha,
                two_sided=cfg.two_sided,
            ))
        except InsufficientDataError as exc:
            raise HTTPException(
                status_code=422,
                detail=[{"loc": ["body", "n_total"], "msg": str(exc), "type": "value_error"}],
            ) from None
        inputs = EvidenceInputs(
            p_obs=p_effective, power=power, prior=body.prior, bias_u=body.bias_u
        )
        ppv = ppv_biased(inputs)
        return {
            "schema_version": SCHEMA_VERSION,
            "request": body.model_dump(mode="json"),
            "power": power,
            "p_effective": p_effective,
            "ppv": ppv,
            "fpr": 1.0 - ppv,
            "lr": lr_plt(inputs),
            "rbp": rbp(inputs, body.fpr_target),
            "notes": {
                "alpha": cfg.alpha,
                "two_sided": cfg.two_sided,
                # A lone hypothetical p has no sibling p-values, so the family
                # correction is Bonferroni-style: m * p capped at 1.
                "mcc": f"bonferroni (m={body.mcc_m})" if body.mcc_m else "none",
            },
        }

    return app
