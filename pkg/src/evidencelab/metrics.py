"""Posterior evidence metrics: PPV/FPR under bias, likelihood ratio, RBP.

Notation for a single test: p = P[D|H0] (the observed, possibly
MCC-adjusted p-value), power = P[D|H1] at the assumed effect threshold,
prior = P[H1] with odds R = prior / (1 - prior), and u the Ioannidis bias
proportion (the share of would-be non-findings reported as findings).

The bias-adjusted PPV follows Ioannidis (2005):

    PPV_u = ((1 - beta) R + u beta R)
            / (R + p - beta R + u - u p + u beta R),   beta = 1 - power

Note the `- beta R` term: the denominator must subtract the *miss* mass,
not `- power R`; dropping the (1 - power) factor there produces values
above 1. At u = 0 this reduces to the plain PPV, at u = 1 to the prior.

The likelihood ratio uses the p-less-than reading (power / p), and the
reverse-Bayesian prior (Matthews 2001) is the prior that would push the
posterior false positive risk down to a chosen target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError

__all__ = [
    "EvidenceInputs",
    "EvidenceMetrics",
    "ExpectedPositives",
    "ppv_basic",
    "ppv_biased",
    "fpr_biased",
    "lr_plt",
    "rbp",
    "evaluate",
    "expected_true_positives",
]


@dataclass(frozen=True)
class EvidenceInputs:
    """Inputs for one metric evaluation; prior odds derive from the prior."""

    p_obs: float
    power: float
    prior: float
    bias_u: float = 0.0
    prior_odds: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.p_obs <= 1.0:
            raise ParameterError(f"p_obs must lie in (0, 1], got {self.p_obs}")
        if not 0.0 < self.power < 1.0:
            raise ParameterError(f"power must lie in (0, 1), got {self.power}")
        if not 0.0 < self.prior < 1.0:
            raise ParameterError(f"prior must lie in (0, 1), got {self.prior}")
        if not 0.0 <= self.bias_u <= 1.0:
            raise ParameterError(f"bias_u must lie in [0, 1], got {self.bias_u}")
        derived = self.prior / (1.0 - self.prior)
        if self.prior_odds is None:
            object.__setattr__(self, "prior_odds", derived)
        elif abs(self.prior_odds - derived) > 1e-12 * max(1.0, derived):
            raise ParameterError(
                f"prior_odds {self.prior_odds} inconsistent with prior {self.prior}"
            )


@dataclass(frozen=True)
class EvidenceMetrics:
    """Per-test, per-scenario outputs."""

    power: float
    ppv: float
    fpr: float
    lr: float
    rbp: float
    significant_raw: bool
    significant_adjusted: bool


@dataclass(frozen=True)
class ExpectedPositives:
    """Expected composition of a set of positive reports."""

    expected_true: float
    expected_false: float
    fraction_true: float | None
    count: int


def ppv_basic(inputs: EvidenceInputs) -> float:
    """Positive predictive value without bias: P[H1 | D]."""
    num = inputs.prior * inputs.power
    return num / (num + (1.0 - inputs.prior) * inputs.p_obs)


def ppv_biased(inputs: EvidenceInputs) -> float:
    """Positive predictive value under reporting bias u (Ioannidis form)."""
    r = inputs.prior_odds
    u = inputs.bias_u
    beta = 1.0 - inputs.power
    p = inputs.p_obs
    num = inputs.power * r + u * beta * r
    den = r + p - beta * r + u - u * p + u * beta * r
    return num / den


def fpr_biased(inputs: EvidenceInputs) -> float:
    """False positive risk: complement of the bias-adjusted PPV."""
    return 1.0 - ppv_biased(inputs)


def lr_plt(inputs: EvidenceInputs) -> float:
    """Likelihood ratio in the p-less-than interpretation: power / p."""
    if inputs.p_obs <= 0.0:
        raise ParameterError("p_obs must be positive for a likelihood ratio")
    return inputs.power / inputs.p_obs


def rbp(inputs: EvidenceInputs, fpr_target: float) -> float:
    """Prior required to reach a fixed posterior false positive risk."""
    if not 0.0 < fpr_target < 1.0:
        raise ParameterError(f"fpr_target must lie in (0, 1), got {fpr_target}")
    num = inputs.p_obs * (1.0 - fpr_target)
    return num / (num + inputs.power * fpr_target)


def evaluate(
    inputs: EvidenceInputs,
    fpr_target: float,
    significant_raw: bool,
    significant_adjusted: bool,
) -> EvidenceMetrics:
    """Bundle all metrics for one (test, scenario) evaluation."""
    ppv = ppv_biased(inputs)
    return EvidenceMetrics(
        power=inputs.power,
        ppv=ppv,
        fpr=1.0 - ppv,
        lr=lr_plt(inputs),
        rbp=rbp(inputs, fpr_target),
        significant_raw=significant_raw,
        significant_adjusted=significant_adjusted,
    )


def expected_true_positives(metrics: list[EvidenceMetrics]) -> ExpectedPositives:
    """Expected true/false split of a set of positive reports.

    The caller restricts `metrics` to the significant set of interest
    (typically significant after adjustment). Empty input yields zero
    counts and an undefined fraction.
    """
    count = len(metrics)
    if count == 0:
        return ExpectedPositives(0.0, 0.0, None, 0)
    expected_true = math.fsum(m.ppv for m in metrics)
    return ExpectedPositives(
        expected_true=expected_true,
        expected_false=count - expected_true,
        fraction_true=expected_true / count,
        count=count,
    )
