"""Conversions between test statistics, p-values, and Cohen's d, plus power.

All conversions follow the standard Cohen equivalences between d, r, and w:

    independent t:  d = 2 t / sqrt(df)          ncp = d sqrt(n1 n2 / n)
    paired t:       d = t / sqrt(df)            ncp = d sqrt(n)
    chi-square(1):  w = sqrt(chi2 / n)          lambda = n w^2,  w = d / sqrt(d^2 + 4)
    correlation:    d = 2 r / sqrt(1 - r^2)     Fisher z with se = 1 / sqrt(n - 3)
    one-way F:      f = d / 2                   lambda = n f^2, df1 = k - 1, df2 = n - k
    Z:              d = z sqrt(1/n1 + 1/n2)     normal kernel

A single d-denominated threshold grid therefore maps onto every family; the
one-way F map with k > 2 groups is an approximation (it treats d as twice
Cohen's f regardless of k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .dataset import CodedTest, TestFamily
from .distributions import DistKind, DistSpec, cdf, quantile
from .errors import DegenerateEffectError, InsufficientDataError, ParameterError

__all__ = ["PowerQuery", "recompute_p", "standardize_effect", "power_at_threshold"]

# Power is reported strictly inside (0, 1); saturated values are nudged off
# the boundary so posterior formulas stay well defined.
_POWER_EPS = 1e-12


@dataclass(frozen=True)
class PowerQuery:
    """Inputs for one power evaluation at an assumed effect threshold."""

    family: TestFamily
    n_total: int
    d_threshold: float
    alpha: float
    two_sided: bool = True
    n1: int | None = None
    n2: int | None = None
    df1: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.d_threshold <= 0:
            raise ParameterError(f"d_threshold must be positive, got {self.d_threshold}")
        if self.n_total <= 0:
            raise ParameterError(f"n_total must be positive, got {self.n_total}")


def _split_groups(n_total: int, n1: int | None, n2: int | None) -> tuple[int, int]:
    """Resolve group sizes; absent sizes default to an equal split."""
    if n1 is not None and n2 is not None:
        return n1, n2
    if n1 is not None:
        return n1, n_total - n1
    if n2 is not None:
        return n_total - n2, n2
    return n_total // 2, n_total - n_total // 2


def _two_sided_p(tail_lower: float) -> float:
    return 2.0 * min(tail_lower, 1.0 - tail_lower)


def _clamp_p(p: float) -> float:
    return min(max(p, 1e-300), 1.0)


def recompute_p(t: CodedTest, two_sided: bool = True) -> float:
    """Recompute the p-value from the coded statistic and its parameters.

    Symmetric families (t, r, Z) are two-tailed when requested; chi-square
    and F are inherently one-tailed upper.
    """
    if t.statistic is None:
        raise InsufficientDataError(f"{t.study_id}/{t.test_id}: no statistic coded")
    stat = t.statistic
    fam = t.family
    if fam in (TestFamily.INDEPENDENT_T, TestFamily.PAIRED_T):
        if t.df1 is None:
            raise InsufficientDataError(f"{t.study_id}/{t.test_id}: t-test without df")
        lower = cdf(DistSpec(DistKind.STUDENT_T, df1=float(t.df1)), stat)
        p = _two_sided_p(lower) if two_sided else 1.0 - lower
    elif fam is TestFamily.Z_TEST:
        lower = cdf(DistSpec(DistKind.NORMAL), stat)
        p = _two_sided_p(lower) if two_sided else 1.0 - lower
    elif fam is TestFamily.CORRELATION_R:
        df = t.df1 if t.df1 is not None else t.n_total - 2
        if df < 1:
            raise InsufficientDataError(f"{t.study_id}/{t.test_id}: correlation needs n > 3")
        if abs(stat) >= 1.0:
            raise DegenerateEffectError(f"{t.study_id}/{t.test_id}: |r| >= 1")
        t_stat = stat * math.sqrt(df / (1.0 - stat * stat))
        lower = cdf(DistSpec(DistKind.STUDENT_T, df1=float(df)), t_stat)
        p = _two_sided_p(lower) if two_sided else 1.0 - lower
    elif fam is TestFamily.CHI_SQUARE_1:
        if t.df1 != 1:
            raise InsufficientDataError(f"{t.study_id}/{t.test_id}: chi-square needs df1 = 1")
        p = 1.0 - cdf(DistSpec(DistKind.CHI_SQUARE, df1=1.0), stat)
    elif fam is TestFamily.ONE_WAY_F:
        if t.df1 is None:
            raise InsufficientDataError(f"{t.study_id}/{t.test_id}: F-test without df1")
        df2 = t.df2 if t.df2 is not None else t.n_total - (t.df1 + 1)
        if df2 < 1:
            raise InsufficientDataError(f"{t.study_id}/{t.test_id}: F-test without usable df2")
        p = 1.0 - cdf(DistSpec(DistKind.FISHER_F, df1=float(t.df1), df2=float(df2)), stat)
    else:  # pragma: no cover - exhaustive enum
        raise ParameterError(f"unsupported family {fam}")
    return _clamp_p(p)


def standardize_effect(t: CodedTest) -> float:
    """Convert the coded statistic to Cohen's d units."""
    if t.statistic is None:
        raise InsufficientDataError(f"{t.study_id}/{t.test_id}: no statistic coded")
    stat = t.statistic
    fam = t.family
    if fam is TestFamily.INDEPENDENT_T:
        if t.df1 is None:
            raise InsufficientDataError(f"{t.study_id}/{t.test_id}: t-test without df")
        return 2.0 * stat / math.sqrt(t.df1)
    if fam is TestFamily.PAIRED_T:
        if t.df1 is None:
            raise InsufficientDataError(f"{t.study_id}/{t.test_id}: t-test without df")
        return stat / math.sqrt(t.df1)
    if fam is TestFamily.CORRELATION_R:
        if abs(stat) >= 1.0:
            raise DegenerateEffectError(f"{t.study_id}/{t.test_id}: |r| >= 1")
        return 2.0 * stat / math.sqrt(1.0 - stat * stat)
    if fam is TestFamily.CHI_SQUARE_1:
        w2 = stat / t.n_total
        if w2 >= 1.0:
            raise DegenerateEffectError(f"{t.study_id}/{t.test_id}: w >= 1")
        w = math.sqrt(max(w2, 0.0))
        return 2.0 * w / math.sqrt(1.0 - w * w)
    if fam is TestFamily.ONE_WAY_F:
        if t.df1 is None:
            raise InsufficientDataError(f"{t.study_id}/{t.test_id}: F-test without df1")
        df2 = t.df2 if t.df2 is not None else t.n_total - (t.df1 + 1)
        if df2 < 1:
            raise InsufficientDataError(f"{t.study_id}/{t.test_id}: F-test without usable df2")
        # f^2 estimated as df1 * F / df2; reduces to the t conversion at k = 2.
        return 2.0 * math.sqrt(max(t.df1 * stat, 0.0) / df2)
    n1, n2 = _split_groups(t.n_total, t.n1, t.n2)
    if n1 <= 0 or n2 <= 0:
        raise InsufficientDataError(f"{t.study_id}/{t.test_id}: bad group sizes")
    return stat * math.sqrt(1.0 / n1 + 1.0 / n2)


@lru_cache(maxsize=4096)
def _crit_upper(kind: DistKind, df1: float | None, df2: float | None, prob: float) -> float:
    return quantile(DistSpec(kind, df1=df1, df2=df2), prob)


def power_at_threshold(q: PowerQuery) -> float:
    """P[reject H0 at level alpha | population effect = d_threshold]."""
    d = q.d_threshold
    alpha = q.alpha
    n = q.n_total
    fam = q.family
    tail = alpha / 2.0 if q.two_sided else alpha

    if fam is TestFamily.INDEPENDENT_T:
        n1, n2 = _split_groups(n, q.n1, q.n2)
        if n1 < 1 or n2 < 1 or n1 + n2 - 2 < 1:
            raise InsufficientDataError(f"n_total={n} too small for a two-group t-test")
        df = n1 + n2 - 2
        ncp = d * math.sqrt(n1 * n2 / (n1 + n2))
        crit = _crit_upper(DistKind.STUDENT_T, float(df), None, 1.0 - tail)
        spec = DistSpec(DistKind.STUDENT_T, df1=float(df), ncp=ncp)
        power = 1.0 - cdf(spec, crit)
        if q.two_sided:
            power += cdf(spec, -crit)
    elif fam is TestFamily.PAIRED_T:
        if n < 2:
            raise InsufficientDataError(f"n_total={n} too small for a paired t-test")
        df = n - 1
        ncp = d * math.sqrt(n)
        crit = _crit_upper(DistKind.STUDENT_T, float(df), None, 1.0 - tail)
        spec = DistSpec(DistKind.STUDENT_T, df1=float(df), ncp=ncp)
        power = 1.0 - cdf(spec, crit)
        if q.two_sided:
            power += cdf(spec, -crit)
    elif fam is TestFamily.CHI_SQUARE_1:
        w = d / math.sqrt(d * d + 4.0)
        lam = n * w * w
        crit = _crit_upper(DistKind.CHI_SQUARE, 1.0, None, 1.0 - alpha)
        power = 1.0 - cdf(DistSpec(DistKind.CHI_SQUARE, df1=1.0, ncp=lam), crit)
    elif fam is TestFamily.ONE_WAY_F:
        k = (q.df1 + 1) if q.df1 is not None else 2
        if n - k < 1:
            raise InsufficientDataError(f"n_total={n} too small for F with {k} groups")
        lam = n * (d / 2.0) ** 2
        crit = _crit_upper(DistKind.FISHER_F, float(k - 1), float(n - k), 1.0 - alpha)
        power = 1.0 - cdf(DistSpec(DistKind.FISHER_F, df1=float(k - 1), df2=float(n - k), ncp=lam), crit)
    elif fam is TestFamily.CORRELATION_R:
        if n <= 3:
            raise InsufficientDataError(f"n_total={n} too small for a correlation test")
        r = d / math.sqrt(d * d + 4.0)
        mu = math.atanh(r) * math.sqrt(n - 3.0)
        crit = _crit_upper(DistKind.NORMAL, None, None, 1.0 - tail)
        power = 1.0 - cdf(DistSpec(DistKind.NORMAL, ncp=mu), crit)
        if q.two_sided:
            power += cdf(DistSpec(DistKind.NORMAL, ncp=mu), -crit)
    elif fam is TestFamily.Z_TEST:
        n1, n2 = _split_groups(n, q.n1, q.n2)
        if n1 < 1 or n2 < 1:
            raise InsufficientDataError(f"n_total={n} too small for a two-group Z-test")
        ncp = d * math.sqrt(n1 * n2 / (n1 + n2))
        crit = _crit_upper(DistKind.NORMAL, None, None, 1.0 - tail)
        power = 1.0 - cdf(DistSpec(DistKind.NORMAL, ncp=ncp), crit)
        if q.two_sided:
            power += cdf(DistSpec(DistKind.NORMAL, ncp=ncp), -crit)
    else:  # pragma: no cover - exhaustive enum
        raise ParameterError(f"unsupported family {fam}")
    return min(max(power, _POWER_EPS), 1.0 - _POWER_EPS)
