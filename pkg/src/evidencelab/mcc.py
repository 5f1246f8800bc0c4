"""Family-wise multiple-comparison correction of p-values.

The correction family is the set of coded tests within one study. Holm's
step-down procedure is the default (uniformly at least as powerful as
Bonferroni while still controlling the family-wise error rate exactly);
Bonferroni is available for sensitivity analysis.
"""

from __future__ import annotations

from .dataset import MccMethod
from .errors import ParameterError

__all__ = ["adjust_family", "MccMethod"]


def adjust_family(ps: list[float], method: MccMethod) -> list[float]:
    """Adjusted p-values, aligned with the input order and capped at 1.

    Bonferroni multiplies by the family size m; Holm sorts ascending,
    multiplies the i-th smallest by (m - i), and enforces monotonicity with
    a running maximum. Adjusted values never fall below the raw ones.
    """
    for p in ps:
        if not 0.0 < p <= 1.0:
            raise ParameterError(f"p-values must lie in (0, 1], got {p}")
    m = len(ps)
    if m == 0:
        return []
    if method is MccMethod.NONE:
        return list(ps)
    if method is MccMethod.BONFERRONI:
        return [min(1.0, m * p) for p in ps]
    if method is MccMethod.HOLM:
        order = sorted(range(m), key=lambda i: ps[i])
        adjusted = [0.0] * m
        running = 0.0
        for rank, idx in enumerate(order):
            running = max(running, (m - rank) * ps[idx])
            adjusted[idx] = min(1.0, running)
        return adjusted
    raise ParameterError(f"unsupported MCC method {method}")  # pragma: no cover
