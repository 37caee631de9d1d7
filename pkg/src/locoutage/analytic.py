"""All-anchor outage probability and the random-walk distance CDF behind it.

With N equal-intensity anchors at i.i.d. uniform bearings the SPEB equals
2N P0 / (N^2 - K^2), where K is the distance of an N-step planar random walk
with unit steps.  The SPEB exceeds a threshold e * P0 exactly when
K > U = sqrt(N^2 - 2N/e), so the outage probability is 1 - P{K <= U}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from locoutage.errors import DomainError
from locoutage.specfun import DEFAULT_SPEC, QuadratureSpec, integrate_bessel_tail

__all__ = ["AllAnchorQuery", "allanchor_lop", "randomwalk_distance_cdf", "walk_threshold"]


@dataclass(frozen=True)
class AllAnchorQuery:
    """Number of anchors and the SPEB threshold in units of P0."""

    n_anchors: int
    threshold_ratio: float

    def __post_init__(self):
        if int(self.n_anchors) != self.n_anchors or self.n_anchors < 1:
            raise DomainError("n_anchors must be an integer >= 1")
        if not (self.threshold_ratio > 0 and math.isfinite(self.threshold_ratio)):
            raise DomainError("threshold_ratio must be positive and finite")


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def walk_threshold(n_anchors: int, threshold_ratio: float) -> float:
    """U^2 = N^2 - 2N / e; nonpositive means the threshold is below 2 P0 / N."""
    return n_anchors * n_anchors - 2.0 * n_anchors / threshold_ratio


def randomwalk_distance_cdf(N: int, u: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """P{K <= u} for the distance K of an N-step unit random walk with uniform headings."""
    if int(N) != N or N < 1:
        raise DomainError("N must be an integer >= 1")
    if not u >= 0:
        raise DomainError("u must be nonnegative")
    if u == 0:
        return 0.0
    if u >= N:
        return 1.0
    if N == 1:
        # K == 1 surely; the Bessel integral would return the jump midpoint at u == 1
        return 1.0 if u >= 1 else 0.0
    return _clamp01(u * integrate_bessel_tail(u, N, spec))


def allanchor_lop(q: AllAnchorQuery, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Outage probability when all N anchors are used, 1 - P{K <= U}."""
    N = int(q.n_anchors)
    if N == 1:
        return 1.0
    u2 = walk_threshold(N, q.threshold_ratio)
    if u2 <= 0:
        return 1.0
    return _clamp01(1.0 - randomwalk_distance_cdf(N, math.sqrt(u2), spec))
