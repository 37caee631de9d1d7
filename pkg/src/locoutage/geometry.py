"""Planar geometry of pair selection: included angles and their extremes over a disk.

For a pair of anchors a, b and a disk that the line ab misses, the included
angle a-p-b over p in the disk is extremal where a circle through a and b is
tangent to the disk.  In the frame where a = (-1, 0), b = (1, 0) and the disk
lies in the upper half plane, the circle through a and b with center (0, t)
sees the chord from its upper arc under the angle atan2(1, t).  Tangency to
the disk (center (cx, cy), radius rho) gives

    A - B t = +-2 rho sqrt(1 + t^2),   A = cx^2 + cy^2 - 1 - rho^2,  B = 2 cy,

and after squaring a quadratic in t with leading coefficient 4 (cy^2 - rho^2),
which is positive exactly when the line misses the disk.  Its two roots are
the internally and externally tangent circles, so the extremes are
atan2(1, t) at the two roots with no tangent point needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from locoutage.errors import DomainError

__all__ = [
    "AngleExtremes",
    "Disk",
    "Point2",
    "angle_extremes_batch",
    "included_angle",
    "line_intersects_disk",
    "pair_indices",
    "select_pair_optimal",
    "select_pair_suboptimal",
    "subtended_angle_extremes",
    "worst_case_speb",
    "worst_case_speb_batch",
]

# leading coefficient below this (relative to the squared scale) triggers the boundary search
_ILL_CONDITIONED = 1e-12
_BOUNDARY_GRID = 1024
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Disk:
    center: Point2
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", Point2(*map(float, self.center)))
        if not self.radius > 0:
            raise DomainError("disk radius must be positive")


@dataclass(frozen=True)
class AngleExtremes:
    theta_min: float
    theta_max: float
    degenerate: bool


def _vec(p) -> np.ndarray:
    v = np.asarray(p, dtype=float)
    if v.shape != (2,) or not np.all(np.isfinite(v)):
        raise DomainError(f"expected a finite 2-D point, got {p!r}")
    return v


def included_angle(a, b, vertex) -> float:
    """Angle between a - vertex and b - vertex, in [0, pi]."""
    u = _vec(a) - _vec(vertex)
    w = _vec(b) - _vec(vertex)
    if not (np.any(u) and np.any(w)):
        raise DomainError("vertex coincides with an endpoint")
    cross = u[0] * w[1] - u[1] * w[0]
    return math.atan2(abs(cross), float(u @ w))


def line_intersects_disk(a, b, disk: Disk) -> bool:
    """True iff the infinite line through a and b meets the closed disk."""
    a, b = _vec(a), _vec(b)
    d = b - a
    length = math.hypot(*d)
    if length == 0:
        raise DomainError("a and b coincide")
    c = np.asarray(disk.center) - a
    dist = abs(d[0] * c[1] - d[1] * c[0]) / length
    return dist <= disk.radius


def _normalized(a, b, center, radius):
    """Map to the frame a=(-1,0), b=(1,0); return (cx, |cy|, rho) as arrays."""
    d = b - a
    half = 0.5 * np.hypot(d[..., 0], d[..., 1])
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        ex = d / (2.0 * half)[..., None]
        c = center - 0.5 * (a + b)
        cx = (c[..., 0] * ex[..., 0] + c[..., 1] * ex[..., 1]) / half
        cy = (c[..., 1] * ex[..., 0] - c[..., 0] * ex[..., 1]) / half
        return cx, np.abs(cy), radius / half


def _boundary_angle(a, b, center, radius, phi):
    p = np.stack([center[0] + radius * np.cos(phi), center[1] + radius * np.sin(phi)], axis=-1)
    u = a - p
    w = b - p
    cross = u[..., 0] * w[..., 1] - u[..., 1] * w[..., 0]
    dot = u[..., 0] * w[..., 0] + u[..., 1] * w[..., 1]
    return np.arctan2(np.abs(cross), dot)


def _golden(f, lo, hi, iters=80):
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
    return min(f1, f2)


def _boundary_extremes(a, b, center, radius):
    """Extremes of the included angle on the disk boundary by grid plus golden section."""
    a, b, center = (np.asarray(v, dtype=float) for v in (a, b, center))
    phi = np.linspace(0.0, 2.0 * math.pi, _BOUNDARY_GRID, endpoint=False)
    vals = _boundary_angle(a, b, center, radius, phi)
    step = phi[1] - phi[0]
    f = lambda s: float(_boundary_angle(a, b, center, radius, np.array(s)))  # noqa: E731
    i_min, i_max = int(np.argmin(vals)), int(np.argmax(vals))
    tmin = _golden(f, phi[i_min] - step, phi[i_min] + step)
    tmax = -_golden(lambda s: -f(s), phi[i_max] - step, phi[i_max] + step)
    return min(tmin, float(vals[i_min])), max(tmax, float(vals[i_max]))


def angle_extremes_batch(a, b, center, radius):
    """Vectorized min/max of the included angle a-p-b over p in a disk.

    ``a`` and ``b`` have shape (..., 2); ``center`` and ``radius`` broadcast
    against them.  Returns ``(theta_min, theta_max, degenerate)`` arrays;
    entries where the line ab meets the closed disk are flagged degenerate
    and carry NaN angles.  Anchors inside the disk are not checked here.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    center = np.broadcast_to(np.asarray(center, dtype=float), a.shape)
    radius = np.broadcast_to(np.asarray(radius, dtype=float), a.shape[:-1])
    cx, cy, rho = _normalized(a, b, center, radius)
    # coincident anchors define no line and are treated like a crossing line
    degenerate = ~(cy > rho) | ~np.isfinite(cx * cy * rho)

    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        A = cx * cx + cy * cy - 1.0 - rho * rho
        B = 2.0 * cy
        qa = B * B - 4.0 * rho * rho
        qb = -2.0 * A * B
        qc = A * A - 4.0 * rho * rho
        disc = 16.0 * rho * rho * (A * A + qa)
        q = -0.5 * (qb + np.copysign(np.sqrt(disc), qb))
        t1 = q / qa
        t2 = qc / q
        t_lo = np.minimum(t1, t2)
        t_hi = np.maximum(t1, t2)
        theta_max = np.arctan2(1.0, t_lo)
        theta_min = np.arctan2(1.0, t_hi)

    with np.errstate(over="ignore", invalid="ignore"):
        scale = 1.0 + cx * cx + cy * cy
    shaky = ~degenerate & ((qa < _ILL_CONDITIONED * scale) | ~np.isfinite(theta_min + theta_max))
    if np.any(shaky):
        theta_min = np.array(theta_min, copy=True)
        theta_max = np.array(theta_max, copy=True)
        for idx in zip(*np.nonzero(shaky)):
            lo, hi = _boundary_extremes(a[idx], b[idx], center[idx], float(radius[idx]))
            theta_min[idx], theta_max[idx] = lo, hi

    theta_min = np.where(degenerate, np.nan, theta_min)
    theta_max = np.where(degenerate, np.nan, theta_max)
    return theta_min, theta_max, degenerate


def subtended_angle_extremes(a, b, ur: Disk) -> AngleExtremes:
    """Min and max over the uncertainty disk of the included angle a-p-b."""
    a, b = _vec(a), _vec(b)
    center = np.asarray(ur.center)
    for p in (a, b):
        if math.hypot(*(p - center)) <= ur.radius:
            raise DomainError("anchor lies inside the uncertainty region")
    if line_intersects_disk(a, b, ur):
        return AngleExtremes(math.nan, math.nan, True)
    lo, hi, _ = angle_extremes_batch(a, b, center, ur.radius)
    return AngleExtremes(float(lo), float(hi), False)


def _worst_from_extremes(theta_min, theta_max, degenerate, p0):
    with np.errstate(divide="ignore", invalid="ignore"):
        s2 = np.minimum(np.sin(theta_min) ** 2, np.sin(theta_max) ** 2)
        out = p0 / s2
    return np.where(degenerate, np.inf, out)


def worst_case_speb(a, b, ur: Disk, p0: float) -> float:
    """Largest two-anchor SPEB p0 / sin^2(theta) over the uncertainty disk (inf if degenerate)."""
    ext = subtended_angle_extremes(a, b, ur)
    if ext.degenerate:
        return math.inf
    return float(_worst_from_extremes(ext.theta_min, ext.theta_max, False, p0))


def pair_indices(n: int):
    """All index pairs (i, j), i < j, in lexicographic order."""
    return np.triu_indices(n, k=1)


def worst_case_speb_batch(anchors, center, radius, p0):
    """Worst-case SPEB of every anchor pair; ``anchors`` has shape (..., N, 2).

    Returns an array of shape (..., N(N-1)/2) with pairs in lexicographic order.
    """
    anchors = np.asarray(anchors, dtype=float)
    i, j = pair_indices(anchors.shape[-2])
    center = np.asarray(center, dtype=float)
    if center.ndim > 1:
        center = center[..., None, :]
    lo, hi, deg = angle_extremes_batch(anchors[..., i, :], anchors[..., j, :], center, radius)
    return _worst_from_extremes(lo, hi, deg, p0)


def _anchor_array(anchors: Sequence) -> np.ndarray:
    arr = np.asarray(anchors, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise DomainError("need at least two 2-D anchors")
    return arr


def select_pair_optimal(anchors: Sequence, ur: Disk, p0: float):
    """Pair minimizing the worst-case SPEB over the uncertainty disk.

    Returns ``((i, j), speb)``; the SPEB is +inf when every pair line meets
    the disk.  Ties go to the lexicographically first pair.
    """
    arr = _anchor_array(anchors)
    center = np.asarray(ur.center)
    if np.any(np.hypot(*(arr - center).T) <= ur.radius):
        raise DomainError("anchor lies inside the uncertainty region")
    values = worst_case_speb_batch(arr, center, ur.radius, p0)
    k = int(np.argmin(values))
    i, j = pair_indices(len(arr))
    return (int(i[k]), int(j[k])), float(values[k])


def select_pair_suboptimal(anchors: Sequence, center) -> tuple[int, int]:
    """Pair whose included angle at ``center`` is closest to pi/2."""
    arr = _anchor_array(anchors)
    d = arr - _vec(center)
    if np.any(np.hypot(d[:, 0], d[:, 1]) == 0):
        raise DomainError("an anchor coincides with the center")
    bearing = np.arctan2(d[:, 1], d[:, 0])
    i, j = pair_indices(len(arr))
    score = np.sin(bearing[i] - bearing[j]) ** 2
    k = int(np.argmax(score))
    return int(i[k]), int(j[k])
