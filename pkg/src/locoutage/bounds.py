"""Two-anchor outage analytics: P(delta), its bounds, Q_delta and the LOP bounds.

P(delta) is the probability that every pairwise included angle of N i.i.d.
uniform bearings stays out of [pi/2 - delta, pi/2 + delta].  Doubling the
bearings maps this to "all pairwise circular distances are below
pi - 2 delta", which has a closed form for delta >= pi/6 and otherwise is
computed exactly by conditioning on the smallest doubled bearing and on how
the remaining points split over three arcs (see :func:`p_delta_exact`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from locoutage.errors import ConvergenceError, DomainError
from locoutage.specfun import DEFAULT_SPEC, QuadratureSpec

__all__ = [
    "BoundsReport",
    "DeltaQuery",
    "GeometryRatio",
    "coverage_length_atoms",
    "coverage_length_cdf",
    "coverage_length_pdf",
    "coverage_moments",
    "delta_from_threshold",
    "p_delta",
    "p_delta_closed",
    "p_delta_exact",
    "p_delta_lower",
    "p_delta_upper",
    "prop1_factor",
    "q_delta",
    "q_delta_dtheta",
    "q_expression",
    "q_expression_dmu",
    "q_root",
    "theta_min_atom",
    "theta_min_pdf",
    "threshold_from_delta",
    "two_anchor_bounds",
    "two_anchor_lop_lower",
    "two_anchor_lop_upper",
]

HALF_PI = 0.5 * math.pi
SIXTH_PI = math.pi / 6.0
MAX_EXACT_N = 30


@dataclass(frozen=True)
class DeltaQuery:
    n_anchors: int
    delta: float

    def __post_init__(self):
        if int(self.n_anchors) != self.n_anchors or self.n_anchors < 2:
            raise DomainError("n_anchors must be an integer >= 2")
        if not 0.0 <= self.delta <= HALF_PI:
            raise DomainError("delta must lie in [0, pi/2]")


@dataclass(frozen=True)
class GeometryRatio:
    """Communication radius ``big_r`` and uncertainty radius ``small_r``."""

    big_r: float
    small_r: float

    def __post_init__(self):
        if not self.big_r > self.small_r > 0:
            raise DomainError("need big_r > small_r > 0")

    @property
    def ratio(self) -> float:
        return self.big_r / self.small_r


@dataclass(frozen=True)
class BoundsReport:
    lower: float
    upper: float
    exact: float | None = None
    method_notes: str = ""

    def __post_init__(self):
        if self.lower > self.upper + 1e-12:
            raise DomainError(f"lower bound {self.lower} exceeds upper bound {self.upper}")
        if self.exact is not None and not (self.lower - 1e-9 <= self.exact <= self.upper + 1e-9):
            raise DomainError(f"exact value {self.exact} outside [{self.lower}, {self.upper}]")


def threshold_from_delta(delta: float) -> float:
    """SPEB threshold in units of P0 matching a half-width delta: 1 / cos^2(delta)."""
    return 1.0 / math.cos(delta) ** 2


def delta_from_threshold(threshold_ratio: float) -> float:
    """Inverse of :func:`threshold_from_delta`; requires threshold_ratio >= 1."""
    if threshold_ratio < 1.0:
        raise DomainError("thresholds below P0 cannot be met by any pair")
    return math.acos(math.sqrt(1.0 / threshold_ratio))


# --------------------------------------------------------------------------
# P(delta): closed form and bounds
# --------------------------------------------------------------------------


def p_delta_closed(N: int, delta: float) -> float:
    """N ((pi - 2 delta) / (2 pi))^(N-1); exact for delta >= pi/6."""
    return N * ((math.pi - 2 * delta) / (2 * math.pi)) ** (N - 1)


def p_delta_lower(N: int, delta: float) -> float:
    if delta >= SIXTH_PI:
        return p_delta_closed(N, delta)
    return p_delta_closed(N, delta) + (N - 2) * ((math.pi - 6 * delta) / (2 * math.pi)) ** (N - 1)


def p_delta_upper(N: int, delta: float) -> float:
    if delta >= SIXTH_PI:
        return p_delta_closed(N, delta)
    return ((math.pi - 4 * delta) / math.pi) ** (N - 1) + (N - 1) * 4 * delta * (
        math.pi - 2 * delta
    ) ** (N - 2) / (2 * math.pi) ** (N - 1)


def p_delta(q: DeltaQuery) -> BoundsReport:
    N, d = int(q.n_anchors), q.delta
    if d >= SIXTH_PI:
        value = p_delta_closed(N, d)
        return BoundsReport(value, value, value, "closed form (delta >= pi/6)")
    return BoundsReport(p_delta_lower(N, d), p_delta_upper(N, d), None, "two-sided bound (delta < pi/6)")


# --------------------------------------------------------------------------
# smallest doubled bearing
# --------------------------------------------------------------------------


def theta_min_pdf(N: int, delta: float, x: float) -> float:
    """Continuous part of the law of the smallest doubled bearing on (2 delta, pi).

    One doubled bearing is pinned at pi; the law restricted to x > 2 delta is
    (N-1)(2 pi - x)^(N-2) / (2 pi)^(N-1).  The point mass at pi is
    :func:`theta_min_atom`.
    """
    if N < 2:
        raise DomainError("N must be >= 2")
    if not 2 * delta < x < math.pi:
        return 0.0
    return (N - 1) * (2 * math.pi - x) ** (N - 2) / (2 * math.pi) ** (N - 1)


def theta_min_atom(N: int) -> float:
    """Probability that the pinned bearing at pi is itself the smallest."""
    return 0.5 ** (N - 1)


# --------------------------------------------------------------------------
# linear coverage length
# --------------------------------------------------------------------------


def _ppow(x, p):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, np.abs(x) ** p, 0.0)


def _scaled_coverage_density(n, L, D, y):
    """L^n times the continuous density of the covered length (n >= 2)."""
    total = np.zeros(np.broadcast(L, y).shape)
    for k in range(1, n):
        outer = n * math.comb(n - 1, k - 1) * math.comb(n - 1, k) * _ppow(L + D - y, k)
        inner = np.zeros_like(total)
        for r in range(0, n - k + 1):
            inner = inner + (-1) ** r * math.comb(n - k, r) * _ppow(y - (k + r) * D, n - k - 1)
        total = total + outer * inner
    return np.where((y > D) & (y < L + D), total, 0.0)


def coverage_length_pdf(n: int, L: float, D: float, y):
    """Continuous density of the length covered by n intervals of length D.

    The interval centers are i.i.d. uniform on [0, L].  The covered length
    also carries point masses, returned by :func:`coverage_length_atoms`: at 0
    for n = 0, and at n D (all intervals disjoint) whenever L > (n-1) D,
    which for n = 1 is the whole distribution.
    """
    if n < 0 or int(n) != n:
        raise DomainError("n must be a nonnegative integer")
    if not (L > 0 and D > 0):
        raise DomainError("L and D must be positive")
    y_arr = np.asarray(y, dtype=float)
    if n < 2:
        out = np.zeros_like(y_arr)
    else:
        out = _scaled_coverage_density(int(n), L, D, y_arr) / L**n
    return float(out) if out.ndim == 0 else out


def coverage_length_atoms(n: int, L: float, D: float) -> list[tuple[float, float]]:
    """Point masses ``[(location, probability), ...]`` of the covered length."""
    if n == 0:
        return [(0.0, 1.0)]
    mass = (max(L - (n - 1) * D, 0.0) / L) ** n
    return [(n * D, mass)] if mass > 0 else []


_GL_Y = np.polynomial.legendre.leggauss(32)


def _coverage_pieces(n, L, D):
    """Polynomial pieces of the density as (lo, hi) arrays broadcast over L."""
    L = np.asarray(L, dtype=float)
    los, his = [], []
    for k in range(1, n):
        lo = k * D
        hi = np.minimum((k + 1) * D, L + D)
        los.append(np.full(L.shape, lo))
        his.append(np.maximum(hi, lo))
    return np.stack(los, -1), np.stack(his, -1)


def coverage_length_cdf(n: int, L: float, D: float, y: float) -> float:
    """P{Y <= y}, integrating the density piecewise and adding the atoms."""
    total = sum(mass for loc, mass in coverage_length_atoms(n, L, D) if loc <= y)
    if n >= 2:
        nodes, weights = _GL_Y
        lo, hi = _coverage_pieces(n, L, D)
        hi = np.minimum(hi, y)
        width = np.maximum(hi - lo, 0.0)
        pts = lo[..., None] + 0.5 * width[..., None] * (nodes + 1.0)
        dens = _scaled_coverage_density(n, L, D, pts) / L**n
        total += float(np.sum(dens * weights * 0.5 * width[..., None]))
    return total


def coverage_moments(n: int, L, D: float, top, m_max: int, scaled: bool = False):
    """E[(top - Y)^m] for m = 0..m_max, vectorized over L and ``top``.

    With ``scaled=True`` the result is multiplied by L^n, which keeps it a
    polynomial in L (finite as L -> 0).  Returns shape ``L.shape + (m_max+1,)``.
    """
    L = np.asarray(L, dtype=float)
    top = np.broadcast_to(np.asarray(top, dtype=float), L.shape)
    powers = np.arange(m_max + 1)
    if n == 0:
        out = top[..., None] ** powers
        return out
    atom = _ppow(L - (n - 1) * D, n)
    out = atom[..., None] * _ppow(top - n * D, 1)[..., None] ** powers
    if n >= 2:
        nodes, weights = _GL_Y
        lo, hi = _coverage_pieces(n, L, D)
        width = hi - lo
        pts = lo[..., None] + 0.5 * width[..., None] * (nodes + 1.0)
        dens = _scaled_coverage_density(n, L[..., None, None], D, pts)
        w = dens * weights * 0.5 * width[..., None]
        gap = np.maximum(top[..., None, None] - pts, 0.0)
        out = out + np.einsum("...pq,...pqm->...m", w, gap[..., None] ** powers)
    if not scaled:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = out / (L**n)[..., None]
    return out


# --------------------------------------------------------------------------
# exact P(delta) below pi/6
# --------------------------------------------------------------------------


def _kahan_rows(rows):
    total = np.zeros_like(rows[0])
    comp = np.zeros_like(rows[0])
    for row in rows:
        yv = row - comp
        t = total + yv
        comp = (t - total) - yv
        total = t
    return total


def _middle_integrand(N, delta, x):
    """Sum over arc occupancies of the conditional success probability (times density)."""
    D = 4.0 * delta
    L3 = math.pi - 4 * delta - x
    L1 = math.pi - x
    below = x - 2 * delta
    M = N - 2
    rows = []
    for n in range(M + 1):
        mom = coverage_moments(n, L3, D, L1, M - n, scaled=True)
        for m in range(M - n + 1):
            coef = math.comb(M, n) * math.comb(M - n, m)
            rows.append(coef * below ** (M - n - m) * mom[..., m])
    return _kahan_rows(rows)


def p_delta_exact(q: DeltaQuery, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """P(delta) computed without bounds.

    Fix one doubled bearing at pi and condition on the smallest doubled bearing
    x.  For 2 delta < x < pi - 4 delta each remaining point must fall in one of
    three arcs: I1 = [x, pi), I2 = [pi, x + pi - 2 delta] and
    I3 = (x + pi + 2 delta, 2 pi - 2 delta).  The only conflicts are between
    I1 and I3: a point in I3 forbids a window of width 4 delta in I1.  Given
    n points in I3 and m in I1, the success probability is
    E[((pi - x - Y) / (pi - x))^m], where Y is the covered length of n
    intervals of length 4 delta with centers uniform on an arc of length
    |I3|.  The integrand is piecewise polynomial in x with breaks where |I3|
    is a multiple of 4 delta, so Gauss-Legendre on each piece is exact up to
    rounding; a second rule of lower order serves as the error check.
    """
    N, delta = int(q.n_anchors), q.delta
    if N > MAX_EXACT_N:
        raise DomainError(f"exact P(delta) is limited to N <= {MAX_EXACT_N}")
    if delta > SIXTH_PI:
        return p_delta_closed(N, delta)
    alpha = math.pi - 2 * delta
    tails = alpha ** (N - 2) / (2 * math.pi) ** (N - 1) * ((N - 1) * 4 * delta + alpha)
    lo, hi = 2 * delta, math.pi - 4 * delta
    if N == 2 or hi <= lo:
        if N == 2:
            tails += (hi - lo) / (2 * math.pi) if hi > lo else 0.0
        return min(1.0, max(0.0, tails))

    D = 4 * delta
    breaks = [lo, hi] + [hi - j * D for j in range(1, N) if lo < hi - j * D < hi]
    breaks = np.unique(breaks)
    estimates = []
    for order in (48, 40):
        nodes, weights = np.polynomial.legendre.leggauss(order)
        half = 0.5 * np.diff(breaks)
        mid = 0.5 * (breaks[1:] + breaks[:-1])
        xs = mid[:, None] + half[:, None] * nodes
        vals = _middle_integrand(N, delta, xs.ravel()).reshape(xs.shape)
        estimates.append(math.fsum((vals * weights * half[:, None]).ravel()))
    body, check = estimates
    err = abs(body - check) * (N - 1) / (2 * math.pi) ** (N - 1)
    value = (N - 1) / (2 * math.pi) ** (N - 1) * body + tails
    if err > max(spec.abs_tol, spec.rel_tol * abs(value), 1e-12):
        raise ConvergenceError("exact P(delta) quadrature disagrees between rules", value, err)
    return min(1.0, max(0.0, value))


# --------------------------------------------------------------------------
# Q_delta and the upper bound
# --------------------------------------------------------------------------


def q_expression(mu):
    """Closed-form lower-bound expression for the pair-angle stability probability."""
    mu = np.asarray(mu, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        m1 = mu - 1.0
        out = (
            1.0
            - 1.0 / m1**2
            - 1.0 / mu**2
            - 1.0 / mu**3
            + 2.0 / mu**4
            - 1.0 / (mu**4 * m1)
            + 1.0 / (mu**4 * m1**2)
            - 12.0 * np.log(m1) / mu**4
        )
    return float(out) if out.ndim == 0 else out


def q_expression_dmu(mu):
    """Derivative of :func:`q_expression` with respect to mu."""
    mu = np.asarray(mu, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        m1 = mu - 1.0
        out = (
            2.0 / m1**3
            + 2.0 / mu**3
            + 3.0 / mu**4
            - 8.0 / mu**5
            + 4.0 / (mu**5 * m1)
            + 1.0 / (mu**4 * m1**2)
            - 4.0 / (mu**5 * m1**2)
            - 2.0 / (mu**4 * m1**3)
            + 48.0 * np.log(m1) / mu**5
            - 12.0 / (mu**4 * m1)
        )
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=None)
def q_root() -> float:
    """Largest root of :func:`q_expression` on (1, 20); below it the value is clamped to 0."""
    grid = np.linspace(1.0 + 1e-6, 20.0, 200_001)
    vals = q_expression(grid)
    sign_change = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
    if sign_change.size == 0:
        raise ConvergenceError("no root of the Q expression found on (1, 20)")
    k = int(sign_change[-1])
    return optimize.bisect(q_expression, grid[k], grid[k + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _delta_th(theta, delta):
    return min(abs(HALF_PI - delta - theta), abs(HALF_PI + delta - theta))


def _mu(theta, delta, geom: GeometryRatio):
    return geom.ratio * math.sin(_delta_th(theta, delta))


def q_delta(theta: float, delta: float, geom: GeometryRatio) -> float:
    """Q_delta(theta): 0 when mu <= q_root(), else the expression clamped to [0, 1]."""
    mu = _mu(theta, delta, geom)
    if mu <= q_root():
        return 0.0
    return min(1.0, max(0.0, q_expression(mu)))


def q_delta_dtheta(theta: float, delta: float, geom: GeometryRatio) -> float:
    """Derivative of :func:`q_delta` in theta (0 in the clamped region)."""
    mu = _mu(theta, delta, geom)
    if mu <= q_root():
        return 0.0
    lo_edge, hi_edge = HALF_PI - delta, HALF_PI + delta
    nearest = lo_edge if abs(lo_edge - theta) < abs(hi_edge - theta) else hi_edge
    d_delta = -math.copysign(1.0, nearest - theta)
    return q_expression_dmu(mu) * geom.ratio * math.cos(_delta_th(theta, delta)) * d_delta


def prop1_factor(N: int, geom: GeometryRatio) -> float:
    """((R + r) / R)^(2N), the cost of enlarging the deployment disk by r."""
    return ((geom.big_r + geom.small_r) / geom.big_r) ** (2 * N)


def two_anchor_lop_lower(q: DeltaQuery) -> float:
    """Lower bound on the two-anchor LOP at threshold P0 / cos^2(delta)."""
    return p_delta_lower(int(q.n_anchors), q.delta)


def _p_for_upper(N, t, use_lower=False):
    if t >= SIXTH_PI:
        return p_delta_closed(N, t)
    return p_delta_lower(N, t) if use_lower else p_delta_upper(N, t)


def _upper_parts(q: DeltaQuery, geom: GeometryRatio, spec: QuadratureSpec):
    """Bracketed term of the upper bound, before the region-enlargement factor.

    On [pi/2, pi/2 + delta] the stability margin mu = (R/r) sin(pi/2 + delta - theta)
    decreases monotonically, so the integral of Q'(theta) P(theta - pi/2) is
    taken in the variable log(mu), where the integrand stays smooth even when
    R/r is huge and Q rises from 0 to 1 within a tiny angle.
    """
    N, delta = int(q.n_anchors), q.delta
    mu_top = geom.ratio * math.sin(delta)
    mu0 = q_root()
    if mu_top <= mu0:
        return 1.0, ""

    probe = HALF_PI + np.linspace(0.0, delta, 257)
    slopes = np.array([q_delta_dtheta(t, delta, geom) for t in probe])
    use_lower = bool(np.any(slopes > 0))
    note = "Q' > 0 found; integrand uses the lower P branch" if use_lower else ""

    def f(s):
        mu = math.exp(s)
        t = delta - math.asin(min(1.0, mu / geom.ratio))
        return q_expression_dmu(mu) * mu * _p_for_upper(N, t, use_lower)

    lo, hi = math.log(mu0), math.log(mu_top)
    points = []
    if delta > SIXTH_PI:
        mu_sixth = geom.ratio * math.sin(delta - SIXTH_PI)
        if mu0 < mu_sixth < mu_top:
            points.append(math.log(mu_sixth))
    integral, err = integrate.quad(
        f, lo, hi, points=points or None, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=500
    )
    if not math.isfinite(integral) or err > max(1e-8, 100 * spec.abs_tol):
        raise ConvergenceError("upper-bound integral did not converge", integral, err)
    return 1.0 - q_delta(HALF_PI, delta, geom) + integral, note


def two_anchor_lop_upper(q: DeltaQuery, geom: GeometryRatio, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Upper bound on the two-anchor LOP at threshold P0 / cos^2(delta)."""
    inner, _ = _upper_parts(q, geom, spec)
    return min(1.0, max(0.0, prop1_factor(int(q.n_anchors), geom) * inner))


def two_anchor_bounds(
    N: int, threshold_ratio: float, geom: GeometryRatio, spec: QuadratureSpec = DEFAULT_SPEC
) -> BoundsReport:
    """Lower and upper two-anchor LOP bounds for a threshold given in units of P0."""
    if threshold_ratio <= 1.0:
        return BoundsReport(1.0, 1.0, 1.0, "threshold at or below P0: outage is certain")
    q = DeltaQuery(N, delta_from_threshold(threshold_ratio))
    inner, note = _upper_parts(q, geom, spec)
    upper = min(1.0, max(0.0, prop1_factor(N, geom) * inner))
    lower = two_anchor_lop_lower(q)
    return BoundsReport(lower, upper, None, note)
