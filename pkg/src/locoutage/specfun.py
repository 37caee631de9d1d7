"""Bessel functions and the semi-infinite Bessel-product integral.

The integral of interest is

    I(U, N) = int_0^inf J1(U r) J0(r)^N dr,

whose scaled value U * I(U, N) is the CDF of the distance travelled by an
N-step planar random walk with unit steps.  The integrand decays only like
r^(-(N+1)/2) and, when U is close to an integer of the same parity as N,
contains a non-oscillating component, so plain truncation converges far too
slowly.  The integral is therefore split at a cutoff R0:

* [0, R0] is covered by Gauss-Legendre panels no wider than half the shortest
  oscillation period, with an embedded lower-order rule as error estimate;
* [R0, inf) is integrated in closed form after replacing every Bessel factor
  by its Hankel asymptotic expansion, which turns the integrand into a finite
  sum of terms c * r^(-b) * exp(i w r).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy import special

from locoutage.errors import ConvergenceError, DomainError

__all__ = [
    "QuadratureSpec",
    "TailPolicy",
    "bessel_j0",
    "bessel_j1",
    "integrate_bessel_tail",
]


class TailPolicy(enum.Enum):
    FIXED_UPPER_LIMIT = "fixed-upper-limit"
    DECAY_THRESHOLD = "decay-threshold"


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and limits for :func:`integrate_bessel_tail`.

    ``tail_policy`` picks the split point between panel quadrature and the
    asymptotic tail.  ``FIXED_UPPER_LIMIT`` uses a cutoff proportional to
    ``max(1, 1/U)``; ``DECAY_THRESHOLD`` grows the cutoff until the first
    omitted asymptotic term is below ``abs_tol``.
    """

    abs_tol: float = 1e-11
    rel_tol: float = 1e-10
    max_subintervals: int = 1_000_000
    tail_policy: TailPolicy = TailPolicy.FIXED_UPPER_LIMIT

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subintervals < 1:
            raise DomainError("max_subintervals must be at least 1")
        if not isinstance(self.tail_policy, TailPolicy):
            object.__setattr__(self, "tail_policy", TailPolicy(self.tail_policy))


DEFAULT_SPEC = QuadratureSpec()


def _check_finite(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"Bessel argument must be finite, got {x!r}")
    return arr


def bessel_j0(x):
    """Bessel function of the first kind, order 0.

    Accepts scalars or arrays and returns the same shape.  Backed by the
    Cephes routine in scipy, which keeps absolute error near 1e-16 well
    beyond |x| = 1e4.
    """
    arr = _check_finite(x)
    out = special.j0(arr)
    return float(out) if out.ndim == 0 else out


def bessel_j1(x):
    """Bessel function of the first kind, order 1 (see :func:`bessel_j0`)."""
    arr = _check_finite(x)
    out = special.j1(arr)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# Hankel expansion of the tail
# --------------------------------------------------------------------------

# number of 1/r orders kept in the product expansion
_TAIL_ORDER = 8
# minimum value of (argument at the cutoff) for both J0(r) and J1(U r)
_CUTOFF_ARG = 64.0
# |w| R0 above which the integration-by-parts series is used for the tail
_SERIES_SWITCH = 60.0


@lru_cache(maxsize=None)
def _hankel_coefficients(nu: int, order: int) -> tuple[complex, ...]:
    """Coefficients i^k a_k(nu) of J_nu(z) = Re[sqrt(2/(pi z)) e^{i chi} sum c_k z^-k]."""
    mu = 4.0 * nu * nu
    coeffs = []
    a = 1.0
    for k in range(order + 1):
        if k > 0:
            a *= (mu - (2 * k - 1) ** 2) / (k * 8.0)
        coeffs.append((1j) ** k * a)
    return tuple(coeffs)


def _poly_mul(p, q, order):
    out = np.zeros(order + 1, dtype=complex)
    for i, pi in enumerate(p):
        if pi == 0:
            continue
        for j in range(0, order + 1 - i):
            out[i + j] += pi * q[j]
    return out


def _poly_pow(p, n, order):
    out = np.zeros(order + 1, dtype=complex)
    out[0] = 1.0
    for _ in range(n):
        out = _poly_mul(out, p, order)
    return out


def _tail_terms(U: float, N: int, order: int):
    """Expand J1(U r) J0(r)^N for large r as {(w, b): c} with terms c r^-b e^{iwr}."""
    s0 = np.array(_hankel_coefficients(0, order))
    s1 = np.array(_hankel_coefficients(1, order))
    scale_u = U ** -np.arange(order + 1)
    pre = (2.0 / math.pi) ** ((N + 1) / 2) / math.sqrt(U) / 2.0 ** (N + 1)

    terms: dict[tuple[float, float], complex] = {}
    for sign in (1, -1):
        first = s1 * scale_u if sign == 1 else np.conj(s1) * scale_u
        for j in range(N + 1):
            series = _poly_mul(
                first,
                _poly_mul(_poly_pow(s0, j, order), _poly_pow(np.conj(s0), N - j, order), order),
                order,
            )
            omega = sign * U + (2 * j - N)
            phase = -0.75 * math.pi * sign - (2 * j - N) * 0.25 * math.pi
            weight = pre * math.comb(N, j) * complex(math.cos(phase), math.sin(phase))
            for k in range(order + 1):
                key = (omega, (N + 1) / 2 + k)
                terms[key] = terms.get(key, 0j) + weight * series[k]
    return terms


def _power_exp_tail(b: float, omega: float, R: float) -> complex:
    """int_R^inf r^-b exp(i omega r) dr for b > 0 (b > 1 when omega == 0)."""
    if omega == 0.0:
        return R ** (1.0 - b) / (b - 1.0)
    wr = abs(omega) * R
    if wr > _SERIES_SWITCH:
        # repeated integration by parts; asymptotic, stop at the smallest term
        term = -1.0 / (1j * omega)
        total = 0j
        prev = math.inf
        for k in range(200):
            if abs(term) > prev:
                break
            total += term
            prev = abs(term)
            if prev < 1e-18 * abs(total):
                break
            term *= (b + k) / (1j * omega * R)
        return R ** (-b) * complex(math.cos(omega * R), math.sin(omega * R)) * total
    return complex(R ** (1.0 - b) * mpmath.expint(b, -1j * omega * R))


def _tail_integral(U: float, N: int, R0: float, order: int = _TAIL_ORDER) -> float:
    total = []
    for (omega, b), c in _tail_terms(U, N, order).items():
        if abs(c) < 1e-300:
            continue
        if omega == 0.0 and b <= 1.0:
            # the resonant leading term cancels between conjugate branches
            if abs(c) > 1e-12:
                raise ConvergenceError("non-integrable resonant tail term")
            continue
        total.append((c * _power_exp_tail(b, omega, R0)).real)
    return math.fsum(total)


def _first_omitted_term(U: float, N: int, R0: float, order: int) -> float:
    """Rough size of the first tail term beyond ``order`` (for the decay policy)."""
    a1 = abs(_hankel_coefficients(1, order + 1)[-1]) * U ** -(order + 1)
    a0 = abs(_hankel_coefficients(0, order + 1)[-1])
    env = (2.0 / math.pi) ** ((N + 1) / 2) / math.sqrt(U)
    return env * (a1 + N * a0) * R0 ** (-(N + 1) / 2 - order) / max((N - 1) / 2 + order, 0.5)


# --------------------------------------------------------------------------
# Panel quadrature on [0, R0]
# --------------------------------------------------------------------------

_GL_HI = np.polynomial.legendre.leggauss(24)
_GL_LO = np.polynomial.legendre.leggauss(16)


def _integrand(r, U, N):
    return special.j1(U * r) * special.j0(r) ** N


def _panel_sum(U, N, R0, n_panels):
    edges = np.linspace(0.0, R0, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    sums = []
    for nodes, weights in (_GL_HI, _GL_LO):
        r = mid[:, None] + half[:, None] * nodes[None, :]
        vals = _integrand(r, U, N) @ weights * half
        sums.append(vals)
    hi, lo = sums
    return math.fsum(hi), float(np.sum(np.abs(hi - lo)))


def _cutoff(U: float, N: int, spec: QuadratureSpec) -> float:
    base = _CUTOFF_ARG * max(1.0, 1.0 / U)
    if spec.tail_policy is TailPolicy.FIXED_UPPER_LIMIT:
        return base
    R0 = base / 4.0
    while _first_omitted_term(U, N, R0, _TAIL_ORDER) > spec.abs_tol and R0 < 64 * base:
        R0 *= 2.0
    return max(R0, base / 4.0)


def integrate_bessel_tail(U: float, N: int, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Return int_0^inf J1(U r) J0(r)^N dr.

    ``U * integrate_bessel_tail(U, N)`` is P{K <= U} for the distance K of an
    N-step unit random walk (at a jump of the CDF, as for N = 1 at U = 1, it
    returns the midpoint of the jump).  Raises :class:`ConvergenceError` if
    the panel error estimate cannot be brought under tolerance within
    ``spec.max_subintervals`` panels.
    """
    if not (math.isfinite(U) and U >= 0):
        raise DomainError(f"U must be a finite nonnegative number, got {U!r}")
    if int(N) != N or N < 1:
        raise DomainError(f"N must be an integer >= 1, got {N!r}")
    N = int(N)
    U = float(U)
    if U == 0.0:
        return 0.0

    R0 = _cutoff(U, N, spec)
    n_panels = max(8, int(math.ceil(R0 * (U + N) / math.pi)))
    while True:
        body, err = _panel_sum(U, N, R0, n_panels)
        if err <= max(spec.abs_tol, spec.rel_tol * abs(body)):
            break
        if 2 * n_panels > spec.max_subintervals:
            raise ConvergenceError(
                f"panel quadrature did not converge for U={U}, N={N}", value=body, error=err
            )
        n_panels *= 2
    return body + _tail_integral(U, N, R0)
