import math

import mpmath
import pytest
from hypothesis import given, strategies as st

from locoutage.errors import DomainError
from locoutage.specfun import DEFAULT_SPEC, QuadratureSpec, TailPolicy, bessel_j0, bessel_j1, integrate_bessel_tail


def test_j0_reference_values():
    assert bessel_j0(0.0) == 1.0
    assert abs(bessel_j0(2.404825557695773)) < 1e-10
    assert bessel_j0(1.0) == pytest.approx(0.7651976865579666, abs=1e-15)


def test_j1_reference_values():
    assert bessel_j1(0.0) == 0.0
    assert bessel_j1(1.0) == pytest.approx(0.4400505857449335, abs=1e-15)


def test_j0_derivative_is_minus_j1():
    h = 1e-6
    fd = -(bessel_j0(2 + h) - bessel_j0(2 - h)) / (2 * h)
    assert abs(fd - bessel_j1(2.0)) < 1e-8


@given(st.floats(min_value=-200, max_value=200, allow_nan=False))
def test_bessel_matches_mpmath(x):
    assert bessel_j0(x) == pytest.approx(float(mpmath.besselj(0, x)), abs=1e-14)
    assert bessel_j1(x) == pytest.approx(float(mpmath.besselj(1, x)), abs=1e-14)


@given(st.floats(min_value=0, max_value=1e3))
def test_bessel_parity_and_bound(x):
    assert bessel_j0(-x) == bessel_j0(x)
    assert bessel_j1(-x) == -bessel_j1(x)
    assert abs(bessel_j0(x)) <= 1.0
    assert abs(bessel_j1(x)) <= 1.0


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_bessel_rejects_nonfinite(bad):
    with pytest.raises(DomainError):
        bessel_j0(bad)
    with pytest.raises(DomainError):
        bessel_j1(bad)


def test_tail_integral_trivial_cases():
    assert integrate_bessel_tail(0.0, 3) == 0.0
    for n in range(2, 9):
        assert n * integrate_bessel_tail(float(n), n) == pytest.approx(1.0, abs=1e-6)


def test_tail_integral_two_steps_closed_form():
    u = math.sqrt(2)
    assert u * integrate_bessel_tail(u, 2) == pytest.approx(0.5, abs=1e-6)


def _mp_reference(u, n):
    f = lambda r: mpmath.besselj(1, u * r) * mpmath.besselj(0, r) ** n  # noqa: E731
    return float(mpmath.quadosc(f, [0, mpmath.inf], omega=1 + u if n % 2 else u + 1))


@pytest.mark.parametrize("u,n", [(1.3, 3), (0.7, 4), (2.9, 5)])
def test_tail_integral_against_mpmath(u, n):
    with mpmath.workdps(20):
        ref = _mp_reference(u, n)
    assert integrate_bessel_tail(u, n) == pytest.approx(ref, abs=1e-8)


def test_quadrature_spec_validation():
    assert DEFAULT_SPEC.tail_policy in TailPolicy
    with pytest.raises(DomainError):
        QuadratureSpec(abs_tol=-1.0)


@pytest.mark.parametrize("u,n", [(0.3, 3), (1.9, 4), (4.0, 6), (6.5, 7)])
def test_tail_policies_agree(u, n):
    fixed = integrate_bessel_tail(u, n, QuadratureSpec(tail_policy=TailPolicy.FIXED_UPPER_LIMIT))
    decay = integrate_bessel_tail(u, n, QuadratureSpec(tail_policy=TailPolicy.DECAY_THRESHOLD))
    assert decay == pytest.approx(fixed, abs=1e-10)
