import math

import mpmath
import pytest
from hypothesis import given, strategies as st

from locoutage.analytic import AllAnchorQuery, allanchor_lop, randomwalk_distance_cdf, walk_threshold
from locoutage.errors import DomainError


def test_lop_examples():
    assert allanchor_lop(AllAnchorQuery(1, 5.0)) == 1.0
    assert allanchor_lop(AllAnchorQuery(2, 2.0)) == pytest.approx(0.5, abs=1e-6)
    assert allanchor_lop(AllAnchorQuery(5, 0.4)) == 1.0
    assert allanchor_lop(AllAnchorQuery(5, 0.3)) == 1.0


@given(st.floats(1.0001, 1e3))
def test_two_anchor_network_closed_form(e):
    expected = 2 / math.pi * math.asin(math.sqrt(1 / e))
    assert allanchor_lop(AllAnchorQuery(2, e)) == pytest.approx(expected, abs=1e-9)


def test_cdf_examples():
    assert randomwalk_distance_cdf(4, 4.0) == 1.0
    assert randomwalk_distance_cdf(4, 7.5) == 1.0
    assert randomwalk_distance_cdf(3, 0.0) == 0.0
    assert randomwalk_distance_cdf(2, 1.0) == pytest.approx(1 / 3, abs=1e-6)
    assert randomwalk_distance_cdf(1, 0.5) == 0.0
    assert randomwalk_distance_cdf(1, 1.0) == 1.0


@given(st.integers(2, 9), st.floats(0.01, 0.98), st.floats(0.01, 0.98))
def test_cdf_monotone_in_u(n, x, y):
    lo, hi = sorted((x, y))
    assert randomwalk_distance_cdf(n, lo * n) <= randomwalk_distance_cdf(n, hi * n) + 1e-9


@given(st.integers(2, 8), st.floats(0.05, 50), st.floats(0.05, 50))
def test_lop_nonincreasing_in_threshold(n, a, b):
    lo, hi = sorted((a, b))
    assert allanchor_lop(AllAnchorQuery(n, hi)) <= allanchor_lop(AllAnchorQuery(n, lo)) + 1e-9


@given(st.integers(2, 8), st.floats(0.05, 50))
def test_lop_is_probability(n, e):
    assert 0.0 <= allanchor_lop(AllAnchorQuery(n, e)) <= 1.0


def test_three_step_cdf_against_slow_reference():
    # small-disk probability for three steps: P{K <= u} ~ u^2 / (N ...) computed by mpmath
    u = 0.6
    with mpmath.workdps(20):
        f = lambda r: mpmath.besselj(1, u * r) * mpmath.besselj(0, r) ** 3  # noqa: E731
        ref = u * float(mpmath.quadosc(f, [0, mpmath.inf], omega=1 + u))
    assert randomwalk_distance_cdf(3, u) == pytest.approx(ref, abs=1e-8)


def test_more_anchors_reduce_outage():
    values = [allanchor_lop(AllAnchorQuery(n, 2.0)) for n in range(2, 11)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_validation():
    with pytest.raises(DomainError):
        AllAnchorQuery(0, 1.0)
    with pytest.raises(DomainError):
        AllAnchorQuery(3, -1.0)
    with pytest.raises(DomainError):
        randomwalk_distance_cdf(3, -0.1)
    assert walk_threshold(2, 2.0) == pytest.approx(2.0)
