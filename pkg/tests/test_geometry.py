import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from locoutage.errors import DomainError
from locoutage.geometry import (
    Disk,
    angle_extremes_batch,
    included_angle,
    line_intersects_disk,
    select_pair_optimal,
    select_pair_suboptimal,
    subtended_angle_extremes,
    worst_case_speb,
    worst_case_speb_batch,
)

UNIT = Disk((0.0, 0.0), 1.0)


def _grid_extremes(a, b, disk, nr=400, nphi=400):
    """Polar grid over the disk plus a fine boundary ring."""
    r = np.linspace(0, disk.radius, nr)[:, None]
    phi = np.linspace(0, 2 * math.pi, nphi, endpoint=False)[None, :]
    ring = np.linspace(0, 2 * math.pi, 20000, endpoint=False)
    xs = np.concatenate([(r * np.cos(phi)).ravel(), disk.radius * np.cos(ring)]) + disk.center.x
    ys = np.concatenate([(r * np.sin(phi)).ravel(), disk.radius * np.sin(ring)]) + disk.center.y
    u = np.stack([a[0] - xs, a[1] - ys], -1)
    w = np.stack([b[0] - xs, b[1] - ys], -1)
    ang = np.arctan2(np.abs(u[:, 0] * w[:, 1] - u[:, 1] * w[:, 0]), np.sum(u * w, -1))
    return ang.min(), ang.max()


def test_included_angle_examples():
    assert included_angle((1, 0), (0, 1), (0, 0)) == pytest.approx(math.pi / 2)
    assert included_angle((1, 0), (-1, 0), (0, 0)) == pytest.approx(math.pi)
    assert included_angle((1, 0), (1, 1), (0, 0)) == pytest.approx(math.pi / 4)
    with pytest.raises(DomainError):
        included_angle((0, 0), (1, 1), (0, 0))


def test_line_intersection_examples():
    assert line_intersects_disk((-10, 0), (10, 0), UNIT)
    assert not line_intersects_disk((-10, 2), (10, 2), UNIT)
    assert line_intersects_disk((-10, 1), (10, 1), UNIT)


def test_symmetric_extremes_on_vertical_axis():
    a, b = (-5.0, 10.0), (5.0, 10.0)
    ext = subtended_angle_extremes(a, b, UNIT)
    assert not ext.degenerate
    assert ext.theta_max == pytest.approx(included_angle(a, b, (0, 1)), abs=1e-12)
    assert ext.theta_min == pytest.approx(included_angle(a, b, (0, -1)), abs=1e-12)


def test_degenerate_and_inside():
    ext = subtended_angle_extremes((-10, 0.5), (10, 0.5), UNIT)
    assert ext.degenerate and math.isnan(ext.theta_min)
    assert worst_case_speb((-10, 0.5), (10, 0.5), UNIT, 1.0) == math.inf
    with pytest.raises(DomainError):
        subtended_angle_extremes((0.2, 0.1), (10, 5), UNIT)


def test_worst_case_picks_endpoint_farther_from_right_angle():
    # a right angle at the center of a small disk: extremes straddle pi/2 symmetrically
    a, b = (-10.0, 0.0), (0.0, 10.0)
    disk = Disk((0.0, 0.0), 0.5)
    ext = subtended_angle_extremes(a, b, disk)
    expected = 1.0 / min(math.sin(ext.theta_min) ** 2, math.sin(ext.theta_max) ** 2)
    assert worst_case_speb(a, b, disk, 1.0) == pytest.approx(expected)
    assert worst_case_speb(a, b, disk, 1.0) > 1.0


@st.composite
def _pair_outside(draw):
    a = np.array([draw(st.floats(-60, 60)), draw(st.floats(-60, 60))])
    b = np.array([draw(st.floats(-60, 60)), draw(st.floats(-60, 60))])
    radius = draw(st.floats(0.2, 10))
    return a, b, Disk((0.0, 0.0), radius)


@given(_pair_outside())
def test_extremes_match_grid_oracle(case):
    a, b, disk = case
    assume(min(np.hypot(*a), np.hypot(*b)) > disk.radius * 1.05)
    assume(np.hypot(*(a - b)) > 1e-3)
    assume(not line_intersects_disk(a, b, Disk((0.0, 0.0), disk.radius * 1.05)))
    ext = subtended_angle_extremes(a, b, disk)
    lo, hi = _grid_extremes(a, b, disk, 60, 120)
    # the grid lies inside the disk, so its range is contained in the exact one
    assert ext.theta_min <= lo + 1e-9 and ext.theta_max >= hi - 1e-9
    assert ext.theta_min == pytest.approx(lo, rel=1e-4, abs=1e-9)
    assert ext.theta_max == pytest.approx(hi, rel=1e-4, abs=1e-9)


def test_extremes_dense_polar_grid_examples():
    rng = np.random.default_rng(3)
    done = 0
    while done < 5:
        a, b = rng.uniform(-30, 30, (2, 2))
        disk = Disk((0.0, 0.0), float(rng.uniform(0.5, 3)))
        if line_intersects_disk(a, b, disk) or min(np.hypot(*a), np.hypot(*b)) <= disk.radius:
            continue
        ext = subtended_angle_extremes(a, b, disk)
        lo, hi = _grid_extremes(a, b, disk)
        assert ext.theta_min == pytest.approx(lo, rel=1e-4)
        assert ext.theta_max == pytest.approx(hi, rel=1e-4)
        done += 1


def test_batch_agrees_with_scalar():
    rng = np.random.default_rng(0)
    anchors = rng.uniform(-50, 50, (40, 4, 2))
    anchors = anchors[np.all(np.hypot(anchors[..., 0], anchors[..., 1]) > 2, axis=1)]
    batch = worst_case_speb_batch(anchors, (0.0, 0.0), 2.0, 1.0)
    disk = Disk((0.0, 0.0), 2.0)
    pairs = [(i, j) for i in range(4) for j in range(i + 1, 4)]
    for t in range(len(anchors)):
        for k, (i, j) in enumerate(pairs):
            assert batch[t, k] == pytest.approx(worst_case_speb(anchors[t, i], anchors[t, j], disk, 1.0), rel=1e-12)


def test_batch_flags_degenerate_with_nan():
    lo, hi, deg = angle_extremes_batch(np.array([[-10.0, 0.5]]), np.array([[10.0, 0.5]]), (0.0, 0.0), 1.0)
    assert deg[0] and math.isnan(lo[0]) and math.isnan(hi[0])


def test_optimal_selection_examples():
    # only the pair (1, 2) avoids the disk
    anchors = [(-10.0, 0.0), (10.0, 5.0), (0.0, 8.0)]
    (i, j), value = select_pair_optimal(anchors, UNIT, 1.0)
    assert {i, j} != {0, 1} and math.isfinite(value)
    collinear = [(-10.0, 0.0), (10.0, 0.0), (5.0, 0.0)]
    assert select_pair_optimal(collinear, UNIT, 1.0) == ((0, 1), math.inf)
    with pytest.raises(DomainError):
        select_pair_optimal([(0.1, 0.0), (5.0, 5.0)], UNIT, 1.0)


def _polar(deg):
    return (math.cos(math.radians(deg)) * 20, math.sin(math.radians(deg)) * 20)


def test_suboptimal_selection_examples():
    # 170 - 80 is exactly a right angle
    assert select_pair_suboptimal([_polar(0), _polar(80), _polar(170)], (0, 0)) == (1, 2)
    assert select_pair_suboptimal([_polar(0), _polar(90)], (0, 0)) == (0, 1)
    assert select_pair_suboptimal([_polar(10), _polar(30)], (0, 0)) == (0, 1)


@given(st.lists(st.tuples(st.floats(0, 2 * math.pi), st.floats(5, 100)), min_size=2, max_size=7))
def test_optimal_never_worse_than_suboptimal(polar):
    anchors = [(r * math.cos(t), r * math.sin(t)) for t, r in polar]
    _, best = select_pair_optimal(anchors, UNIT, 1.0)
    i, j = select_pair_suboptimal(anchors, (0, 0))
    assume(np.hypot(*np.subtract(anchors[i], anchors[j])) > 1e-6)
    assert best <= worst_case_speb(anchors[i], anchors[j], UNIT, 1.0) * (1 + 1e-12)


@given(st.floats(0.05, math.pi - 0.05), st.floats(20, 200), st.floats(20, 200))
def test_worst_case_at_least_center_value(angle, r1, r2):
    a = (r1, 0.0)
    b = (r2 * math.cos(angle), r2 * math.sin(angle))
    assume(not line_intersects_disk(a, b, UNIT))
    center_value = 1.0 / math.sin(angle) ** 2
    assert worst_case_speb(a, b, UNIT, 1.0) >= center_value * (1 - 1e-9)
