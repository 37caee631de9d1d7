import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from locoutage.errors import DomainError
from locoutage.fim import DisModel, RangingNoise, SpebUnit, efim, ranging_intensity, speb, speb_from_angles


def test_ranging_intensity_models():
    assert ranging_intensity(RangingNoise()) == 1.0
    assert ranging_intensity(RangingNoise.constant_ratio(0.4)) == pytest.approx(1 / 1.16)
    assert ranging_intensity(RangingNoise.constant_ratio(1.0, sigma_clk=2.0)) == pytest.approx(0.125)


def test_noise_validation():
    with pytest.raises(DomainError):
        RangingNoise(sigma_clk=0.0)
    with pytest.raises(DomainError):
        RangingNoise(kappa=-1.0)
    assert RangingNoise(dis_model="constant-ratio", kappa=0.2).dis_model is DisModel.CONSTANT_RATIO


def test_efim_examples():
    noise = RangingNoise()
    np.testing.assert_allclose(efim([(1, 0), (0, 1)], (0, 0), noise), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(efim([(1, 0)], (0, 0), noise), [[1, 0], [0, 0]], atol=1e-15)
    angles = [0, 2 * math.pi / 3, 4 * math.pi / 3]
    pts = [(math.cos(a), math.sin(a)) for a in angles]
    noise2 = RangingNoise(sigma_clk=1 / math.sqrt(2))
    np.testing.assert_allclose(efim(pts, (0, 0), noise2), 3 * np.eye(2), atol=1e-12)


def test_efim_rejects_coincident_anchor():
    with pytest.raises(DomainError):
        efim([(0, 0), (1, 0)], (0, 0), RangingNoise())


def test_speb_examples():
    assert speb(np.eye(2)) == 2.0
    assert speb([[1, 0], [0, 0]]) == math.inf
    assert speb(3 * np.eye(2)) == pytest.approx(2 / 3)


def test_speb_from_angles_examples():
    assert speb_from_angles([0, math.pi / 2], 2.0) == pytest.approx(1.0)
    assert speb_from_angles([0.3, 0.3, 0.3], 2.0) == math.inf
    assert speb_from_angles([0.0], 2.0) == math.inf


def test_spebunit_pairs():
    u = SpebUnit.from_lambda0(4.0)
    assert u.p0 == 0.5
    assert SpebUnit.from_p0(0.5) == u
    with pytest.raises(DomainError):
        SpebUnit(p0=1.0, lambda0=1.0)


@given(st.lists(st.floats(0, 2 * math.pi), min_size=2, max_size=12))
def test_speb_from_angles_matches_efim(angles):
    pts = [(math.cos(a), math.sin(a)) for a in angles]
    j = efim(pts, (0, 0), RangingNoise())
    direct = speb(j)
    walk = speb_from_angles(angles, 1.0)
    if math.isinf(direct) or math.isinf(walk):
        # both must agree that the geometry is (numerically) collinear
        det = np.linalg.det(j)
        assert det < 1e-9 * np.trace(j) ** 2
    else:
        assert walk == pytest.approx(direct, rel=1e-9)


@given(st.lists(st.floats(0, 2 * math.pi), min_size=2, max_size=12))
def test_speb_floor(angles):
    # no geometry beats the equiangular value 4 / (lambda0 N)
    assert speb_from_angles(angles, 1.0) >= 4.0 / len(angles) * (1 - 1e-12)
