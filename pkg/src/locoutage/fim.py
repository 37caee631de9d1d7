"""Ranging noise, equivalent Fisher information and the squared position error bound."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from locoutage.errors import DomainError

__all__ = [
    "DisModel",
    "RangingNoise",
    "SpebUnit",
    "efim",
    "ranging_intensity",
    "speb",
    "speb_from_angles",
]

# det(J) <= SINGULAR_RTOL * tr(J)^2 counts as singular
SINGULAR_RTOL = 1e-15


class DisModel(enum.Enum):
    ZERO = "zero"
    CONSTANT_RATIO = "constant-ratio"


@dataclass(frozen=True)
class RangingNoise:
    """Gaussian ranging noise: clock-drift std plus a distance-dependent std.

    Under ``CONSTANT_RATIO`` the distance-dependent std is ``kappa * sigma_clk``
    at every range; under ``ZERO`` it vanishes.
    """

    sigma_clk: float = 1.0
    dis_model: DisModel = DisModel.ZERO
    kappa: float = 0.0

    def __post_init__(self):
        if not self.sigma_clk > 0:
            raise DomainError("sigma_clk must be positive")
        if not self.kappa >= 0:
            raise DomainError("kappa must be nonnegative")
        if not isinstance(self.dis_model, DisModel):
            object.__setattr__(self, "dis_model", DisModel(self.dis_model))

    @classmethod
    def constant_ratio(cls, kappa: float, sigma_clk: float = 1.0) -> "RangingNoise":
        return cls(sigma_clk=sigma_clk, dis_model=DisModel.CONSTANT_RATIO, kappa=kappa)

    def sigma_dis(self, distance: float = 0.0) -> float:
        if self.dis_model is DisModel.ZERO:
            return 0.0
        return self.kappa * self.sigma_clk

    @property
    def nominal(self) -> "SpebUnit":
        """SPEB unit of the clock-dominated model, lambda0 = 1 / sigma_clk^2.

        Thresholds are quoted in multiples of this P0 regardless of the
        distance-dependent term, which only ever inflates the SPEB.
        """
        return SpebUnit.from_lambda0(1.0 / self.sigma_clk**2)


@dataclass(frozen=True)
class SpebUnit:
    p0: float
    lambda0: float

    def __post_init__(self):
        if not (self.p0 > 0 and self.lambda0 > 0):
            raise DomainError("p0 and lambda0 must be positive")
        if not math.isclose(self.p0 * self.lambda0, 2.0, rel_tol=1e-12):
            raise DomainError("p0 * lambda0 must equal 2")

    @classmethod
    def from_lambda0(cls, lambda0: float) -> "SpebUnit":
        return cls(p0=2.0 / lambda0, lambda0=lambda0)

    @classmethod
    def from_p0(cls, p0: float) -> "SpebUnit":
        return cls(p0=p0, lambda0=2.0 / p0)


def ranging_intensity(noise: RangingNoise, distance: float = 0.0) -> float:
    """lambda = 1 / (sigma_dis^2 + sigma_clk^2)."""
    if distance < 0:
        raise DomainError("distance must be nonnegative")
    return 1.0 / (noise.sigma_dis(distance) ** 2 + noise.sigma_clk**2)


def efim(anchors: Sequence[Sequence[float]], agent: Sequence[float], noise: RangingNoise) -> np.ndarray:
    """Equivalent Fisher information matrix sum_n lambda_n u_n u_n^T (2x2)."""
    a = np.asarray(anchors, dtype=float).reshape(-1, 2)
    d = a - np.asarray(agent, dtype=float)
    dist = np.hypot(d[:, 0], d[:, 1])
    if np.any(dist == 0):
        raise DomainError("an anchor coincides with the agent")
    u = d / dist[:, None]
    lam = np.array([ranging_intensity(noise, float(x)) for x in dist])
    return (u * lam[:, None]).T @ u


def speb(e) -> float:
    """Trace of the inverse EFIM; +inf when the matrix is numerically singular."""
    m = np.asarray(e, dtype=float)
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if tr <= 0 or det <= SINGULAR_RTOL * tr * tr:
        return math.inf
    return tr / det


def speb_from_angles(angles: Sequence[float], lambda0: float) -> float:
    """SPEB of N equal-intensity anchors at the given bearings.

    With K = |sum_n exp(2 i theta_n)|, the SPEB is 4N / (lambda0 (N^2 - K^2)).
    """
    th = np.asarray(angles, dtype=float).ravel()
    n = th.size
    if n == 0:
        raise DomainError("at least one bearing is required")
    k2 = np.sum(np.cos(2 * th)) ** 2 + np.sum(np.sin(2 * th)) ** 2
    if k2 >= n * n - 1e-12:
        return math.inf
    return 4.0 * n / (lambda0 * (n * n - k2))
