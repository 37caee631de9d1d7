"""Seeded Monte Carlo estimators for every analytic quantity in the package.

Randomness is counter based: trials are grouped in fixed blocks of
``BLOCK`` consecutive indices, and block ``k`` of estimator stream ``s`` draws
from a Philox generator keyed by ``(seed, s, k)``.  A trial's randomness
therefore depends only on (seed, trial index); blocks can be evaluated in any
order or in parallel and the counts are summed exactly, so results are
bit-identical for any number of workers.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from scipy import stats

from locoutage.errors import DomainError
from locoutage.fim import SINGULAR_RTOL, RangingNoise, ranging_intensity
from locoutage.geometry import pair_indices, worst_case_speb_batch
from locoutage.bounds import GeometryRatio

__all__ = [
    "AgentPolicy",
    "BLOCK",
    "CoverageSample",
    "Deployment",
    "Estimate",
    "NetworkConfig",
    "Selector",
    "SpebPolicy",
    "TrialConfig",
    "allanchor_speb_samples",
    "estimate_from_count",
    "lop_curve",
    "mc_allanchor_lop",
    "mc_coverage_length",
    "mc_p_delta",
    "mc_q_oracle",
    "mc_suboptimal_angle_outside",
    "mc_two_anchor_lop",
    "mc_walk_distance",
    "sample_deployment",
    "two_anchor_speb_samples",
]

BLOCK = 1 << 15

# stream identifiers keep estimators sharing a seed statistically independent
_STREAM_DEPLOY = 1
_STREAM_BEARINGS = 2
_STREAM_RADII = 3
_STREAM_COVERAGE = 4
_STREAM_WALK = 5

_BOUNDARY_SAMPLES = 64
_REFINE_SAMPLES = 16


class AgentPolicy(enum.Enum):
    AT_CENTER = "at-center"
    UNIFORM_IN_UR = "uniform-in-ur"


class SpebPolicy(enum.Enum):
    AT_AGENT = "at-agent"
    WORST_CASE = "worst-case-over-ur"


class Selector(enum.Enum):
    OPTIMAL = "optimal"
    SUBOPTIMAL = "suboptimal"


@dataclass(frozen=True)
class NetworkConfig:
    """Scalars of one experiment; ``threshold_ratio`` is the SPEB threshold over P0."""

    n_anchors: int
    big_r: float = 100.0
    small_r: float = 1.0
    noise: RangingNoise = field(default_factory=RangingNoise)
    threshold_ratio: float = 2.0

    def __post_init__(self):
        if int(self.n_anchors) != self.n_anchors or self.n_anchors < 1:
            raise DomainError("n_anchors must be an integer >= 1")
        if not self.big_r > self.small_r > 0:
            raise DomainError("need big_r > small_r > 0")
        if not self.threshold_ratio > 0:
            raise DomainError("threshold_ratio must be positive")

    @property
    def geometry(self) -> GeometryRatio:
        return GeometryRatio(self.big_r, self.small_r)

    @property
    def pair_unit(self) -> float:
        """Two-anchor SPEB at a right angle, in units of the nominal P0."""
        return self.noise.nominal.lambda0 / ranging_intensity(self.noise)


@dataclass(frozen=True)
class TrialConfig:
    network: NetworkConfig
    trials: int = 100_000
    seed: int = 0
    agent_policy: AgentPolicy = AgentPolicy.AT_CENTER
    speb_policy: SpebPolicy = SpebPolicy.AT_AGENT

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        for name, kind in (("agent_policy", AgentPolicy), ("speb_policy", SpebPolicy)):
            value = getattr(self, name)
            if not isinstance(value, kind):
                object.__setattr__(self, name, kind(value))


@dataclass(frozen=True)
class Deployment:
    """Anchor positions, true agent position and UR center (the origin)."""

    anchors: np.ndarray
    agent: np.ndarray
    center: np.ndarray


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    ci95: tuple[float, float]
    trials: int
    seed: int

    def within(self, value: float, k: float = 3.0) -> bool:
        return abs(self.mean - value) <= k * self.stderr


def estimate_from_count(count: int, trials: int, seed: int) -> Estimate:
    mean = count / trials
    stderr = math.sqrt(mean * (1.0 - mean) / trials)
    ci = stats.binomtest(int(count), int(trials)).proportion_ci(0.95, method="wilson")
    return Estimate(mean, stderr, (float(min(ci.low, mean)), float(max(ci.high, mean))), int(trials), int(seed))


# --------------------------------------------------------------------------
# block machinery
# --------------------------------------------------------------------------


def _rng(seed: int, stream: int, block: int) -> np.random.Generator:
    key = np.array([seed, (stream << 40) | block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _blocks(trials: int) -> list[tuple[int, int]]:
    """(block index, number of trials used from the block)."""
    full, rest = divmod(trials, BLOCK)
    out = [(k, BLOCK) for k in range(full)]
    if rest:
        out.append((full, rest))
    return out


def _map_blocks(fn: Callable[[int, int], np.ndarray], trials: int, workers: int) -> list:
    jobs = _blocks(trials)
    if workers <= 1 or len(jobs) == 1:
        return [fn(k, n) for k, n in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def _uniform_disk(rng, shape, radius):
    u = rng.random(shape + (2,))
    rad = radius * np.sqrt(u[..., 0])
    ang = 2.0 * math.pi * u[..., 1]
    return np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=-1)


def _deployment_block(cfg: TrialConfig, block: int):
    net = cfg.network
    rng = _rng(cfg.seed, _STREAM_DEPLOY, block)
    agent = _uniform_disk(rng, (BLOCK,), net.small_r)
    offsets = _uniform_disk(rng, (BLOCK, net.n_anchors), net.big_r)
    if cfg.agent_policy is AgentPolicy.AT_CENTER:
        agent = np.zeros_like(agent)
    return agent[:, None, :] + offsets, agent


def sample_deployment(cfg: TrialConfig, trial_index: int) -> Deployment:
    """The deployment used by trial ``trial_index`` of every deployment-based estimator."""
    if not 0 <= trial_index < cfg.trials:
        raise DomainError("trial_index out of range")
    block, row = divmod(trial_index, BLOCK)
    anchors, agent = _deployment_block(cfg, block)
    return Deployment(anchors[row].copy(), agent[row].copy(), np.zeros(2))


# --------------------------------------------------------------------------
# SPEB samples
# --------------------------------------------------------------------------


def _speb_at(anchors, points, noise: RangingNoise, unit: float):
    """SPEB (in units of ``unit``) of all anchors evaluated at ``points``.

    ``anchors`` has shape (B, N, 2), ``points`` (B, M, 2); returns (B, M).
    """
    d = anchors[:, None, :, :] - points[:, :, None, :]
    dist = np.hypot(d[..., 0], d[..., 1])
    with np.errstate(invalid="ignore", divide="ignore"):
        c = d[..., 0] / dist
        s = d[..., 1] / dist
    lam = ranging_intensity(noise)
    jxx = lam * np.sum(c * c, axis=-1)
    jyy = lam * np.sum(s * s, axis=-1)
    jxy = lam * np.sum(c * s, axis=-1)
    tr = jxx + jyy
    det = jxx * jyy - jxy * jxy
    with np.errstate(invalid="ignore", divide="ignore"):
        out = tr / det / unit
    bad = ~(det > SINGULAR_RTOL * tr * tr) | ~np.isfinite(out)
    return np.where(bad, np.inf, out)


def _allanchor_block(cfg: TrialConfig, block: int, n: int) -> np.ndarray:
    net = cfg.network
    anchors, agent = _deployment_block(cfg, block)
    anchors, agent = anchors[:n], agent[:n]
    p0 = net.noise.nominal.p0
    if cfg.speb_policy is SpebPolicy.AT_AGENT:
        return _speb_at(anchors, agent[:, None, :], net.noise, p0)[:, 0]

    r = net.small_r
    phi = np.linspace(0.0, 2.0 * math.pi, _BOUNDARY_SAMPLES, endpoint=False)
    ring = np.stack([r * np.cos(phi), r * np.sin(phi)], axis=-1)
    pts = np.concatenate([np.zeros((1, 2)), ring])
    vals = _speb_at(anchors, np.broadcast_to(pts, (n,) + pts.shape), net.noise, p0)
    best = vals.max(axis=1)
    # one local pass around the best boundary sample
    k = np.argmax(vals[:, 1:], axis=1)
    step = phi[1] - phi[0]
    local = phi[k][:, None] + np.linspace(-step, step, _REFINE_SAMPLES)[None, :]
    lpts = np.stack([r * np.cos(local), r * np.sin(local)], axis=-1)
    refined = _speb_at(anchors, lpts, net.noise, p0).max(axis=1)
    return np.maximum(best, refined)


def allanchor_speb_samples(cfg: TrialConfig, workers: int = 1) -> np.ndarray:
    """Per-trial all-anchor SPEB in units of P0 (at the agent or worst over the UR)."""
    parts = _map_blocks(lambda k, n: _allanchor_block(cfg, k, n), cfg.trials, workers)
    return np.concatenate(parts)


def _two_anchor_block(cfg: TrialConfig, selector: Selector, block: int, n: int) -> np.ndarray:
    net = cfg.network
    anchors, _ = _deployment_block(cfg, block)
    anchors = anchors[:n]
    inside = np.hypot(anchors[..., 0], anchors[..., 1]) <= net.small_r
    i, j = pair_indices(net.n_anchors)
    valid = ~(inside[:, i] | inside[:, j])
    worst = worst_case_speb_batch(anchors, np.zeros(2), net.small_r, net.pair_unit)
    worst = np.where(valid, worst, np.inf)
    if selector is Selector.OPTIMAL:
        return worst.min(axis=1)
    bearing = np.arctan2(anchors[..., 1], anchors[..., 0])
    score = np.where(valid, np.sin(bearing[:, i] - bearing[:, j]) ** 2, -1.0)
    pick = np.argmax(score, axis=1)
    return worst[np.arange(n), pick]


def two_anchor_speb_samples(cfg: TrialConfig, selector: Selector = Selector.OPTIMAL, workers: int = 1) -> np.ndarray:
    """Per-trial worst-case SPEB (units of P0) of the selected pair; +inf marks outage."""
    if cfg.network.n_anchors < 2:
        raise DomainError("two-anchor localization needs at least two anchors")
    selector = Selector(selector)
    parts = _map_blocks(lambda k, n: _two_anchor_block(cfg, selector, k, n), cfg.trials, workers)
    return np.concatenate(parts)


def lop_curve(samples: np.ndarray, thresholds: Iterable[float], seed: int) -> list[Estimate]:
    """Outage fractions P{sample > threshold} for each threshold (common random numbers)."""
    n = samples.size
    return [estimate_from_count(int(np.count_nonzero(samples > t)), n, seed) for t in thresholds]


def mc_allanchor_lop(cfg: TrialConfig, workers: int = 1) -> Estimate:
    samples = allanchor_speb_samples(cfg, workers)
    return lop_curve(samples, [cfg.network.threshold_ratio], cfg.seed)[0]


def mc_two_anchor_lop(cfg: TrialConfig, selector: Selector = Selector.OPTIMAL, workers: int = 1) -> Estimate:
    samples = two_anchor_speb_samples(cfg, selector, workers)
    return lop_curve(samples, [cfg.network.threshold_ratio], cfg.seed)[0]


def mc_suboptimal_angle_outside(cfg: TrialConfig, delta: float, workers: int = 1) -> Estimate:
    """P{included angle at the UR center of the sub-optimally selected pair avoids the delta band}."""
    net = cfg.network
    if net.n_anchors < 2:
        raise DomainError("need at least two anchors")
    i, j = pair_indices(net.n_anchors)

    def run(k, n):
        anchors, _ = _deployment_block(cfg, k)
        bearing = np.arctan2(anchors[:n, :, 1], anchors[:n, :, 0])
        diff = bearing[:, i] - bearing[:, j]
        pick = np.argmax(np.sin(diff) ** 2, axis=1)
        chosen = np.abs(diff[np.arange(n), pick]) % (2 * math.pi)
        angle = np.minimum(chosen, 2 * math.pi - chosen)
        return np.count_nonzero(np.abs(angle - 0.5 * math.pi) > delta)

    count = sum(_map_blocks(run, cfg.trials, workers))
    return estimate_from_count(count, cfg.trials, cfg.seed)


# --------------------------------------------------------------------------
# angle, radii and coverage oracles
# --------------------------------------------------------------------------


def mc_p_delta(N: int, delta: float, trials: int, seed: int, workers: int = 1) -> Estimate:
    """Fraction of N uniform bearings whose pairwise included angles all avoid the delta band."""
    if N < 2:
        raise DomainError("N must be >= 2")
    i, j = pair_indices(N)

    def run(k, n):
        th = _rng(seed, _STREAM_BEARINGS, k).random((BLOCK, N))[:n] * (2 * math.pi)
        d = np.abs(th[:, i] - th[:, j])
        angle = np.minimum(d, 2 * math.pi - d)
        return np.count_nonzero(np.all(np.abs(angle - 0.5 * math.pi) > delta, axis=1))

    return estimate_from_count(sum(_map_blocks(run, trials, workers)), trials, seed)


def mc_q_oracle(
    delta: float,
    theta: float,
    geom: GeometryRatio,
    radius_convention: str = "R",
    trials: int = 1_000_000,
    seed: int = 0,
    workers: int = 1,
) -> Estimate:
    """P{r/rho1 + r/rho2 <= sin(dtheta)} for anchor radii uniform in a disk.

    ``radius_convention`` is ``"R"`` (disk of radius R) or ``"R-plus-r"``.
    """
    if radius_convention == "R":
        rmax = geom.big_r
    elif radius_convention == "R-plus-r":
        rmax = geom.big_r + geom.small_r
    else:
        raise DomainError(f"unknown radius convention {radius_convention!r}")
    dth = min(abs(0.5 * math.pi - delta - theta), abs(0.5 * math.pi + delta - theta))
    s = math.sin(dth)
    r = geom.small_r

    def run(k, n):
        u = _rng(seed, _STREAM_RADII, k).random((BLOCK, 2))[:n]
        rho = rmax * np.sqrt(u)
        with np.errstate(divide="ignore"):
            return np.count_nonzero(r / rho[:, 0] + r / rho[:, 1] <= s)

    return estimate_from_count(sum(_map_blocks(run, trials, workers)), trials, seed)


def mc_walk_distance(N: int, trials: int, seed: int, workers: int = 1) -> np.ndarray:
    """Sorted end-to-end distances of N-step unit planar walks with uniform headings."""
    if N < 1:
        raise DomainError("N must be >= 1")

    def run(k, n):
        th = _rng(seed, _STREAM_WALK, k).random((BLOCK, N))[:n] * (2 * math.pi)
        return np.hypot(np.cos(th).sum(axis=1), np.sin(th).sum(axis=1))

    return np.sort(np.concatenate(_map_blocks(run, trials, workers)))


@dataclass(frozen=True)
class CoverageSample:
    """Sorted samples of the covered length with a histogram for plotting."""

    values: np.ndarray
    counts: np.ndarray
    edges: np.ndarray

    def cdf(self, y) -> np.ndarray:
        return np.searchsorted(self.values, y, side="right") / self.values.size

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))


def mc_coverage_length(n: int, L: float, D: float, trials: int, seed: int, bins: int = 100, workers: int = 1) -> CoverageSample:
    """Simulate the measure of the union of n length-D intervals centered uniformly on [0, L]."""
    if n < 0:
        raise DomainError("n must be nonnegative")

    def run(k, m):
        if n == 0:
            return np.zeros(m)
        x = np.sort(_rng(seed, _STREAM_COVERAGE, k).random((BLOCK, n))[:m] * L, axis=1)
        return D + np.minimum(np.diff(x, axis=1), D).sum(axis=1)

    values = np.sort(np.concatenate(_map_blocks(run, trials, workers)))
    hi = max(float(values[-1]), D) if n else 1.0
    counts, edges = np.histogram(values, bins=bins, range=(0.0, hi))
    return CoverageSample(values, counts, edges)
