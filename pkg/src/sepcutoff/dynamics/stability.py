"""Stability of the tilted family under the exclusion dynamics."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..lattice import max_partial_sum_deviation
from ..tilted import ConstrainedDPTable, TiltedMeasureSpec
from .exclusion import simulate_exclusion_batch
from .observables import e_membership
from .rng import STREAM_REPLICA, derive_seed, replica_seeds

_STREAM_TILT = np.uint64(0x7117)


@dataclass(frozen=True, eq=False)
class StabilityReport:
    half_size: int
    alpha: float
    t: float
    deviations: np.ndarray  # H_{t, alpha}(eta_t) per replica
    check_times: np.ndarray
    exited: np.ndarray  # replica left E at some check time
    s_grid: np.ndarray  # in units of sqrt(N)
    tail: np.ndarray
    c_fit: float

    @property
    def exits(self) -> int:
        return int(self.exited.sum())

    @property
    def median_scaled(self) -> float:
        return float(np.median(self.deviations) / math.sqrt(self.half_size))


def fit_gaussian_tail(s: np.ndarray, tail: np.ndarray) -> float:
    """Least-squares c in log(tail / 2) = -c s^2 over points with 0 < tail < 1."""
    keep = (tail > 0) & (tail < 1) & (s > 0)
    if not np.any(keep):
        return math.nan
    s2 = s[keep] ** 2
    return float(-(s2 * np.log(tail[keep] / 2)).sum() / (s2 * s2).sum())


def tilted_stability_check(n: int, alpha: float, t: float, n_runs: int, seed: int,
                           checks: int = 64, s_grid=None) -> StabilityReport:
    """Evolve ``n_runs`` draws of nu^{N,alpha,0} to time t.

    Reports the deviations H_{t,alpha}(eta_t) with their empirical tail in
    units of sqrt(N) and whether each replica is outside E at any of
    ``checks + 1`` equally spaced times in [0, t].
    """
    if abs(alpha) > n ** -0.25 * (1 + 1e-12):
        warnings.warn(f"|alpha|={alpha:.4g} exceeds N^(-1/4)", stacklevel=2)
    if n_runs < 1 or t < 0:
        raise ValueError("need n_runs >= 1 and t >= 0")
    spec = TiltedMeasureSpec(n, alpha, 0.0)
    rng = np.random.default_rng(int(derive_seed(np.uint64(seed), _STREAM_TILT, 0)))
    init = ConstrainedDPTable(spec).sample(n_runs, rng)
    times = np.linspace(0.0, t, checks + 1)
    seeds = replica_seeds(seed, n_runs, STREAM_REPLICA)
    traj = simulate_exclusion_batch(init, seeds, times)
    exited = np.array([not all(e_membership(s) for s in run) for run in traj])
    dev = np.array([max_partial_sum_deviation(run[-1], alpha, 0.0, t) for run in traj])
    s_grid = np.linspace(0.25, 4.0, 16) if s_grid is None else np.asarray(s_grid, dtype=np.float64)
    tail = (dev[None, :] >= s_grid[:, None] * math.sqrt(n)).mean(axis=1)
    return StabilityReport(n, alpha, t, dev, times, exited, s_grid, tail, fit_gaussian_tail(s_grid, tail))
