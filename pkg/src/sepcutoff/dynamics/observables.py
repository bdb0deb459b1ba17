"""Observables of coupled height-function trajectories."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..lattice import HeightFunction, as_values, gradient, max_partial_sum_deviation


def _h(xi) -> np.ndarray:
    return np.asarray(xi.heights if isinstance(xi, HeightFunction) else xi, dtype=np.int64)


def area(lower, upper) -> int:
    """A = (1/2) sum_x (upper(x) - lower(x)); an integer for same-N height functions."""
    d = (_h(upper) - _h(lower)).sum()
    if d % 2:
        raise ValueError("height functions of different parity classes")
    return int(d // 2)


def local_extrema(xi) -> np.ndarray:
    """Boolean mask of sites where xi has a local maximum or minimum."""
    h = _h(xi)
    return np.roll(h, 1) == np.roll(h, -1)


def active_extrema(lower, upper) -> int:
    """u = #U_1 + #U_2: extrema of either path within distance 1 of a site where they differ."""
    lo, hi = _h(lower), _h(upper)
    gap = hi > lo
    near = gap | np.roll(gap, 1) | np.roll(gap, -1)
    return int((local_extrema(lo) & near).sum() + (local_extrema(hi) & near).sum())


def jump_count(eta, x: int, y: int) -> int:
    """j(x, y, eta): sites z of the cyclic interval [x, y] with eta(z) != eta(z+1)."""
    v = as_values(eta)
    m = v.size
    length = (y - x) % m + 1
    return sum(int(v[(z - 1) % m] != v[z % m]) for z in range(x, x + length))


def min_window(n: int) -> int:
    """Shortest window length subject to the density condition, ceil(N^{1/4})."""
    return math.ceil(n ** 0.25 - 1e-12)


def e_membership(eta, method: str = "prefix") -> bool:
    """eta in E: every cyclic window of length >= N^{1/4} has j >= length/4.

    ``method="brute"`` evaluates :func:`jump_count` window by window and is
    kept as an oracle for the prefix-sum version.
    """
    v = np.asarray(as_values(eta))
    m = v.size
    lmin = min_window(m // 2)
    if method == "brute":
        return all(4 * jump_count(v, x, x + length - 1) >= length
                   for length in range(lmin, m + 1) for x in range(1, m + 1))
    if method != "prefix":
        raise ValueError(f"unknown method {method!r}")
    d = (v != np.roll(v, -1)).astype(np.int64)
    c = np.concatenate(([0], np.cumsum(np.concatenate((d, d)))))
    lengths = np.arange(lmin, m + 1)
    starts = np.arange(m)
    j = c[starts[None, :] + lengths[:, None]] - c[starts[None, :]]
    return bool(np.all(4 * j >= lengths[:, None]))


def fluctuation(state, alpha: float = 0.0, theta: float = 0.0, t: float = 0.0) -> float:
    """H_{t, alpha} of a configuration or of the gradient of a height function."""
    eta = gradient(state) if isinstance(state, HeightFunction) else state
    return max_partial_sum_deviation(eta, alpha, theta, t)


def envelope(lower, upper, alpha: float, theta: float, t: float) -> float:
    """max(H(lower) + H(upper), sqrt N) at time t."""
    lo, hi = HeightFunction(_h(lower)), HeightFunction(_h(upper))
    n = lo.half_size
    return max(fluctuation(lo, alpha, theta, t) + fluctuation(hi, alpha, theta, t), math.sqrt(n))


@dataclass(frozen=True, eq=False)
class TrajectoryObservables:
    half_size: int
    sample_times: np.ndarray
    area: np.ndarray
    active: np.ndarray
    fluctuation: np.ndarray  # H of the lower path
    envelope: np.ndarray
    in_e: np.ndarray  # lower path's gradient in E
    tau: float

    def jump_rate_bound_holds(self) -> np.ndarray:
        """u >= (1/8) min(N, A / envelope) at each sample (vacuous where the lower path leaves E)."""
        bound = np.minimum(self.half_size, self.area / self.envelope)
        return ~self.in_e | (8 * self.active >= bound)


def observables(trace, lower: int, upper: int, alpha: float = 0.0, theta: float = 0.0) -> TrajectoryObservables:
    """Area, active extrema, fluctuation, envelope and E flags at the sampled times of a coupling run."""
    hs = trace.heights
    nt = trace.sample_times.size
    n = hs.shape[2] // 2
    a = np.empty(nt, np.int64)
    u = np.empty(nt, np.int64)
    fl = np.empty(nt)
    env = np.empty(nt)
    ine = np.empty(nt, dtype=bool)
    for j, t in enumerate(trace.sample_times):
        lo, hi = hs[lower, j], hs[upper, j]
        a[j] = area(lo, hi)
        u[j] = active_extrema(lo, hi)
        eta = gradient(HeightFunction(lo))
        fl[j] = fluctuation(eta, alpha, theta, t)
        env[j] = envelope(lo, hi, alpha, theta, t)
        ine[j] = e_membership(eta)
    return TrajectoryObservables(n, trace.sample_times, a, u, fl, env, ine, trace.tau)
