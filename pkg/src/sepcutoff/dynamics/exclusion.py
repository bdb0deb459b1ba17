"""Event-driven simulation of the symmetric exclusion process on Z_{2N}.

Every edge (x, x+1) swaps its two sites at rate 1.  Swapping equal
neighbours does nothing, so only the active edges (differing neighbours) are
scheduled; the total event rate is the number of active edges.
"""
from __future__ import annotations

import numpy as np
from numba import njit, prange

from ..lattice import ParticleConfiguration, as_values
from .rng import STREAM_EXCLUSION, derive_seed, seed_from_rng, to_unit, xoshiro_next, xoshiro_state


@njit(cache=True)
def _set_edge(e, eta, edges, pos, count):
    f = e + 1
    if f == eta.size:
        f = 0
    on = eta[e] != eta[f]
    if on and pos[e] < 0:
        pos[e] = count
        edges[count] = e
        count += 1
    elif not on and pos[e] >= 0:
        count -= 1
        last = edges[count]
        edges[pos[e]] = last
        pos[last] = pos[e]
        pos[e] = -1
    return count


@njit(cache=True)
def _run_one(eta, seed, times, out):
    m = eta.size
    edges = np.empty(m, np.int64)
    pos = -np.ones(m, np.int64)
    count = 0
    for e in range(m):
        count = _set_edge(e, eta, edges, pos, count)
    nt = times.size
    j = 0
    t = 0.0
    state = xoshiro_state(derive_seed(seed, STREAM_EXCLUSION, 0))
    while j < nt:
        if count == 0:
            break
        ua = to_unit(xoshiro_next(state))
        ub = xoshiro_next(state) >> np.uint64(32)
        t += -np.log1p(-ua) / count
        while j < nt and times[j] < t:
            out[j, :] = eta
            j += 1
        if j >= nt:
            break
        e = edges[(ub * np.uint64(count)) >> np.uint64(32)]
        f = e + 1 if e + 1 < m else 0
        tmp = eta[e]
        eta[e] = eta[f]
        eta[f] = tmp
        count = _set_edge(e - 1 if e > 0 else m - 1, eta, edges, pos, count)
        count = _set_edge(f, eta, edges, pos, count)
    while j < nt:
        out[j, :] = eta
        j += 1


@njit(cache=True, parallel=True)
def _run_batch(init, seeds, times, out):
    for r in prange(init.shape[0]):
        eta = init[r].copy()
        _run_one(eta, seeds[r], times, out[r])


def simulate_exclusion_batch(init: np.ndarray, seeds: np.ndarray, sample_times) -> np.ndarray:
    """Run one trajectory per row of ``init``; returns (replica, time, site) states.

    Replica ``r`` is driven by ``seeds[r]`` alone, so results do not depend on
    how replicas are scheduled across threads.
    """
    init = np.ascontiguousarray(np.atleast_2d(init), dtype=np.int8)
    seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
    times = np.ascontiguousarray(sample_times, dtype=np.float64)
    if seeds.shape != (init.shape[0],):
        raise ValueError("need one seed per replica")
    if times.size and (np.any(np.diff(times) < 0) or times[0] < 0):
        raise ValueError("sample times must be nonnegative and sorted")
    out = np.empty((init.shape[0], times.size, init.shape[1]), dtype=np.int8)
    _run_batch(init, seeds, times, out)
    return out


def simulate_exclusion(chi, t_end: float, rng: np.random.Generator, sample_times=None) -> np.ndarray:
    """Trajectory of the exclusion process from ``chi``.

    Returns the states at ``sample_times`` (default: just ``t_end``) as an
    int8 matrix, one row per time.  Any particle count is allowed.
    """
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    times = np.array([t_end] if sample_times is None else sample_times, dtype=np.float64)
    if np.any(times > t_end):
        raise ValueError("sample times beyond t_end")
    v = np.asarray(as_values(chi), dtype=np.int8)
    seed = np.array([seed_from_rng(rng)], dtype=np.uint64)
    return simulate_exclusion_batch(v[None, :], seed, times)[0]


def final_configuration(chi, t_end: float, rng: np.random.Generator) -> ParticleConfiguration:
    return ParticleConfiguration(simulate_exclusion(chi, t_end, rng)[-1])
