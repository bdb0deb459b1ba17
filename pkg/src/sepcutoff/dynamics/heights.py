"""Corner-flip dynamics of height functions and the shared-clock grand coupling.

A down-clock ring at (x, xi(x)) flips a local maximum at x, an up-clock ring
flips a local minimum.  Several trajectories driven by one
:class:`~sepcutoff.dynamics.clocks.ClockRealization` keep their pointwise order.

The event loop keeps one pending ring time per (trajectory, site) in an
indexed binary heap.  Only sites that are local extrema have finite entries;
after a flip at x the entries of x - 1, x and x + 1 are recomputed as the first
ring of their new key strictly after the current time.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from ..lattice import HeightFunction
from .clocks import DOWN, UP, ClockRealization, key_code, next_ring

_TRACE_COLS = 5  # time, trajectory, 1-based site, level before, direction


@njit(cache=True, inline="always")
def _corner(h, k, x, m):
    """DOWN for a local maximum, UP for a local minimum, -1 otherwise."""
    left = h[k, x - 1] if x > 0 else h[k, m - 1]
    right = h[k, x + 1] if x + 1 < m else h[k, 0]
    if left != right:
        return -1
    return DOWN if h[k, x] > left else UP


@njit(cache=True)
def _sift_up(heap, where, tm, i):
    s = heap[i]
    v = tm[s]
    while i > 0:
        p = (i - 1) >> 1
        q = heap[p]
        if tm[q] <= v:
            break
        heap[i] = q
        where[q] = i
        i = p
    heap[i] = s
    where[s] = i


@njit(cache=True)
def _sift_down(heap, where, tm, i):
    n = heap.size
    s = heap[i]
    v = tm[s]
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        if c + 1 < n and tm[heap[c + 1]] < tm[heap[c]]:
            c += 1
        q = heap[c]
        if tm[q] >= v:
            break
        heap[i] = q
        where[q] = i
        i = c
    heap[i] = s
    where[s] = i


@njit(cache=True)
def _reschedule(h, k, x, m, t, k0, heap, where, tm):
    d = _corner(h, k, x, m)
    s = k * m + x
    old = tm[s]
    tm[s] = np.inf if d < 0 else next_ring(k0, key_code(d, x, h[k, x]), t)
    if tm[s] < old:
        _sift_up(heap, where, tm, where[s])
    elif tm[s] > old:
        _sift_down(heap, where, tm, where[s])


@njit(cache=True)
def _couple(h, k0, t_end, times, snaps, pairs, lo, hi, stop, trace):
    """Run all rows of ``h`` in place to ``t_end``.

    Returns (events, order violations, tau, trace rows used, final time).
    ``tau`` is the first time rows ``lo`` and ``hi`` have zero area between
    them (inf if never, or if ``lo < 0``).
    """
    ntraj, m = h.shape
    size = ntraj * m
    tm = np.empty(size)
    heap = np.arange(size)
    where = np.arange(size)
    for k in range(ntraj):
        for x in range(m):
            d = _corner(h, k, x, m)
            tm[k * m + x] = np.inf if d < 0 else next_ring(k0, key_code(d, x, h[k, x]), 0.0)
    for i in range(size // 2 - 1, -1, -1):
        _sift_down(heap, where, tm, i)

    area = 0
    tau = np.inf
    if lo >= 0:
        for x in range(m):
            area += h[hi, x] - h[lo, x]
        area //= 2
        if area == 0:
            tau = 0.0
    events = 0
    violations = 0
    ntr = 0
    j = 0
    nt = times.size
    t = 0.0
    group_k = np.empty(size, np.int64)
    group_x = np.empty(size, np.int64)
    ng = 0
    if not (stop and tau == 0.0):
        while True:
            s = heap[0]
            t = tm[s]
            if t > t_end:
                t = t_end
                break
            while j < nt and times[j] < t:
                snaps[:, j, :] = h
                j += 1
            k = s // m
            x = s - k * m
            d = _corner(h, k, x, m)
            if ntr < trace.shape[0]:
                trace[ntr, 0] = t
                trace[ntr, 1] = k
                trace[ntr, 2] = x + 1
                trace[ntr, 3] = h[k, x]
                trace[ntr, 4] = d
                ntr += 1
            step = -2 if d == DOWN else 2
            h[k, x] += step
            events += 1
            if k == hi:
                area += step // 2
            elif k == lo:
                area -= step // 2
            _reschedule(h, k, x - 1 if x > 0 else m - 1, m, t, k0, heap, where, tm)
            _reschedule(h, k, x, m, t, k0, heap, where, tm)
            _reschedule(h, k, x + 1 if x + 1 < m else 0, m, t, k0, heap, where, tm)
            # trajectories sharing the ringing key fire at the same instant;
            # audit only once the whole group has moved
            group_k[ng] = k
            group_x[ng] = x
            ng += 1
            if tm[heap[0]] == t:
                continue
            for g in range(ng):
                kg = group_k[g]
                xg = group_x[g]
                for p in range(pairs.shape[0]):
                    if (pairs[p, 0] == kg or pairs[p, 1] == kg) and h[pairs[p, 0], xg] > h[pairs[p, 1], xg]:
                        violations += 1
            ng = 0
            if lo >= 0 and area == 0 and tau == np.inf:
                tau = t
                if stop:
                    break
    while j < nt:
        snaps[:, j, :] = h
        j += 1
    return events, violations, tau, ntr, t


@njit(cache=True, parallel=True)
def _couple_batch(h, keys, t_end, pairs, lo, hi, stop, tau, violations, events):
    times = np.empty(0)
    for r in prange(h.shape[0]):
        snaps = np.empty((h.shape[1], 0, h.shape[2]), np.int64)
        trace = np.empty((0, _TRACE_COLS))
        e, v, ta, _, _ = _couple(h[r], keys[r], t_end, times, snaps, pairs, lo, hi, stop, trace)
        tau[r] = ta
        violations[r] = v
        events[r] = e


@dataclass(frozen=True, eq=False)
class CouplingTrace:
    """Output of :func:`grand_coupling`.

    ``heights[k, j]`` is trajectory ``k`` at ``sample_times[j]``; ``final`` holds
    the states when the run ended (at ``t_end`` unless stopped at coalescence).
    ``trace`` rows are (time, trajectory, site, level before, direction).
    """

    sample_times: np.ndarray
    heights: np.ndarray
    final: np.ndarray
    events: int
    violations: int
    tau: float
    end_time: float
    trace: np.ndarray

    def states(self, k: int) -> list[HeightFunction]:
        return [HeightFunction(h) for h in self.heights[k]]


def _stack(xi_list) -> np.ndarray:
    rows = [np.asarray(xi.heights if isinstance(xi, HeightFunction) else HeightFunction(xi).heights) for xi in xi_list]
    if not rows:
        raise ValueError("need at least one trajectory")
    if len({r.size for r in rows}) != 1:
        raise ValueError("all height functions must share N")
    return np.array(rows, dtype=np.int64)


def ordered_pairs(h: np.ndarray) -> np.ndarray:
    """All (i, j) with xi_i <= xi_j pointwise and xi_i != xi_j."""
    out = [(i, j) for i, j in itertools.permutations(range(h.shape[0]), 2)
           if np.all(h[i] <= h[j]) and np.any(h[i] != h[j])]
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def grand_coupling(xi_list, t_end: float, clocks: ClockRealization, sample_times=None, *,
                   area_pair: tuple[int, int] | None = None, stop_at_coalescence: bool = False,
                   trace_events: int = 0) -> CouplingTrace:
    """Evolve every height function against the same clocks.

    Order is audited after every event for all initially ordered pairs.
    With ``area_pair=(lo, hi)`` the coalescence time of that pair is reported;
    ``stop_at_coalescence`` ends the run there (no samples are then allowed).
    """
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    h = _stack(xi_list)
    times = np.ascontiguousarray([] if sample_times is None else sample_times, dtype=np.float64)
    if times.size and (np.any(np.diff(times) < 0) or times[0] < 0 or times[-1] > t_end):
        raise ValueError("sample times must be sorted within [0, t_end]")
    lo, hi = (-1, -1) if area_pair is None else area_pair
    if area_pair is not None and not np.all(h[lo] <= h[hi]):
        raise ValueError("area pair must be ordered")
    if stop_at_coalescence and (area_pair is None or times.size):
        raise ValueError("stopping at coalescence needs an area pair and no samples")
    pairs = ordered_pairs(h)
    snaps = np.empty((h.shape[0], times.size, h.shape[1]), np.int64)
    trace = np.empty((trace_events, _TRACE_COLS))
    events, viol, tau, ntr, end = _couple(h, clocks.key, float(t_end), times, snaps, pairs,
                                          lo, hi, stop_at_coalescence, trace)
    return CouplingTrace(times, snaps, h, int(events), int(viol), float(tau), float(end), trace[:ntr])


def simulate_corner_flip(xi: HeightFunction, t_end: float, clocks: ClockRealization,
                         sample_times=None, trace_events: int = 0) -> CouplingTrace:
    """Single corner-flip trajectory; ``heights[0, j]`` is the state at ``sample_times[j]``."""
    return grand_coupling([xi], t_end, clocks, sample_times, trace_events=trace_events)


def coupled_batch(init: np.ndarray, seeds: np.ndarray, t_end: float, area_pair: tuple[int, int],
                  stop_at_coalescence: bool = True):
    """Replica-parallel coupling runs: ``init`` has shape (replica, trajectory, 2N).

    Replica ``r`` uses ``ClockRealization(seeds[r])``.  Returns per-replica
    (tau, order violations, events) and the final heights.
    """
    h = np.array(init, dtype=np.int64)
    if h.ndim != 3:
        raise ValueError("init must be (replica, trajectory, 2N)")
    keys = np.array([ClockRealization(int(s)).key for s in seeds], dtype=np.uint64)
    if keys.size != h.shape[0]:
        raise ValueError("need one seed per replica")
    pairs = ordered_pairs(h[0]) if h.shape[0] else np.empty((0, 2), np.int64)
    for r in range(h.shape[0]):
        if not np.array_equal(ordered_pairs(h[r]), pairs):
            raise ValueError("replicas must share the order pattern of their trajectories")
    lo, hi = area_pair
    if not np.all(h[:, lo] <= h[:, hi]):
        raise ValueError("area pair must be ordered in every replica")
    tau = np.empty(h.shape[0])
    viol = np.empty(h.shape[0], np.int64)
    events = np.empty(h.shape[0], np.int64)
    _couple_batch(h, keys, float(t_end), pairs, lo, hi, stop_at_coalescence, tau, viol, events)
    return tau, viol, events, h
