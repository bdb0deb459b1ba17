"""Poisson clocks indexed by (direction, site, level), realized on demand.

Time is cut into unit blocks.  For a key with code ``k`` the block ``b`` is
described by Philox words at counter ``(b, j, 0, 0)`` under the key
``(seed, k)``: the first word of ``j = 0`` gives the Poisson(1) number of rings
in ``[b, b + 1)`` by inversion and the remaining words give their uniform
positions.  Blocks of distinct keys are independent, so the first ring after
any time can be found without replaying earlier events.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .rng import STREAM_CLOCKS, derive_seed, philox4x64, to_unit

DOWN = 0  # flips local maxima
UP = 1  # flips local minima

_LEVEL_BIAS = 1 << 31
_SITE_BITS = 21
_EXP_M1 = math.exp(-1.0)


@njit(cache=True, inline="always")
def key_code(direction, x, z):
    """Injective encoding of (direction, 0-based site, level) into 64 bits."""
    return ((np.uint64(z + _LEVEL_BIAS) << np.uint64(_SITE_BITS)) | np.uint64(x)) << np.uint64(1) | np.uint64(direction)


@njit(cache=True)
def _poisson1(u):
    k = 0
    p = _EXP_M1
    cdf = p
    while u >= cdf and k < 40:
        k += 1
        p /= k
        cdf += p
    return k


@njit(cache=True)
def _block_first_after(k0, code, b, t):
    """Smallest ring of block ``b`` strictly after ``t`` (inf if none)."""
    w0, w1, w2, w3 = philox4x64(k0, code, np.uint64(b), np.uint64(0), np.uint64(0), np.uint64(0))
    c = _poisson1(to_unit(w0))
    base = float(b)
    best = np.inf
    if c > 0:
        p = base + to_unit(w1)
        if t < p < best:
            best = p
    if c > 1:
        p = base + to_unit(w2)
        if t < p < best:
            best = p
    if c > 2:
        p = base + to_unit(w3)
        if t < p < best:
            best = p
    left = c - 3
    j = 1
    while left > 0:
        v0, v1, v2, v3 = philox4x64(k0, code, np.uint64(b), np.uint64(j), np.uint64(0), np.uint64(0))
        for i in range(min(left, 4)):
            w = v0 if i == 0 else (v1 if i == 1 else (v2 if i == 2 else v3))
            p = base + to_unit(w)
            if t < p < best:
                best = p
        left -= 4
        j += 1
    return best


@njit(cache=True)
def next_ring(k0, code, t):
    """First ring of the clock ``code`` strictly after time ``t >= 0``."""
    b = int(math.floor(t))
    while True:
        r = _block_first_after(k0, code, b, t)
        if r < np.inf:
            return r
        b += 1


@njit(cache=True)
def _block_rings(k0, code, b):
    w0, w1, w2, w3 = philox4x64(k0, code, np.uint64(b), np.uint64(0), np.uint64(0), np.uint64(0))
    c = _poisson1(to_unit(w0))
    out = np.empty(c)
    first = (w1, w2, w3)
    for i in range(min(c, 3)):
        out[i] = b + to_unit(first[i])
    left = c - 3
    j = 1
    i = 3
    while left > 0:
        v = philox4x64(k0, code, np.uint64(b), np.uint64(j), np.uint64(0), np.uint64(0))
        for q in range(min(left, 4)):
            out[i] = b + to_unit(v[q])
            i += 1
        left -= 4
        j += 1
    return out


@dataclass(frozen=True)
class ClockKey:
    """Clock index: ``direction`` is :data:`UP` or :data:`DOWN`, ``x`` a 1-based site."""

    direction: int
    x: int
    z: int

    def __post_init__(self):
        if self.direction not in (UP, DOWN):
            raise ValueError("direction must be UP or DOWN")
        if (self.z - self.x) % 2:
            raise ValueError("a corner at site x sits at a level with the parity of x")

    @property
    def code(self) -> np.uint64:
        return np.uint64(key_code(self.direction, self.x - 1, self.z))


class ClockRealization:
    """All clocks of one graphical construction, as a pure function of a seed.

    Nothing is consumed: every query recomputes the relevant blocks, so any
    number of trajectories observe identical ring times for each key.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.key = np.uint64(derive_seed(np.uint64(self.seed), STREAM_CLOCKS, 0))

    def __repr__(self) -> str:
        return f"ClockRealization(seed={self.seed:#x})"

    def ring_times(self, key: ClockKey, t_end: float, t_start: float = 0.0) -> np.ndarray:
        """Sorted ring times of ``key`` in ``(t_start, t_end]``."""
        code = key.code
        blocks = [_block_rings(self.key, code, b) for b in range(int(math.floor(t_start)), int(math.floor(t_end)) + 1)]
        r = np.sort(np.concatenate(blocks)) if blocks else np.empty(0)
        return r[(r > t_start) & (r <= t_end)]

    def next_ring(self, key: ClockKey, t: float) -> float:
        if t < 0:
            raise ValueError("time must be nonnegative")
        return float(next_ring(self.key, key.code, float(t)))
