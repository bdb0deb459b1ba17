"""Configurations on the ring Z_{2N}, height functions and exact distributions.

Sites are labelled 1..2N with cyclic wraparound; arrays store site ``x`` at
index ``x - 1``.  A configuration takes values +1 (particle) and -1 (hole).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def loglog_floor(n: int) -> float:
    """``max(log log n, 1)``; the fluctuation scale used at desk-size n."""
    if n < 3:
        return 1.0
    return max(math.log(math.log(n)), 1.0)


@dataclass(frozen=True, eq=False)
class ParticleConfiguration:
    """A +/-1 occupancy vector on Z_{2N}.

    ``values[x - 1]`` is the occupation of site ``x``.  The particle count is
    cached; :attr:`bits` is the packed form (bit ``x - 1`` set for a particle).
    """

    values: np.ndarray
    particles: int = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1 or v.size == 0 or v.size % 2:
            raise ValueError("configuration must have even positive length 2N")
        if not np.all((v == 1) | (v == -1)):
            raise ValueError("entries must be -1 or +1")
        object.__setattr__(self, "values", _frozen(v.astype(np.int8)))
        object.__setattr__(self, "particles", int(np.count_nonzero(v == 1)))

    @classmethod
    def from_sites(cls, n: int, sites) -> "ParticleConfiguration":
        """Configuration on Z_{2n} with particles at the given 1-based sites."""
        v = -np.ones(2 * n, dtype=np.int8)
        v[np.asarray(list(sites), dtype=np.int64) - 1] = 1
        return cls(v)

    @property
    def half_size(self) -> int:
        return self.values.size // 2

    @property
    def balanced(self) -> bool:
        return self.particles == self.half_size

    @property
    def bits(self) -> int:
        return int(sum(1 << i for i in np.flatnonzero(self.values == 1)))

    def __getitem__(self, x: int) -> int:
        """Occupation of site ``x`` (any integer, read cyclically)."""
        return int(self.values[(x - 1) % self.values.size])

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParticleConfiguration):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash(self.values.tobytes())

    def __repr__(self) -> str:
        s = "".join("+" if v == 1 else "-" for v in self.values)
        return f"ParticleConfiguration(N={self.half_size}, {s})"


@dataclass(frozen=True, eq=False)
class HeightFunction:
    """Integer lattice path xi(1..2N) with unit steps and xi(0) := xi(2N) even."""

    heights: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.heights)
        if h.ndim != 1 or h.size == 0 or h.size % 2:
            raise ValueError("height function must have even positive length 2N")
        h = h.astype(np.int64)
        if h[-1] % 2:
            raise ValueError("xi(0) = xi(2N) must be even")
        if not np.all(np.abs(h - np.roll(h, 1)) == 1):
            raise ValueError("height function must have unit increments")
        object.__setattr__(self, "heights", _frozen(h))

    @property
    def half_size(self) -> int:
        return self.heights.size // 2

    def __getitem__(self, x: int) -> int:
        return int(self.heights[(x - 1) % self.heights.size])

    def __array__(self, dtype=None, copy=None):
        return self.heights if dtype is None else self.heights.astype(dtype)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HeightFunction):
            return NotImplemented
        return np.array_equal(self.heights, other.heights)

    def __hash__(self) -> int:
        return hash(self.heights.tobytes())

    def __le__(self, other: "HeightFunction") -> bool:
        return bool(np.all(self.heights <= other.heights))

    def __ge__(self, other: "HeightFunction") -> bool:
        return bool(np.all(self.heights >= other.heights))

    def shifted(self, offset: int) -> "HeightFunction":
        if offset % 2:
            raise ValueError("vertical shifts must be even")
        return HeightFunction(self.heights + offset)


@dataclass(frozen=True, eq=False)
class StateDistribution:
    """Probability vector over Omega_N, indexed by :func:`rank`."""

    half_size: int
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=np.float64)
        if p.shape != (num_states(self.half_size),):
            raise ValueError(f"expected {num_states(self.half_size)} probabilities, got {p.shape}")
        if np.any(p < -1e-15) or abs(p.sum() - 1.0) > 1e-10:
            raise ValueError("not a probability vector")
        object.__setattr__(self, "probabilities", _frozen(np.clip(p, 0.0, None)))

    @classmethod
    def uniform(cls, n: int) -> "StateDistribution":
        m = num_states(n)
        return cls(n, np.full(m, 1.0 / m))

    @classmethod
    def point_mass(cls, chi: ParticleConfiguration) -> "StateDistribution":
        p = np.zeros(num_states(chi.half_size))
        p[rank(chi)] = 1.0
        return cls(chi.half_size, p)

    def __array__(self, dtype=None, copy=None):
        return self.probabilities


def as_values(eta) -> np.ndarray:
    """Raw +/-1 array for a configuration or array-like."""
    if isinstance(eta, ParticleConfiguration):
        return eta.values
    return np.asarray(eta)


# -- height functions ------------------------------------------------------


def gradient(xi: HeightFunction) -> ParticleConfiguration:
    """Increments eta(x) = xi(x) - xi(x-1), read cyclically."""
    h = xi.heights
    return ParticleConfiguration(h - np.roll(h, 1))


def integrate(chi: ParticleConfiguration, offset: int = 0) -> HeightFunction:
    """Height function xi(x) = offset + sum_{z=1}^{x} chi(z)."""
    if offset % 2:
        raise ValueError("offset must be even so that xi(0) is even")
    if not chi.balanced:
        raise ValueError("only balanced configurations integrate to a height function")
    return HeightFunction(offset + np.cumsum(chi.values, dtype=np.int64))


def worst_case(n: int) -> ParticleConfiguration:
    """chi_max: particles on sites 1..N, holes on N+1..2N."""
    if n < 1:
        raise ValueError("N must be positive")
    return ParticleConfiguration(np.r_[np.ones(n, np.int8), -np.ones(n, np.int8)])


def zigzag(n: int) -> ParticleConfiguration:
    """Alternating configuration (+1, -1, +1, ...)."""
    return ParticleConfiguration(np.tile(np.array([1, -1], np.int8), n))


# -- sampling --------------------------------------------------------------


def uniform_sample(n: int, k: int, rng: np.random.Generator) -> ParticleConfiguration:
    """Uniform configuration on Z_{2n} with exactly k particles."""
    if not 0 <= k <= 2 * n:
        raise ValueError("need 0 <= k <= 2N")
    v = -np.ones(2 * n, dtype=np.int8)
    v[:k] = 1
    return ParticleConfiguration(rng.permutation(v))


def uniform_samples(n: int, k: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent uniform k-particle configurations as an int8 matrix."""
    if not 0 <= k <= 2 * n:
        raise ValueError("need 0 <= k <= 2N")
    v = -np.ones((size, 2 * n), dtype=np.int8)
    v[:, :k] = 1
    return rng.permuted(v, axis=1)


# -- ranking ---------------------------------------------------------------


def num_states(n: int) -> int:
    return math.comb(2 * n, n)


@lru_cache(maxsize=None)
def _binom_table(m: int) -> np.ndarray:
    t = np.zeros((m + 1, m + 2), dtype=np.int64)
    for a in range(m + 1):
        for b in range(a + 1):
            t[a, b] = math.comb(a, b)
    return t


def rank(chi: ParticleConfiguration) -> int:
    """Lexicographic rank of the particle set {x : chi(x) = +1} among N-subsets."""
    if not chi.balanced:
        raise ValueError("rank is defined on balanced configurations")
    m = len(chi)
    k = chi.particles
    r = 0
    for i, v in enumerate(chi.values):
        if k == 0:
            break
        if v == 1:
            k -= 1
        else:
            r += math.comb(m - i - 1, k - 1)
    return r


def unrank(n: int, index: int) -> ParticleConfiguration:
    """Inverse of :func:`rank`."""
    total = num_states(n)
    if not 0 <= index < total:
        raise IndexError(f"index {index} outside [0, {total})")
    m = 2 * n
    k = n
    v = -np.ones(m, dtype=np.int8)
    for i in range(m):
        if k == 0:
            break
        c = math.comb(m - i - 1, k - 1)
        if index < c:
            v[i] = 1
            k -= 1
        else:
            index -= c
    return ParticleConfiguration(v)


def rank_many(values: np.ndarray) -> np.ndarray:
    """Vectorised :func:`rank` over the rows of a balanced +/-1 matrix."""
    values = np.atleast_2d(values)
    m = values.shape[1]
    n = m // 2
    table = _binom_table(m)
    k = np.full(values.shape[0], n, dtype=np.int64)
    r = np.zeros(values.shape[0], dtype=np.int64)
    for i in range(m):
        hole = values[:, i] != 1
        live = k > 0
        add = hole & live
        r[add] += table[m - i - 1, k[add] - 1]
        k[~hole] -= 1
    return r


def enumerate_states(n: int) -> np.ndarray:
    """All balanced configurations, row ``r`` having rank ``r``."""
    m = 2 * n
    out = -np.ones((num_states(n), m), dtype=np.int8)
    for r, sites in enumerate(itertools.combinations(range(m), n)):
        out[r, list(sites)] = 1
    return out


# -- distances and functionals --------------------------------------------


def tv_distance(p: StateDistribution, q: StateDistribution) -> float:
    """Total-variation distance between two distributions on Omega_N."""
    if p.half_size != q.half_size:
        raise ValueError("distributions live on different state spaces")
    return tv_vectors(p.probabilities, q.probabilities)


def tv_vectors(p: np.ndarray, q: np.ndarray) -> float:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError("dimension mismatch")
    return 0.5 * float(np.abs(p - q).sum())


def _site_sin(n: int, theta: float) -> np.ndarray:
    x = np.arange(1, 2 * n + 1)
    return np.sin(np.pi * x / n + theta)


def _deviation_prefix(eta, alpha: float, theta: float, t: float) -> np.ndarray:
    v = as_values(eta).astype(np.float64)
    n = v.size // 2
    lam = 2.0 * (1.0 - math.cos(math.pi / n))
    field = v - alpha * math.exp(-lam * t) * _site_sin(n, theta)
    return np.concatenate(([0.0], np.cumsum(field)))


def max_partial_sum_deviation(eta, alpha: float = 0.0, theta: float = 0.0, t: float = 0.0) -> float:
    """H_{t,alpha}: largest |sum over a cyclic window of (eta - alpha e^{-lambda t} sin)|.

    The summand sums to zero over the ring, so every window sum is a
    difference of two prefix sums and the maximum is max(S) - min(S).
    """
    s = _deviation_prefix(eta, alpha, theta, t)
    return float(s.max() - s.min())


def worst_window(eta, alpha: float = 0.0, theta: float = 0.0, t: float = 0.0) -> tuple[int, int, float]:
    """A window (x, y] attaining :func:`max_partial_sum_deviation`, as 1-based (x, y, value)."""
    s = _deviation_prefix(eta, alpha, theta, t)
    lo, hi = int(np.argmin(s)), int(np.argmax(s))
    return lo, hi, float(s[hi] - s[lo])


def in_fluctuation_set(eta, alpha: float, theta: float = 0.0) -> bool:
    """Membership of G^N_{alpha,theta}: deviation at most sqrt(N) max(log log N, 1)."""
    n = as_values(eta).size // 2
    return max_partial_sum_deviation(eta, alpha, theta, 0.0) <= math.sqrt(n) * loglog_floor(n)
