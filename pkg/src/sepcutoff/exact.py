"""Exact linear algebra for the exclusion process at enumeration scale.

States of Omega_N are indexed by :func:`sepcutoff.lattice.rank`; the
semigroup is evaluated by uniformization with rate bound 2N.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse, stats

from . import spectral
from .lattice import (
    ParticleConfiguration,
    StateDistribution,
    enumerate_states,
    num_states,
    rank,
    rank_many,
    tv_vectors,
    worst_case,
)
from .tilted import TiltedMeasureSpec, a_statistic, tilted_vector

MAX_N = 7


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    half_size: int
    rates: sparse.csr_matrix
    states: np.ndarray

    @property
    def size(self) -> int:
        return self.states.shape[0]

    def dense(self) -> np.ndarray:
        return self.rates.toarray()


def build_generator(n: int) -> GeneratorMatrix:
    """Rate matrix of the exclusion process on Omega_N: rate 1 per swap edge."""
    if not 1 <= n <= MAX_N:
        raise ValueError(f"exact generator limited to 1 <= N <= {MAX_N}")
    states = enumerate_states(n)
    m = 2 * n
    size = states.shape[0]
    rows, cols = [], []
    for x in range(m):
        y = (x + 1) % m
        moved = states[:, x] != states[:, y]
        swapped = states[moved].copy()
        swapped[:, [x, y]] = swapped[:, [y, x]]
        rows.append(np.flatnonzero(moved))
        cols.append(rank_many(swapped))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    off = sparse.coo_matrix((np.ones(rows.size), (rows, cols)), shape=(size, size)).tocsr()
    diag = sparse.diags(-np.asarray(off.sum(axis=1)).ravel())
    return GeneratorMatrix(n, (off + diag).tocsr(), states)


def _poisson_weights(mean: float, tol: float) -> np.ndarray:
    if mean == 0.0:
        return np.ones(1)
    kmax = int(stats.poisson.isf(tol, mean)) + 1
    return stats.poisson.pmf(np.arange(kmax + 1), mean)


def propagate(gen: GeneratorMatrix, v: np.ndarray, t: float, tol: float = 1e-13) -> np.ndarray:
    """e^{tQ} applied to the column(s) of v (Q is symmetric, so rows and columns agree)."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    lam = 2.0 * gen.half_size
    p = sparse.identity(gen.size, format="csr") + gen.rates / lam
    weights = _poisson_weights(lam * t, tol)
    term = np.array(v, dtype=np.float64)
    out = weights[0] * term
    for w in weights[1:]:
        term = p @ term
        out += w * term
    return out


def distribution_at(chi: ParticleConfiguration, t: float, n: int | None = None,
                    gen: GeneratorMatrix | None = None) -> StateDistribution:
    """P^chi_t as an explicit vector."""
    n = chi.half_size if n is None else n
    gen = gen or build_generator(n)
    v = np.zeros(gen.size)
    v[rank(chi)] = 1.0
    p = propagate(gen, v, t)
    return StateDistribution(n, p / p.sum())


def _dihedral_representatives(states: np.ndarray) -> np.ndarray:
    """Smallest rank in each orbit of rotations and reflections of the ring."""
    size, m = states.shape
    best = np.arange(size)
    for flip in (False, True):
        base = states[:, ::-1] if flip else states
        for r in range(m):
            best = np.minimum(best, rank_many(np.roll(base, r, axis=1)))
    return np.unique(best)


@dataclass(frozen=True)
class DistanceProfile:
    t: float
    distance: float
    argmax: ParticleConfiguration


def exact_distance_detail(n: int, t: float, gen: GeneratorMatrix | None = None) -> DistanceProfile:
    if n > 5:
        raise ValueError("d^N(t) is computed exactly only for N <= 5")
    gen = gen or build_generator(n)
    reps = _dihedral_representatives(gen.states)
    v = np.zeros((gen.size, reps.size))
    v[reps, np.arange(reps.size)] = 1.0
    p = propagate(gen, v, t)
    tv = 0.5 * np.abs(p - 1.0 / gen.size).sum(axis=0)
    j = int(np.argmax(tv))
    return DistanceProfile(t, float(tv[j]), ParticleConfiguration(gen.states[reps[j]]))


def exact_distance_profile(n: int, t: float, gen: GeneratorMatrix | None = None) -> float:
    """d^N(t) = max_chi ||P^chi_t - mu_N||_TV."""
    return exact_distance_detail(n, t, gen).distance


@dataclass(frozen=True)
class TiltedComparison:
    t: float
    alpha: float
    tv_tilted: float
    tv_uniform: float


def verify_tilted_approximation(n: int, chi: ParticleConfiguration, t_grid,
                                gen: GeneratorMatrix | None = None) -> list[TiltedComparison]:
    """TV(P^chi_t, nu^{N, b(chi) e^{-lambda_N t}, theta(chi)}) along a time grid."""
    if n > 5:
        raise ValueError("exact comparison limited to N <= 5")
    gen = gen or build_generator(n)
    b = spectral.first_coefficient(chi)
    theta = spectral.phase(chi)
    lam = spectral.eigenvalue(1, n)
    uniform = np.full(gen.size, 1.0 / gen.size)
    rows = []
    for t in t_grid:
        p = distribution_at(chi, t, n, gen).probabilities
        alpha = b * math.exp(-lam * t)
        q = tilted_vector(TiltedMeasureSpec(n, alpha, theta))
        rows.append(TiltedComparison(float(t), alpha, tv_vectors(p, q), tv_vectors(p, uniform)))
    return rows


def tilt_threshold(n: int) -> float:
    """Default start of the tilted-approximation regime, (4/(9 pi^2)) N^2 log N."""
    return 4.0 / (9.0 * math.pi ** 2) * n * n * math.log(n)


def tilted_onset(rows: list[TiltedComparison], level: float = 0.1) -> float:
    """Smallest grid time from which TV to the tilted family stays at or below ``level``.

    Returns inf when the last grid point is still above ``level``.
    """
    onset = math.inf
    for r in reversed(rows):
        if r.tv_tilted > level:
            break
        onset = r.t
    return onset


@dataclass(frozen=True)
class TiltEvolution:
    t: float
    alpha_t: float
    tv: float


def verify_tilt_evolution(n: int, alpha: float, t_grid, theta: float = 0.0,
                          gen: GeneratorMatrix | None = None) -> list[TiltEvolution]:
    """TV(nu^alpha P_t, nu^{alpha e^{-lambda_N t}}) along a time grid."""
    if n > 5:
        raise ValueError("exact comparison limited to N <= 5")
    gen = gen or build_generator(n)
    lam = spectral.eigenvalue(1, n)
    nu0 = tilted_vector(TiltedMeasureSpec(n, alpha, theta))
    rows = []
    for t in t_grid:
        evolved = propagate(gen, nu0, t)
        at = alpha * math.exp(-lam * t)
        rows.append(TiltEvolution(float(t), at, tv_vectors(evolved, tilted_vector(TiltedMeasureSpec(n, at, theta)))))
    return rows


def spectral_gap(n: int, gen: GeneratorMatrix | None = None) -> float:
    """Smallest nonzero eigenvalue of -Q by dense symmetric eigendecomposition."""
    if n > 5:
        raise ValueError("dense spectral gap limited to N <= 5")
    gen = gen or build_generator(n)
    ev = np.sort(np.linalg.eigvalsh(-gen.dense()))
    return float(ev[1])


def expected_a(chi: ParticleConfiguration, t: float, gen: GeneratorMatrix | None = None,
               theta: float | None = None) -> float:
    """E[a_theta(eta_t)] under the exact semigroup, theta defaulting to theta(chi)."""
    gen = gen or build_generator(chi.half_size)
    theta = spectral.phase(chi) if theta is None else theta
    p = distribution_at(chi, t, chi.half_size, gen).probabilities
    return float(p @ a_statistic(gen.states, theta))


def worst_state_distance(n: int, t: float, gen: GeneratorMatrix | None = None) -> float:
    """||P^{chi_max}_t - mu_N||_TV."""
    gen = gen or build_generator(n)
    p = distribution_at(worst_case(n), t, n, gen).probabilities
    return tv_vectors(p, np.full(num_states(n), 1.0 / num_states(n)))
