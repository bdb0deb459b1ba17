"""The exponentially tilted measure nu^{N,alpha,theta} on Omega_N.

nu has density exp(alpha a_theta(eta)) / mu_N(exp(alpha a_theta)) with respect to
the uniform measure, where a_theta(eta) = sum_x eta(x) sin(pi x/N + theta).
Because the density factorises over sites, conditioning on the particle count
turns every exact computation into a dynamic programme over
(site, particles still to place), carried out in log space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from .lattice import ParticleConfiguration, as_values, enumerate_states, uniform_samples

_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class TiltedMeasureSpec:
    half_size: int
    alpha: float
    theta: float = 0.0

    def __post_init__(self):
        if self.half_size < 1:
            raise ValueError("N must be positive")
        if not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite")
        if not 0.0 <= self.theta < 2 * math.pi:
            raise ValueError("theta must lie in [0, 2 pi)")

    @property
    def weights(self) -> np.ndarray:
        """sin(pi x/N + theta) for x = 1..2N."""
        n = self.half_size
        return np.sin(np.pi * np.arange(1, 2 * n + 1) / n + self.theta)


def a_statistic(eta, theta: float = 0.0) -> np.ndarray | float:
    """sum_x eta(x) sin(pi x/N + theta); rows of a matrix are treated as samples."""
    v = np.asarray(as_values(eta), dtype=np.float64)
    n = v.shape[-1] // 2
    w = np.sin(np.pi * np.arange(1, 2 * n + 1) / n + theta)
    out = v @ w
    return float(out) if np.ndim(out) == 0 else out


def _log_binom(m: int, k: int) -> float:
    return math.lgamma(m + 1) - math.lgamma(k + 1) - math.lgamma(m - k + 1)


class ConstrainedDPTable:
    """Log partial partition functions of the tilted product weight.

    ``suffix[i, m + 1]`` is log sum over +/-1 assignments of the sites
    i+1..2N (1-based) containing exactly m particles of
    exp(alpha sum_z eta(z) sin(pi z/N + theta)); column 0 is a -inf guard so
    that ``m - 1`` never needs special casing.
    """

    def __init__(self, spec: TiltedMeasureSpec):
        self.spec = spec
        n = spec.half_size
        m = 2 * n
        self.field = spec.alpha * spec.weights
        tbl = np.full((m + 1, n + 2), -np.inf)
        tbl[m, 1] = 0.0
        for i in range(m - 1, -1, -1):
            w = self.field[i]
            tbl[i, 1:] = np.logaddexp(w + tbl[i + 1, :-1], -w + tbl[i + 1, 1:])
        self.suffix = tbl

    @property
    def log_total(self) -> float:
        """log sum over Omega_N of exp(alpha a_theta)."""
        n = self.spec.half_size
        return float(self.suffix[0, n + 1])

    @cached_property
    def prefix(self) -> np.ndarray:
        """``prefix[i, m + 1]``: same sum over sites 1..i."""
        n = self.spec.half_size
        m = 2 * n
        tbl = np.full((m + 1, n + 2), -np.inf)
        tbl[0, 1] = 0.0
        for i in range(m):
            w = self.field[i]
            tbl[i + 1, 1:] = np.logaddexp(w + tbl[i, :-1], -w + tbl[i, 1:])
        return tbl

    def marginals(self) -> np.ndarray:
        """nu(eta(x)) for every site, via forward and backward tables."""
        n = self.spec.half_size
        pre = self.prefix[:-1, 1 : n + 1]
        suf = self.suffix[1:, 1 : n + 1][:, ::-1]
        log_plus = logsumexp(pre + suf, axis=1) + self.field - self.log_total
        return 2.0 * np.exp(log_plus) - 1.0

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Exact draws of nu by sequential site-by-site conditioning."""
        n = self.spec.half_size
        tbl = self.suffix
        out = np.empty((size, 2 * n), dtype=np.int8)
        left = np.full(size, n, dtype=np.int64)
        for i in range(2 * n):
            p = np.exp(self.field[i] + tbl[i + 1, left] - tbl[i, left + 1])
            plus = rng.random(size) < p
            out[:, i] = np.where(plus, 1, -1)
            left -= plus
        return out


def dp_table(spec: TiltedMeasureSpec) -> ConstrainedDPTable:
    return ConstrainedDPTable(spec)


def log_partition(spec: TiltedMeasureSpec, table: ConstrainedDPTable | None = None) -> float:
    """log mu_N(exp(alpha a_theta))."""
    table = table or ConstrainedDPTable(spec)
    n = spec.half_size
    return table.log_total - _log_binom(2 * n, n)


def exact_sample(spec: TiltedMeasureSpec, rng: np.random.Generator,
                 table: ConstrainedDPTable | None = None) -> ParticleConfiguration:
    table = table or ConstrainedDPTable(spec)
    return ParticleConfiguration(table.sample(1, rng)[0])


def exact_samples(spec: TiltedMeasureSpec, size: int, rng: np.random.Generator,
                  table: ConstrainedDPTable | None = None) -> np.ndarray:
    table = table or ConstrainedDPTable(spec)
    return table.sample(size, rng)


def marginal(spec: TiltedMeasureSpec, x: int, table: ConstrainedDPTable | None = None) -> float:
    """nu^{N,alpha,theta}(eta(x)) at a 1-based site x."""
    table = table or ConstrainedDPTable(spec)
    return float(table.marginals()[(x - 1) % (2 * spec.half_size)])


def marginals(spec: TiltedMeasureSpec, table: ConstrainedDPTable | None = None) -> np.ndarray:
    table = table or ConstrainedDPTable(spec)
    return table.marginals()


def tilted_vector(spec: TiltedMeasureSpec) -> np.ndarray:
    """nu as an explicit probability vector over ranked Omega_N (small N only)."""
    states = enumerate_states(spec.half_size)
    la = spec.alpha * a_statistic(states, spec.theta)
    return np.exp(la - logsumexp(la))


@dataclass(frozen=True)
class TVEstimate:
    value: float
    stderr: float
    samples: int  # 0 for exact enumeration


def tv_to_uniform(spec: TiltedMeasureSpec, method: str = "exact", n: int = 0,
                  rng: np.random.Generator | None = None) -> TVEstimate:
    """Total-variation distance between nu^{N,alpha,theta} and mu_N.

    ``method="exact"`` enumerates Omega_N (N <= 6).  ``method="monte_carlo"``
    averages (1/2)|density - 1| over ``n`` exact uniform draws.
    """
    N = spec.half_size
    if method == "exact":
        if N > 6:
            raise ValueError("exact TV needs N <= 6")
        p = tilted_vector(spec)
        return TVEstimate(0.5 * float(np.abs(p * p.size - 1.0).mean()), 0.0, 0)
    if method != "monte_carlo":
        raise ValueError(f"unknown method {method!r}")
    if n < 2 or rng is None:
        raise ValueError("monte_carlo needs n >= 2 and an rng")
    logz = log_partition(spec)
    vals = np.empty(n)
    chunk = max(1, _CHUNK_ELEMENTS // (2 * N))
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        a = a_statistic(uniform_samples(N, N, hi - lo, rng), spec.theta)
        vals[lo:hi] = 0.5 * np.abs(np.exp(spec.alpha * a - logz) - 1.0)
    return TVEstimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n)), n)


def uniform_a_samples(n_half: int, theta: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """a_theta(eta) for ``size`` uniform balanced configurations."""
    out = np.empty(size)
    chunk = max(1, _CHUNK_ELEMENTS // (2 * n_half))
    for lo in range(0, size, chunk):
        hi = min(size, lo + chunk)
        out[lo:hi] = a_statistic(uniform_samples(n_half, n_half, hi - lo, rng), theta)
    return out


def clt_check(n_half: int, theta: float, n: int, rng: np.random.Generator) -> float:
    """Kolmogorov-Smirnov distance between a_theta/sqrt(N) under mu_N and N(0, 1)."""
    if n < 10_000:
        raise ValueError("the CLT check wants at least 1e4 samples")
    z = uniform_a_samples(n_half, theta, n, rng) / math.sqrt(n_half)
    return float(stats.kstest(z, "norm").statistic)


def exact_a_moments(n_half: int, theta: float) -> tuple[float, float]:
    """mu_N(a_theta) and mu_N(a_theta^2) by enumeration."""
    a = a_statistic(enumerate_states(n_half), theta)
    return float(a.mean()), float((a * a).mean())


# -- concentration ----------------------------------------------------------


def wilson_interval(hits: int, n: int, z: float = 2.5758293035489004) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (default 99%)."""
    p = hits / n
    den = 1 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return max(0.0, mid - half), min(1.0, mid + half)


@dataclass(frozen=True)
class TailReport:
    s_grid: np.ndarray
    empirical: np.ndarray
    wilson_low: np.ndarray
    bound: np.ndarray
    samples: int

    @property
    def passed(self) -> bool:
        return bool(np.all(self.wilson_low <= self.bound))


def lipschitz_tail_check(functional: str = "a_theta", distribution: str = "uniform", *,
                         n_half: int, n: int, rng: np.random.Generator, theta: float = 0.0,
                         width: int | None = None, alpha: float = 0.0, lipschitz: float = 1.0,
                         s_grid=None) -> TailReport:
    """Empirical tails of a Lipschitz functional against the Azuma-type bound.

    ``functional`` is ``"a_theta"`` (depends on all 2N sites, bound uses 2N-1)
    or ``"window"`` (sum of eta over sites 1..width, bound uses width).
    Samples come from mu_N or, with ``distribution="tilted"``, from
    nu^{N,alpha,theta}; centring uses the exact mean in either case.
    """
    N = n_half
    if functional == "a_theta":
        cells = 2 * N - 1
        w = np.sin(np.pi * np.arange(1, 2 * N + 1) / N + theta)
    elif functional == "window":
        if width is None or not 1 <= width <= 2 * N:
            raise ValueError("window functional needs 1 <= width <= 2N")
        cells = width
        w = np.zeros(2 * N)
        w[:width] = 1.0
    else:
        raise ValueError(f"unknown functional {functional!r}")

    if distribution == "uniform":
        mean = 0.0
        draw = lambda size: uniform_samples(N, N, size, rng)  # noqa: E731
    elif distribution == "tilted":
        spec = TiltedMeasureSpec(N, alpha, theta)
        table = ConstrainedDPTable(spec)
        mean = float(table.marginals() @ w)
        draw = lambda size: table.sample(size, rng)  # noqa: E731
    else:
        raise ValueError(f"unknown distribution {distribution!r}")

    scale = math.sqrt(8 * cells) * lipschitz
    if s_grid is None:
        s_grid = scale * np.linspace(0.0, 3.0, 13)
    s_grid = np.asarray(s_grid, dtype=np.float64)

    dev = np.empty(n)
    chunk = max(1, _CHUNK_ELEMENTS // (2 * N))
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        dev[lo:hi] = np.abs(draw(hi - lo) @ w - mean)
    hits = (dev[None, :] >= s_grid[:, None]).sum(axis=1)
    emp = hits / n
    low = np.array([wilson_interval(int(h), n)[0] for h in hits])
    bound = 2.0 * np.exp(-(s_grid ** 2) / (scale ** 2))
    return TailReport(s_grid, emp, low, bound, n)
