"""Fourier modes of the ring, the discrete heat equation and cutoff profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ModeProjection:
    """Phase and amplitude of one Fourier mode.

    For ``mode < N`` the mode contributes ``coefficient * sin(mode*pi*x/N + phase)``;
    the alternating mode ``mode == N`` contributes ``coefficient * (-1)**x``.
    """

    mode: int
    phase: float
    coefficient: float


@dataclass(frozen=True, eq=False)
class DensityField:
    """Zero-sum real field on Z_{2N}, e.g. the expected particle density."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size % 2:
            raise ValueError("field must have even length 2N")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def half_size(self) -> int:
        return self.values.size // 2

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def _field(u) -> np.ndarray:
    return np.asarray(u, dtype=np.float64)


def eigenvalue(i: int, n: int) -> float:
    """lambda_{i,N} = 2(1 - cos(i pi / N)); the spectral gap is ``eigenvalue(1, N)``."""
    if not 1 <= i <= n:
        raise ValueError(f"mode {i} outside 1..{n}")
    return 2.0 * (1.0 - math.cos(i * math.pi / n))


def spectral_gap_formula(n: int) -> float:
    return eigenvalue(1, n)


def _mode_arrays(u: np.ndarray):
    m = u.size
    n = m // 2
    x = np.arange(1, m + 1)
    i = np.arange(1, n)
    arg = np.pi * np.outer(i, x) / n
    c = np.cos(arg) @ u
    s = np.sin(arg) @ u
    eps = 1e-12 * max(1.0, np.abs(u).max(initial=0.0))
    # round-off in a vanishing projection would otherwise push the phase to 2 pi
    c = np.where(np.abs(c) <= eps, 0.0, c)
    s = np.where(np.abs(s) <= eps, 0.0, s)
    amp = np.hypot(c, s)
    tiny = amp <= eps
    phase = np.mod(np.where(tiny, 0.0, np.arctan2(c, s)), TWO_PI)
    phase[phase >= TWO_PI] = 0.0
    coef = np.where(tiny, 0.0, amp / n)
    alt = float(np.dot((-1.0) ** x, u) / m)
    return phase, coef, alt


def fourier_decompose(chi) -> list[ModeProjection]:
    """All modes 1..N of a balanced configuration or zero-sum field.

    The phase solves sum chi(x) cos(i pi x/N + theta) = 0 with the matching
    sine sum positive, i.e. theta = atan2(cos-projection, sin-projection).
    """
    u = _field(chi)
    phase, coef, alt = _mode_arrays(u)
    modes = [ModeProjection(i + 1, float(p), float(b)) for i, (p, b) in enumerate(zip(phase, coef))]
    modes.append(ModeProjection(u.size // 2, 0.0, alt))
    return modes


def synthesize(modes: list[ModeProjection], n: int, decay_time: float = 0.0) -> np.ndarray:
    """Rebuild the field from its modes, each damped by exp(-lambda_{i,N} t)."""
    x = np.arange(1, 2 * n + 1)
    out = np.zeros(2 * n)
    for m in modes:
        w = math.exp(-eigenvalue(m.mode, n) * decay_time)
        if m.mode == n:
            out += w * m.coefficient * (-1.0) ** x
        else:
            out += w * m.coefficient * np.sin(m.mode * np.pi * x / n + m.phase)
    return out


def phase(chi) -> float:
    """theta(chi), the phase of the slowest mode."""
    p, _, _ = _mode_arrays(_field(chi))
    return float(p[0]) if p.size else 0.0


def first_coefficient(chi) -> float:
    """b(chi), the amplitude of the slowest mode."""
    _, b, _ = _mode_arrays(_field(chi))
    return float(b[0]) if b.size else 0.0


def heat_solve(u0, t: float) -> DensityField:
    """Exact solution at time t of du/dt = u(x+1) + u(x-1) - 2u(x) on the ring."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    u = _field(u0)
    n = u.size // 2
    return DensityField(synthesize(fourier_decompose(u), n, t))


def laplacian(u: np.ndarray) -> np.ndarray:
    return np.roll(u, 1) + np.roll(u, -1) - 2.0 * u


def sinusoid_residual(chi, t: float) -> float:
    """max_x |u^chi(x,t) - e^{-lambda_N t} b(chi) sin(pi x/N + theta(chi))|."""
    u = _field(chi)
    n = u.size // 2
    x = np.arange(1, 2 * n + 1)
    main = math.exp(-eigenvalue(1, n) * t) * first_coefficient(u) * np.sin(np.pi * x / n + phase(u))
    return float(np.abs(heat_solve(u, t).values - main).max())


def mixing_schedule(n: int, s: float) -> float:
    """t_{s,N} = N^2/(2 pi^2) log N + N^2/pi^2 s."""
    if n < 2:
        raise ValueError("N must be at least 2")
    return n * n / (2 * math.pi ** 2) * math.log(n) + n * n / math.pi ** 2 * s


def cutoff_profile(s: float) -> float:
    """Limiting distance erf(sqrt(2)/pi e^{-s}) at N particles on 2N sites."""
    return math.erf(math.sqrt(2.0) / math.pi * math.exp(-s))


def cutoff_profile_density(s: float, alpha: float) -> float:
    """Profile for ceil(alpha N) particles; alpha = 1 recovers :func:`cutoff_profile`."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    amp = math.sin(alpha * math.pi / 2) / (math.pi * math.sqrt(alpha * (1 - alpha / 2)))
    return math.erf(amp * math.exp(-s))


def cutoff_profile_sparse(s: float) -> float:
    """Profile erf(e^{-s}/2) for 1 << k_N << N particles."""
    return math.erf(0.5 * math.exp(-s))
