"""The coupled triple xi^1 <= xi^0 <= xi^2 and coalescence experiments."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..lattice import (
    HeightFunction,
    ParticleConfiguration,
    integrate,
    loglog_floor,
    max_partial_sum_deviation,
    worst_window,
)
from ..tilted import ConstrainedDPTable, TiltedMeasureSpec
from .clocks import ClockRealization
from .heights import CouplingTrace, coupled_batch, grand_coupling
from .rng import derive_seed, replica_seeds

STREAM_START = np.uint64(0x57A7)

LOWER, MIDDLE, UPPER = 0, 1, 2


class FluctuationError(ValueError):
    """The starting configuration is outside the fluctuation set G."""

    def __init__(self, window: tuple[int, int, float], limit: float):
        self.window = window
        self.limit = limit
        x, y, v = window
        super().__init__(f"window ({x}, {y}] deviates by {v:.3f} > {limit:.3f}")


def fluctuation_limit(n: int) -> float:
    return math.sqrt(n) * loglog_floor(n)


def offset_height(eta0, alpha: float, theta: float) -> int:
    """Even height shift 2 ceil((H_{0,alpha}(eta0) + sqrt N loglog N) / 2)."""
    v = np.asarray(eta0.values if isinstance(eta0, ParticleConfiguration) else eta0)
    n = v.size // 2
    h0 = max_partial_sum_deviation(v, alpha, theta, 0.0)
    return 2 * math.ceil((h0 + fluctuation_limit(n)) / 2 - 1e-12)


def coalescence_horizon(n: int) -> float:
    """N^2 sqrt(log N)."""
    return n * n * math.sqrt(math.log(n))


def alpha_ceiling(n: int) -> float:
    """Largest tilt covered by the coalescence estimate, 2 N^{-3/7}."""
    return 2.0 * n ** (-3.0 / 7.0)


def _check_g(chi: ParticleConfiguration, alpha: float, theta: float) -> None:
    n = chi.half_size
    lim = fluctuation_limit(n)
    x, y, v = worst_window(chi, alpha, theta, 0.0)
    if v > lim:
        raise FluctuationError((x, y, v), lim)


@dataclass(frozen=True, eq=False)
class CoupledTriple:
    lower: HeightFunction
    middle: HeightFunction
    upper: HeightFunction
    clocks: ClockRealization
    eta0: ParticleConfiguration
    shift: int
    spec: TiltedMeasureSpec
    elapsed: float = 0.0

    @property
    def paths(self) -> list[HeightFunction]:
        return [self.lower, self.middle, self.upper]

    @property
    def initial_area(self) -> int:
        return int((self.upper.heights - self.lower.heights).sum() // 2)

    def run(self, t_end: float, sample_times=None, stop_at_coalescence: bool = False,
            trace_events: int = 0) -> CouplingTrace:
        """Drive the three paths with the shared clocks; the area pair is (lower, upper)."""
        return grand_coupling(self.paths, t_end, self.clocks, sample_times,
                              area_pair=(LOWER, UPPER), stop_at_coalescence=stop_at_coalescence,
                              trace_events=trace_events)


def coupled_triple_from(chi: ParticleConfiguration, eta0: ParticleConfiguration,
                        spec: TiltedMeasureSpec, clocks: ClockRealization,
                        shift: int | None = None) -> CoupledTriple:
    """Triple from a given eta0; ``shift`` defaults to :func:`offset_height`."""
    if chi.half_size != spec.half_size or eta0.half_size != spec.half_size:
        raise ValueError("configurations and measure must share N")
    _check_g(chi, spec.alpha, spec.theta)
    if shift is None:
        shift = offset_height(eta0, spec.alpha, spec.theta)
    if shift % 2:
        raise ValueError("shift must be even")
    base = integrate(eta0, 0)
    lower, middle, upper = base.shifted(-shift), integrate(chi, 0), base.shifted(shift)
    if not (lower <= middle <= upper):
        raise AssertionError("triple is not ordered")
    return CoupledTriple(lower, middle, upper, clocks, eta0, shift, spec)


def build_coupled_triple(chi: ParticleConfiguration, spec: TiltedMeasureSpec, clocks: ClockRealization,
                         rng: np.random.Generator, table: ConstrainedDPTable | None = None) -> CoupledTriple:
    """Draw eta0 from the tilted measure and stack the three paths around xi^0 = integral of chi.

    Raises :class:`FluctuationError` when chi is outside G, since the
    ordering of the triple can then not be certified.
    """
    if chi.half_size != spec.half_size:
        raise ValueError("configuration and measure must share N")
    if not chi.balanced:
        raise ValueError("chi must be balanced")
    _check_g(chi, spec.alpha, spec.theta)
    table = table or ConstrainedDPTable(spec)
    eta0 = ParticleConfiguration(table.sample(1, rng)[0])
    return coupled_triple_from(chi, eta0, spec, clocks)


@dataclass(frozen=True, eq=False)
class CoalescenceResult:
    half_size: int
    alpha: float
    theta: float
    tau: np.ndarray  # inf where censored at t_max
    t_max: float
    horizon: float
    initial_area: np.ndarray
    shift: np.ndarray
    violations: int
    events: np.ndarray
    chi: ParticleConfiguration

    @property
    def censored(self) -> np.ndarray:
        return ~np.isfinite(self.tau)

    @property
    def uncoalesced_fraction(self) -> float:
        """Fraction of runs with xi^1 != xi^2 at N^2 sqrt(log N)."""
        return float(np.mean(self.tau > self.horizon))


def draw_start(n: int, alpha: float, theta: float, seed: int, table: ConstrainedDPTable | None = None,
               attempts: int = 1000) -> ParticleConfiguration:
    """A chi in G drawn from the tilted measure (first success in a seeded sequence)."""
    table = table or ConstrainedDPTable(TiltedMeasureSpec(n, alpha, theta))
    rng = np.random.default_rng(int(derive_seed(np.uint64(seed), STREAM_START, 0)))
    lim = fluctuation_limit(n)
    for _ in range(attempts):
        chi = table.sample(1, rng)[0]
        if max_partial_sum_deviation(chi, alpha, theta, 0.0) <= lim:
            return ParticleConfiguration(chi)
    raise RuntimeError("no configuration in G found")


def coalescence_experiment(n: int, alpha: float, theta: float = 0.0, n_runs: int = 100,
                           t_max: float | None = None, seed: int = 0,
                           chi: ParticleConfiguration | None = None) -> CoalescenceResult:
    """Coalescence times of xi^1 and xi^2 over independent coupled triples.

    Replica r uses master seed ``replica_seeds(seed, n_runs)[r]`` both for its
    eta0 draw and its clocks.  Runs stop at coalescence or at ``t_max``
    (default 4 N^2 sqrt(log N)); censored runs report tau = inf.
    """
    if n_runs < 1:
        raise ValueError("need at least one run")
    if alpha > alpha_ceiling(n) * (1 + 1e-12):
        warnings.warn(f"alpha={alpha:.4g} exceeds 2N^(-3/7)={alpha_ceiling(n):.4g}", stacklevel=2)
    horizon = coalescence_horizon(n)
    t_max = 4.0 * horizon if t_max is None else float(t_max)
    spec = TiltedMeasureSpec(n, alpha, theta)
    table = ConstrainedDPTable(spec)
    chi = draw_start(n, alpha, theta, seed, table) if chi is None else chi
    seeds = replica_seeds(seed, n_runs)
    triples = [build_coupled_triple(chi, spec, ClockRealization(int(s)), np.random.default_rng(int(s)), table)
               for s in seeds]
    init = np.array([[p.heights for p in tr.paths] for tr in triples])
    tau, viol, events, _ = coupled_batch(init, seeds, t_max, (LOWER, UPPER), stop_at_coalescence=True)
    return CoalescenceResult(
        half_size=n, alpha=alpha, theta=theta, tau=tau, t_max=t_max, horizon=horizon,
        initial_area=np.array([tr.initial_area for tr in triples]),
        shift=np.array([tr.shift for tr in triples]),
        violations=int(viol.sum()), events=events, chi=chi,
    )
