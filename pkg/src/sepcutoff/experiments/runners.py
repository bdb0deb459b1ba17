"""Experiment drivers.  Each ``run_*`` returns the column list and a row iterator."""
from __future__ import annotations

import math
import warnings
from typing import Iterator

import numpy as np

from .. import exact, spectral
from ..dynamics.coupling import alpha_ceiling, coalescence_experiment
from ..dynamics.exclusion import simulate_exclusion_batch
from ..dynamics.rng import derive_seed, replica_seeds
from ..lattice import worst_case
from ..tilted import (
    TiltedMeasureSpec,
    a_statistic,
    clt_check,
    exact_a_moments,
    lipschitz_tail_check,
    tv_to_uniform,
    uniform_a_samples,
)
from .config import ExperimentConfig
from .estimators import binned_tv, fd_width
from .output import open_table

STREAM_PROFILE = np.uint64(0x9F01)
STREAM_STATIONARY = np.uint64(0x9F02)
STREAM_TVNU = np.uint64(0x9F03)
STREAM_CLT = np.uint64(0x9F04)
STREAM_TAILS = np.uint64(0x9F05)
STREAM_COALESCE = np.uint64(0x9F06)

Rows = Iterator[dict]


def _rng(cfg: ExperimentConfig, stream, *index: int) -> np.random.Generator:
    """Generator for one table cell; depends only on the seed and the cell's indices."""
    s = np.uint64(cfg.seed)
    for i in index:
        s = np.uint64(derive_seed(s, stream, i))
    return np.random.default_rng(int(s))


def profile_sample(n: int, s_values, replicas: int, master: int) -> tuple[np.ndarray, np.ndarray]:
    """a_{theta(chi_max)}(eta_t) over replicas started from chi_max, at t = t_{s,N} for each s.

    One trajectory per replica is read at every requested time.
    Returns (times, matrix of shape (len(s_values), replicas)).
    """
    chi = worst_case(n)
    theta = spectral.phase(chi)
    s_values = np.asarray(s_values, dtype=np.float64)
    times = np.array([spectral.mixing_schedule(n, s) for s in s_values])
    order = np.argsort(times, kind="stable")
    seeds = replica_seeds(master, replicas)
    init = np.repeat(chi.values[None, :], replicas, axis=0)
    traj = simulate_exclusion_batch(init, seeds, times[order])
    a = np.empty((times.size, replicas))
    for j, idx in enumerate(order):
        a[idx] = a_statistic(traj[:, j], theta)
    return times, a


def run_profile(cfg: ExperimentConfig) -> tuple[list[str], Rows]:
    cols = ["N", "s", "t", "replicas", "estimate", "stderr", "estimate_half_width", "estimate_double_width",
            "bin_width", "bins", "target"]

    def rows():
        for n in cfg.n:
            keep = [(i, s) for i, s in enumerate(cfg.s_grid) if spectral.mixing_schedule(n, s) >= 0]
            for i, s in enumerate(cfg.s_grid):
                if (i, s) not in keep:
                    warnings.warn(f"skipping s={s}: t_(s,N) < 0 at N={n}", stacklevel=2)
            master = int(derive_seed(np.uint64(cfg.seed), STREAM_PROFILE, n))
            times, a = profile_sample(n, [s for _, s in keep], cfg.replicas, master)
            theta = spectral.phase(worst_case(n))
            for j, (i, s) in enumerate(keep):
                ref = uniform_a_samples(n, theta, cfg.replicas, _rng(cfg, STREAM_STATIONARY, n, i))
                h = fd_width(np.concatenate((a[j], ref)))
                est = binned_tv(a[j], ref, h)
                yield {"N": n, "s": float(s), "t": float(times[j]), "replicas": cfg.replicas,
                       "estimate": est.value, "stderr": est.stderr,
                       "estimate_half_width": binned_tv(a[j], ref, h / 2).value,
                       "estimate_double_width": binned_tv(a[j], ref, 2 * h).value,
                       "bin_width": h, "bins": est.bins, "target": spectral.cutoff_profile(float(s))}

    return cols, rows()


def run_tvnu(cfg: ExperimentConfig) -> tuple[list[str], Rows]:
    cols = ["N", "gamma", "alpha", "samples", "estimate", "stderr", "target"]

    def rows():
        for n in cfg.n:
            for i, g in enumerate(cfg.gamma_grid):
                alpha = g / math.sqrt(n)
                est = tv_to_uniform(TiltedMeasureSpec(n, alpha, cfg.theta), "monte_carlo", cfg.replicas,
                                    _rng(cfg, STREAM_TVNU, n, i))
                yield {"N": n, "gamma": float(g), "alpha": alpha, "samples": cfg.replicas,
                       "estimate": est.value, "stderr": est.stderr, "target": math.erf(g / math.sqrt(8.0))}

    return cols, rows()


def run_coalesce(cfg: ExperimentConfig) -> tuple[list[str], Rows]:
    cols = ["N", "alpha", "replica", "tau", "censored", "t_max", "horizon", "coalesced_by_horizon",
            "initial_area", "shift", "violations"]

    def rows():
        for n in cfg.n:
            alpha = alpha_ceiling(n) if cfg.alpha is None else cfg.alpha
            master = int(derive_seed(np.uint64(cfg.seed), STREAM_COALESCE, n))
            res = coalescence_experiment(n, alpha, cfg.theta, cfg.replicas, cfg.t_max, master)
            for r in range(cfg.replicas):
                tau = float(res.tau[r])
                yield {"N": n, "alpha": alpha, "replica": r, "tau": tau, "censored": not math.isfinite(tau),
                       "t_max": res.t_max, "horizon": res.horizon, "coalesced_by_horizon": tau <= res.horizon,
                       "initial_area": int(res.initial_area[r]), "shift": int(res.shift[r]),
                       "violations": res.violations}

    return cols, rows()


def run_exact(cfg: ExperimentConfig) -> tuple[list[str], Rows]:
    cols = ["N", "s", "t", "distance", "tv_tilted_worst", "tv_uniform_worst", "target"]

    def rows():
        for n in cfg.n:
            gen = exact.build_generator(n)
            chi = worst_case(n)
            for s in sorted(cfg.s_grid):
                t = spectral.mixing_schedule(n, s)
                if t < 0:
                    warnings.warn(f"skipping s={s}: t_(s,N) < 0 at N={n}", stacklevel=2)
                    continue
                cmp = exact.verify_tilted_approximation(n, chi, [t], gen)[0]
                yield {"N": n, "s": float(s), "t": t, "distance": exact.exact_distance_profile(n, t, gen),
                       "tv_tilted_worst": cmp.tv_tilted, "tv_uniform_worst": cmp.tv_uniform,
                       "target": spectral.cutoff_profile(float(s))}

    return cols, rows()


def run_clt(cfg: ExperimentConfig) -> tuple[list[str], Rows]:
    cols = ["N", "theta", "samples", "ks", "second_moment", "second_moment_formula"]

    def rows():
        for n in cfg.n:
            ks = clt_check(n, cfg.theta, cfg.replicas, _rng(cfg, STREAM_CLT, n))
            m2 = exact_a_moments(n, cfg.theta)[1] if n <= 5 else math.nan
            yield {"N": n, "theta": cfg.theta, "samples": cfg.replicas, "ks": ks, "second_moment": m2,
                   "second_moment_formula": 2 * n * n / (2 * n - 1)}

    return cols, rows()


def run_tails(cfg: ExperimentConfig) -> tuple[list[str], Rows]:
    cols = ["N", "theta", "samples", "s", "empirical", "wilson_low", "bound", "within_bound"]

    def rows():
        for n in cfg.n:
            rep = lipschitz_tail_check("a_theta", "uniform", n_half=n, n=cfg.replicas,
                                       rng=_rng(cfg, STREAM_TAILS, n), theta=cfg.theta)
            for s, e, lo, b in zip(rep.s_grid, rep.empirical, rep.wilson_low, rep.bound):
                yield {"N": n, "theta": cfg.theta, "samples": cfg.replicas, "s": float(s), "empirical": float(e),
                       "wilson_low": float(lo), "bound": float(b), "within_bound": bool(lo <= b)}

    return cols, rows()


RUNNERS = {
    "profile": run_profile,
    "tvnu": run_tvnu,
    "coalesce": run_coalesce,
    "exact": run_exact,
    "clt": run_clt,
    "tails": run_tails,
}


def execute(cfg: ExperimentConfig) -> int:
    """Run the configured experiment and write its table; returns the row count."""
    if cfg.threads is not None:
        import numba

        numba.set_num_threads(min(cfg.threads, numba.config.NUMBA_NUM_THREADS))
    cols, rows = RUNNERS[cfg.experiment](cfg)
    count = 0
    with open_table(cfg.out, cfg.format, cols, cfg.experiment, cfg.digest) as table:
        for row in rows:
            table.write({"seed": cfg.seed, "config_hash": cfg.digest, **row})
            count += 1
    return count
