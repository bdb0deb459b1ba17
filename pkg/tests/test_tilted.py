import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats
from scipy.special import comb

from oracles import balanced_states, tilted_enumeration
from sepcutoff.lattice import enumerate_states, rank_many, worst_case
from sepcutoff.tilted import (
    ConstrainedDPTable,
    TiltedMeasureSpec,
    a_statistic,
    clt_check,
    exact_a_moments,
    exact_sample,
    exact_samples,
    lipschitz_tail_check,
    log_partition,
    marginal,
    marginals,
    tilted_vector,
    tv_to_uniform,
    wilson_interval,
)
from strategies import thetas


def enumerated_log_partition(n, alpha, theta):
    x = np.arange(1, 2 * n + 1)
    a = np.array(balanced_states(n)) @ np.sin(np.pi * x / n + theta)
    return math.log(np.exp(alpha * a).mean())


class TestMeasureSpec:
    @pytest.mark.parametrize("kw", [dict(half_size=0, alpha=0.1), dict(half_size=2, alpha=math.inf),
                                    dict(half_size=2, alpha=0.1, theta=7.0), dict(half_size=2, alpha=0.1, theta=-0.1)])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            TiltedMeasureSpec(**kw)


class TestAStatistic:
    def test_all_occupied(self):
        assert a_statistic(np.ones(10, dtype=np.int8), 0.7) == pytest.approx(0, abs=1e-12)

    def test_worst_case_n2(self):
        assert a_statistic(worst_case(2), 7 * math.pi / 4) == pytest.approx(2 * math.sqrt(2), abs=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_equals_n_times_b(self, n):
        from sepcutoff.spectral import first_coefficient, phase

        for s in enumerate_states(n):
            assert a_statistic(s, phase(s)) == pytest.approx(n * first_coefficient(s), abs=1e-10)

    def test_rows(self):
        s = enumerate_states(3)
        assert a_statistic(s, 0.3).shape == (20,)


class TestPartition:
    def test_zero_tilt(self):
        assert log_partition(TiltedMeasureSpec(5, 0.0, 1.0)) == pytest.approx(0, abs=1e-12)

    def test_enumeration_n2(self):
        assert log_partition(TiltedMeasureSpec(2, 0.3, 0.0)) == pytest.approx(
            enumerated_log_partition(2, 0.3, 0.0), abs=1e-12)

    @given(st.integers(1, 5), st.floats(-2, 2), thetas)
    def test_enumeration_property(self, n, alpha, theta):
        assert log_partition(TiltedMeasureSpec(n, alpha, theta)) == pytest.approx(
            enumerated_log_partition(n, alpha, theta), abs=1e-11)

    @given(st.floats(-2, 2), st.floats(0, math.pi, exclude_max=True))
    def test_phase_flip_symmetry(self, alpha, theta):
        a = log_partition(TiltedMeasureSpec(3, alpha, theta))
        b = log_partition(TiltedMeasureSpec(3, -alpha, theta + math.pi))
        assert a == pytest.approx(b, abs=1e-10)

    def test_table_boundary_and_recursion(self):
        spec = TiltedMeasureSpec(4, 0.6, 0.9)
        t = ConstrainedDPTable(spec)
        m = 8
        assert t.suffix[m, 1] == 0
        for i in range(m):
            w = t.field[i]
            for k in range(0, min(4, m - i) + 1):
                plus = w + t.suffix[i + 1, k] if k >= 1 else -np.inf
                want = np.logaddexp(plus, -w + t.suffix[i + 1, k + 1])
                got = t.suffix[i, k + 1]
                assert (got == want == -np.inf) or abs(got - want) < 1e-12

    def test_large_tilt_stays_finite(self):
        assert math.isfinite(log_partition(TiltedMeasureSpec(400, 3.0, 0.2)))

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_normalization(self, n):
        spec = TiltedMeasureSpec(n, 0.45, 2.0)
        a = a_statistic(enumerate_states(n), spec.theta)
        dens = np.exp(spec.alpha * a - log_partition(spec) - math.log(comb(2 * n, n)))
        assert dens.sum() == pytest.approx(1, abs=1e-12)


class TestSampler:
    def test_uniform_at_zero_tilt(self, rng):
        draws = exact_samples(TiltedMeasureSpec(3, 0.0), 100_000, rng)
        counts = np.bincount(rank_many(draws), minlength=20)
        assert stats.chisquare(counts).pvalue > 0.001

    def test_frequencies_n2(self, rng):
        spec = TiltedMeasureSpec(2, 0.5, 0.0)
        n_draws = 100_000
        p = tilted_enumeration(2, 0.5, 0.0)
        freq = np.bincount(rank_many(exact_samples(spec, n_draws, rng)), minlength=6) / n_draws
        assert np.all(np.abs(freq - p) <= 4 * np.sqrt(p * (1 - p) / n_draws))

    @pytest.mark.parametrize("n", [2, 3])
    @pytest.mark.parametrize("alpha", [0.2, 0.7])
    @pytest.mark.parametrize("theta", [0.0, 1.1])
    def test_chi_square(self, n, alpha, theta, rng):
        p = tilted_enumeration(n, alpha, theta)
        counts = np.bincount(rank_many(exact_samples(TiltedMeasureSpec(n, alpha, theta), 100_000, rng)),
                             minlength=p.size)
        assert stats.chisquare(counts, 100_000 * p).pvalue > 0.001

    def test_mean_matches_marginals(self, rng):
        spec = TiltedMeasureSpec(200, 0.1, 0.0)
        table = ConstrainedDPTable(spec)
        a = a_statistic(exact_samples(spec, 20_000, rng, table), spec.theta)
        exact = float(table.marginals() @ spec.weights)
        assert abs(a.mean() - exact) <= 4 * a.std(ddof=1) / math.sqrt(a.size)

    def test_single_sample_balanced(self, rng):
        c = exact_sample(TiltedMeasureSpec(7, 1.3, 0.4), rng)
        assert c.balanced

    def test_vector_matches_oracle(self):
        assert np.abs(tilted_vector(TiltedMeasureSpec(3, 0.8, 2.2)) - tilted_enumeration(3, 0.8, 2.2)).max() < 1e-14


class TestMarginals:
    def test_zero_tilt(self):
        assert np.abs(marginals(TiltedMeasureSpec(6, 0.0))).max() < 1e-12

    def test_enumeration_n3(self):
        spec = TiltedMeasureSpec(3, 0.4, 0.0)
        p = tilted_enumeration(3, 0.4, 0.0)
        want = p @ np.array(balanced_states(3))
        for x in range(1, 7):
            assert marginal(spec, x) == pytest.approx(want[x - 1], abs=1e-12)

    @given(st.integers(1, 30), st.floats(-3, 3), thetas)
    def test_zero_sum(self, n, alpha, theta):
        assert abs(marginals(TiltedMeasureSpec(n, alpha, theta)).sum()) < 1e-10

    def test_linear_response(self):
        n = 50
        ratios = []
        for alpha in (0.02, 0.05, 0.1):
            spec = TiltedMeasureSpec(n, alpha, 0.0)
            err = np.abs(marginals(spec) - alpha * spec.weights).max()
            ratios.append(err / (alpha ** 2 + n ** -2))
        assert max(ratios) <= 3


class TestTV:
    def test_zero(self):
        assert tv_to_uniform(TiltedMeasureSpec(4, 0.0)).value == pytest.approx(0, abs=1e-14)

    def test_exact_vs_monte_carlo(self, rng):
        spec = TiltedMeasureSpec(3, 0.5)
        ex = tv_to_uniform(spec).value
        mc = tv_to_uniform(spec, "monte_carlo", 1_000_000, rng)
        assert abs(ex - mc.value) <= 4 * mc.stderr

    def test_exact_limit(self):
        with pytest.raises(ValueError):
            tv_to_uniform(TiltedMeasureSpec(7, 0.1))

    def test_bad_method(self):
        with pytest.raises(ValueError):
            tv_to_uniform(TiltedMeasureSpec(2, 0.1), "quadrature")

    def test_monotone_in_alpha(self):
        vals = [tv_to_uniform(TiltedMeasureSpec(4, a, 0.3)).value for a in np.linspace(0, 1.5, 16)]
        assert all(b >= a - 1e-14 for a, b in zip(vals, vals[1:]))

    @pytest.mark.slow
    def test_gaussian_limit(self, rng):
        n, g = 2000, 1.0
        est = tv_to_uniform(TiltedMeasureSpec(n, g / math.sqrt(n)), "monte_carlo", 200_000, rng)
        assert abs(est.value - math.erf(1 / math.sqrt(8))) <= 0.02
        assert math.erf(1 / math.sqrt(8)) == pytest.approx(0.3829, abs=1e-4)


class TestMoments:
    # at N = 1 the slowest mode is the alternating one, so the identity needs N >= 2
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    @pytest.mark.parametrize("theta", [0.0, 1.1])
    def test_variance_identity(self, n, theta):
        m1, m2 = exact_a_moments(n, theta)
        assert abs(m1) < 1e-12
        assert m2 == pytest.approx(2 * n * n / (2 * n - 1), abs=1e-12)

    def test_clt_needs_samples(self, rng):
        with pytest.raises(ValueError):
            clt_check(10, 0.0, 100, rng)

    def test_clt_theta_independent(self, rng):
        ks = [clt_check(300, th, 20_000, rng) for th in (0.0, math.pi / 3, 1.7)]
        # two-sample noise at this size is about 1.36 / sqrt(1e4)
        assert max(ks) - min(ks) < 0.02
        assert max(ks) < 0.02


class TestTails:
    def test_uniform_a_theta(self, rng):
        rep = lipschitz_tail_check("a_theta", "uniform", n_half=100, n=20_000, rng=rng, theta=0.4)
        assert rep.passed
        assert rep.bound[0] == 2.0 and rep.s_grid[0] == 0

    def test_window_bound_uses_width(self, rng):
        rep = lipschitz_tail_check("window", "uniform", n_half=50, n=5_000, rng=rng, width=20)
        scale = math.sqrt(8 * 20)
        assert np.allclose(rep.bound, 2 * np.exp(-rep.s_grid ** 2 / scale ** 2))
        assert rep.passed

    def test_tilted(self, rng):
        rep = lipschitz_tail_check("a_theta", "tilted", n_half=60, n=5_000, rng=rng, alpha=0.2)
        assert rep.passed

    def test_bad_window(self, rng):
        with pytest.raises(ValueError):
            lipschitz_tail_check("window", n_half=5, n=10, rng=rng)

    def test_wilson(self):
        lo, hi = wilson_interval(0, 100)
        assert lo == 0 and 0 < hi < 0.1
        lo, hi = wilson_interval(50, 100)
        assert lo < 0.5 < hi
