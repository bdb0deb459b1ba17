import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from sepcutoff.dynamics.clocks import DOWN, UP, ClockKey, ClockRealization, key_code


class TestKey:
    def test_parity(self):
        ClockKey(UP, 3, -5)
        ClockKey(DOWN, 4, 0)
        with pytest.raises(ValueError):
            ClockKey(UP, 3, 2)
        with pytest.raises(ValueError):
            ClockKey(2, 4, 0)

    @given(st.integers(0, 1), st.integers(0, 2000), st.integers(-10 ** 6, 10 ** 6),
           st.integers(0, 1), st.integers(0, 2000), st.integers(-10 ** 6, 10 ** 6))
    def test_code_injective(self, d1, x1, z1, d2, x2, z2):
        if (d1, x1, z1) != (d2, x2, z2):
            assert key_code(d1, x1, z1) != key_code(d2, x2, z2)

    def test_code_type(self):
        assert isinstance(ClockKey(UP, 1, 1).code, np.uint64)


class TestRealization:
    def test_strictly_increasing_unit_rate(self):
        c = ClockRealization(5)
        rings = c.ring_times(ClockKey(UP, 2, 0), 20_000.0)
        assert np.all(np.diff(rings) > 0)
        assert abs(rings.size - 20_000) < 4 * np.sqrt(20_000)
        gaps = np.diff(rings)
        assert stats.kstest(gaps, "expon").pvalue > 0.001

    def test_counts_poisson(self):
        c = ClockRealization(11)
        counts = [c.ring_times(ClockKey(DOWN, 1, 2 * z + 1), 10.0).size for z in range(3000)]
        assert np.mean(counts) == pytest.approx(10, abs=4 * np.sqrt(10 / 3000))
        assert np.var(counts) == pytest.approx(10, rel=0.1)

    def test_repeatable(self):
        k = ClockKey(DOWN, 7, 3)
        a = ClockRealization(99).ring_times(k, 30.0)
        b = ClockRealization(99).ring_times(k, 30.0)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, ClockRealization(100).ring_times(k, 30.0))

    def test_window(self):
        c = ClockRealization(3)
        k = ClockKey(UP, 1, 1)
        full = c.ring_times(k, 50.0)
        part = c.ring_times(k, 40.0, 12.5)
        assert np.array_equal(part, full[(full > 12.5) & (full <= 40.0)])

    def test_next_ring_consistent(self):
        c = ClockRealization(8)
        k = ClockKey(DOWN, 2, 4)
        rings = c.ring_times(k, 100.0)
        t = 0.0
        for r in rings:
            t = c.next_ring(k, t)
            assert t == r
        assert c.next_ring(k, rings[3] - 1e-9) == rings[3]
        assert c.next_ring(k, rings[3]) == rings[4]

    def test_negative_time(self):
        with pytest.raises(ValueError):
            ClockRealization(1).next_ring(ClockKey(UP, 1, 1), -0.5)

    def test_independent_keys(self):
        c = ClockRealization(21)
        a = [c.ring_times(ClockKey(UP, 1, 2 * z + 1), 5.0).size for z in range(2000)]
        b = [c.ring_times(ClockKey(DOWN, 1, 2 * z + 1), 5.0).size for z in range(2000)]
        assert abs(stats.pearsonr(a, b).statistic) < 4 / np.sqrt(2000)

    def test_many_rings_in_block(self):
        # blocks with more than three rings read extra Philox words
        c = ClockRealization(2)
        sizes = [c.ring_times(ClockKey(UP, 3, 2 * z + 1), 1.0 - 1e-12).size for z in range(5000)]
        assert max(sizes) >= 5
