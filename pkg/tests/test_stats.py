import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats as sps

from treesilhouette.errors import EmptySample, LengthMismatch
from treesilhouette.rng import RngStream
from treesilhouette.stats import EmpiricalDistribution, dist_stats, ks_statistic, wasserstein1

finite = st.floats(-1e6, 1e6, allow_nan=False)


class TestEmpirical:
    def test_empty(self):
        with pytest.raises(EmptySample):
            EmpiricalDistribution([])

    def test_moments(self):
        d = EmpiricalDistribution([1.0, 2.0, 3.0, 6.0])
        assert d.mean == 3.0
        assert d.variance == pytest.approx(14 / 3)
        assert d.quantile(0.5) == 2.5

    def test_single_sample_variance(self):
        assert EmpiricalDistribution([4.0]).variance == 0.0

    def test_summary_keys(self):
        s = EmpiricalDistribution(np.arange(101.0)).summary()
        assert s["median"] == 50.0 and s["q05"] == 5.0


class TestDistStats:
    def test_identical(self):
        x = RngStream(1).gen.normal(size=1000)
        out = dist_stats(x, x.copy())
        assert out.ks == 0.0 and out.w1 == 0.0 and out.corr is None

    def test_normal_against_analytic(self):
        out = dist_stats(RngStream(2).gen.normal(size=100_000), "normal")
        assert out.ks <= 0.006
        assert out.w1 is None

    def test_callable_reference(self):
        x = RngStream(3).random(5000)
        assert dist_stats(x, sps.uniform.cdf).ks == pytest.approx(sps.kstest(x, "uniform").statistic)

    def test_shift(self):
        rng = RngStream(4)
        a, b = rng.split(0).random(100_000), rng.split(1).random(100_000) + 0.1
        assert dist_stats(a, b).w1 == pytest.approx(0.1, abs=0.005)

    def test_exact_shift(self):
        x = RngStream(5).random(1000)
        assert wasserstein1(x, x + 0.25) == pytest.approx(0.25, abs=1e-14)

    def test_unequal_sizes_use_scipy(self):
        rng = RngStream(6)
        a, b = rng.split(0).random(300), rng.split(1).random(700)
        assert wasserstein1(a, b) == pytest.approx(sps.wasserstein_distance(a, b))

    def test_paired(self):
        x = RngStream(7).random(500)
        assert dist_stats(x, 2 * x + 1, paired=True).corr == pytest.approx(1.0)

    def test_paired_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            dist_stats(np.zeros(3), np.zeros(4), paired=True)

    @pytest.mark.parametrize("a, b", [([], [1.0]), ([1.0], [])])
    def test_empty(self, a, b):
        with pytest.raises(EmptySample):
            dist_stats(a, b)

    def test_ks_two_sample_matches_scipy(self):
        rng = RngStream(8)
        a, b = rng.split(0).random(400), rng.split(1).random(600)
        assert ks_statistic(a, b) == sps.ks_2samp(a, b).statistic


class TestW1Metric:
    @settings(max_examples=80)
    @given(st.integers(1, 30).flatmap(lambda n: st.tuples(*(arrays(float, n, elements=finite),) * 3)))
    def test_triangle_inequality(self, pools):
        a, b, c = pools
        assert wasserstein1(a, c) <= wasserstein1(a, b) + wasserstein1(b, c) + 1e-6

    @given(st.integers(1, 30).flatmap(lambda n: st.tuples(*(arrays(float, n, elements=finite),) * 2)))
    def test_symmetric_and_matches_scipy(self, pools):
        a, b = pools
        assert wasserstein1(a, b) == wasserstein1(b, a)
        assert wasserstein1(a, b) == pytest.approx(sps.wasserstein_distance(a, b), rel=1e-9, abs=1e-6)
