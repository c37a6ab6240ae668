import math
from statistics import NormalDist

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from qhtree.sketches import (
    GaussianGrid, GaussianStat, Histogram, QuantileGrid, QuantileSet, alpha_grid, erf, gaussian_cdf,
    gaussian_update, histogram_observe, seed_quantiles, signum_update,
)
from qhtree.stream import SCALE

finite = st.floats(-100, 100, allow_nan=False)


def run_quantiles(xs, n_q=8, lam=0.01):
    qs = seed_quantiles(xs[0], n_q, lam)
    for x in xs[1:]:
        signum_update(qs, x)
    return qs


class TestSignum:
    def test_below_moves_up_by_lambda_alpha(self):
        qs = QuantileSet([0.5], [0.25], 0.01)
        assert signum_update(qs, 0.7).q[0] == pytest.approx(0.5025, abs=1e-15)

    def test_equality_takes_down_branch(self):
        qs = QuantileSet([0.5], [0.5], 0.01)
        assert signum_update(qs, 0.5).q[0] == pytest.approx(0.495, abs=1e-15)

    def test_updates_every_entry(self):
        qs = seed_quantiles(0.0, 8, 0.01)
        signum_update(qs, 1.0)
        assert np.allclose(qs.q, 0.01 * qs.alphas)

    @settings(max_examples=200)
    @given(st.lists(finite, min_size=8, max_size=8), finite, st.floats(1e-4, 0.5))
    def test_step_is_two_valued(self, q, x, lam):
        alphas = alpha_grid(8)
        before = np.array(q)
        after = QuantileSet(before, alphas, lam).update(x).q
        delta = after - before
        up = np.isclose(delta, lam * alphas, rtol=0, atol=1e-9)
        down = np.isclose(delta, -lam * (1 - alphas), rtol=0, atol=1e-9)
        assert np.all(up ^ down)
        assert np.all(up == (before < x))

    def test_uniform_convergence(self):
        xs = np.random.default_rng(0).uniform(0, 1, 10**5)
        qs = run_quantiles(xs)
        assert np.max(np.abs(qs.q - qs.alphas)) <= 0.05

    def test_normal_convergence(self):
        xs = np.random.default_rng(0).normal(0, 1, 2 * 10**5)
        qs = run_quantiles(xs)
        truth = np.array([NormalDist().inv_cdf(a) for a in qs.alphas])
        assert np.mean(np.abs(qs.q - truth)) <= 0.08


class TestSeeding:
    def test_seed_values(self):
        qs = seed_quantiles(0.3, 8, 0.01)
        assert list(qs.q) == [0.3] * 8
        assert np.allclose(qs.alphas, np.arange(1, 9) / 9)

    def test_two_quantiles(self):
        assert np.allclose(alpha_grid(2), [1 / 3, 2 / 3])

    def test_one_quantile_rejected(self):
        with pytest.raises(ValueError):
            seed_quantiles(0.0, 1, 0.01)


class TestQuantileGrid:
    def test_first_value_seeds_without_step(self):
        g = QuantileGrid(2, 2, 4, 0.01)
        g.update(np.array([0.3, -0.2]), 1)
        assert np.all(g.values(0)[1] == 0.3) and np.all(g.values(1)[1] == -0.2)
        assert g.seeded.tolist() == [[False, True], [False, True]]

    def test_matches_quantile_set(self):
        rng = np.random.default_rng(2)
        xs = rng.normal(size=500)
        g = QuantileGrid(1, 1, 8, 0.01)
        for x in xs:
            g.update(np.array([x]), 0)
        assert np.allclose(g.values(0)[0], run_quantiles(xs).q, atol=1e-12)

    def test_fixed_point_tracks_float(self):
        rng = np.random.default_rng(3)
        xs = rng.uniform(-1, 1, 5000)
        f, q = QuantileGrid(1, 1, 8, 0.01), QuantileGrid(1, 1, 8, 0.01, fixed_point=True)
        for x in xs:
            f.update(np.array([x]), 0)
            q.update(np.array([x]), 0)
        assert q.q.dtype == np.int64
        # step rounding differs by at most half an lsb per update
        assert np.max(np.abs(q.values(0) - f.values(0))) <= len(xs) / SCALE

    def test_reset_unseeds(self):
        g = QuantileGrid(1, 2, 2, 0.1)
        g.update(np.array([1.0]), 0)
        g.reset()
        g.update(np.array([5.0]), 0)
        assert np.all(g.values(0)[0] == 5.0)


class TestGaussian:
    def test_one_two_three(self):
        g = GaussianStat()
        for x in (1, 2, 3):
            gaussian_update(g, x)
        assert g.mean == 2.0 and g.variance == 1.0

    def test_single_sample_variance_zero(self):
        g = gaussian_update(GaussianStat(), 4.2)
        assert g.mean == 4.2 and g.variance == 0.0

    def test_two_pass_oracle(self):
        xs = np.random.default_rng(4).normal(3.0, 2.0, 10**4)
        g = GaussianStat()
        for x in xs:
            g.update(x)
        mean = sum(xs) / len(xs)
        var = sum((x - mean) ** 2 for x in xs) / (len(xs) - 1)
        assert g.mean == pytest.approx(mean, rel=1e-9)
        assert g.variance == pytest.approx(var, rel=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(finite, min_size=2, max_size=60))
    def test_grid_matches_scalar(self, xs):
        grid = GaussianGrid(1, 2)
        g = GaussianStat()
        for x in xs:
            grid.update(np.array([x]), 1)
            g.update(x)
        assert grid.mean[0, 1] == pytest.approx(g.mean, rel=1e-12, abs=1e-12)
        assert grid.variance(0)[1] == pytest.approx(g.variance, rel=1e-9, abs=1e-9)
        assert grid.variance(0)[1] >= 0 and grid.variance(0)[0] == 0

    def test_weighted_seed(self):
        g = GaussianStat().update(2.0, weight=3.0)
        assert (g.w_sum, g.mean, g.v_sum) == (3.0, 2.0, 0.0)
        with pytest.raises(ValueError):
            g.update(1.0, weight=0)


class TestErfCdf:
    def test_erf_accuracy(self):
        xs = np.linspace(-6, 6, 20001)
        approx = erf(xs)
        exact = np.array([math.erf(x) for x in xs])
        assert np.max(np.abs(approx - exact)) <= 1.5e-7

    def test_cdf_against_quadrature(self):
        dens = lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi)
        for pt in (-2.5, -1.0, 0.3, 1.959964):
            oracle = 0.5 + integrate.quad(dens, 0, pt)[0]
            assert float(gaussian_cdf(0.0, 1.0, pt)) == pytest.approx(oracle, abs=2e-7)

    def test_975(self):
        assert float(gaussian_cdf(0.0, 1.0, 1.959964)) == pytest.approx(0.975, abs=1e-4)

    def test_at_mean(self):
        assert float(gaussian_cdf(3.0, 2.0, 3.0)) == pytest.approx(0.5, abs=1e-12)

    def test_zero_variance_step(self):
        assert float(gaussian_cdf(1.0, 0.0, 0.5)) == 0.0
        assert float(gaussian_cdf(1.0, 0.0, 1.0)) == 1.0
        assert float(gaussian_cdf(1.0, 0.0, 1.5)) == 1.0

    def test_scaled_cdf(self):
        g = GaussianStat()
        for x in (1.0, 3.0):
            g.update(x)
        # mean 2, variance 2
        assert g.cdf(2.0 + math.sqrt(2.0)) == pytest.approx(NormalDist().cdf(1.0), abs=2e-7)


class TestHistogram:
    def test_stale_content_ignored(self):
        h = Histogram(3, 2)
        h._counts[:] = 9  # garbage left from a previous owner
        histogram_observe(h, 2, 0)
        expected = np.zeros((3, 2), dtype=int)
        expected[2, 0] = 1
        assert h.valid and np.array_equal(h.counts, expected)

    def test_increment(self):
        h = Histogram(3, 2)
        histogram_observe(h, 2, 0)
        histogram_observe(h, 2, 0)
        assert h.counts[2, 0] == 2

    def test_invalid_reads_zero(self):
        h = Histogram(2, 2).observe(1, 1)
        h.invalidate()
        assert h.counts.sum() == 0 and h._counts.sum() == 1

    def test_tally_oracle(self):
        rng = np.random.default_rng(5)
        h = Histogram(5, 3)
        tally = np.zeros((5, 3), dtype=int)
        for v, l in zip(rng.integers(5, size=1000), rng.integers(3, size=1000)):
            h.observe(int(v), int(l))
            tally[v, l] += 1
        assert h.counts.sum() == 1000
        assert np.array_equal(h.counts, tally)

    @pytest.mark.parametrize("value,label", [(3, 0), (0, 2), (-1, 0)])
    def test_out_of_range(self, value, label):
        with pytest.raises(IndexError):
            Histogram(3, 2).observe(value, label)
