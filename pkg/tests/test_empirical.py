import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from copula_lab.copulas import IndependenceCopula
from copula_lab.empirical import (
    PairedSample,
    PseudoObservations,
    ecdf_eval,
    empirical_copula,
    empirical_copula_grid,
    empirical_copula_process,
    generalized_inverse,
    pseudo_observations,
    uniform_empirical_cdf,
    uniform_empirical_cdf_grid,
)
from copula_lab.kernels import get_kernel, smoothed_marginal


class TestEcdf:
    def test_hand_values(self):
        assert ecdf_eval([1, 2, 3], 0) == 0.0
        assert ecdf_eval([1, 2, 3], 2) == pytest.approx(2 / 3, abs=0)
        assert ecdf_eval([1, 2, 3], 3) == 1.0

    def test_right_continuity_at_jumps(self):
        data = [1.0, 2.0, 2.0, 5.0]
        assert ecdf_eval(data, 2.0) == 0.75
        assert ecdf_eval(data, np.nextafter(2.0, -np.inf)) == 0.25

    def test_empty(self):
        with pytest.raises(ValueError, match="empty sample"):
            ecdf_eval([], 1.0)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=30), st.floats(-12, 12), st.floats(-12, 12))
    def test_nondecreasing(self, data, x, y):
        lo, hi = sorted([x, y])
        assert ecdf_eval(data, lo) <= ecdf_eval(data, hi)


class TestGeneralizedInverse:
    def test_hand_values(self):
        assert generalized_inverse([1, 2, 3], 0.5) == 2.0
        assert generalized_inverse([1, 2, 3], 1.0) == 3.0
        assert generalized_inverse([1, 2, 3], 0.1) == 1.0

    def test_out_of_range(self):
        for bad in (0.0, -0.2, 1.0001):
            with pytest.raises(ValueError, match="quantile level out of range"):
                generalized_inverse([1, 2, 3], bad)

    def test_left_continuous_staircase(self):
        data = [1.0, 2.0, 3.0, 4.0]
        # Jumps exactly at the multiples of 1/n.
        assert generalized_inverse(data, 0.25) == 1.0
        assert generalized_inverse(data, np.nextafter(0.25, 1)) == 2.0

    def test_galois_inequality_and_grid_equality(self):
        rng = np.random.default_rng(1)
        for n in (3, 7, 20, 33):
            data = rng.normal(size=n)
            for u in rng.uniform(1e-9, 1.0, 50):
                assert ecdf_eval(data, generalized_inverse(data, u)) >= u
            for k in range(1, n + 1):
                u = k / n
                assert ecdf_eval(data, generalized_inverse(data, u)) == u


class TestPseudoObservations:
    def test_rescaled_rank_hand(self):
        sample = PairedSample([1, 2, 3], [1, 3, 2])
        ps = pseudo_observations(sample)
        assert_allclose(ps.us, [0.25, 0.5, 0.75], atol=0)
        assert_allclose(ps.vs, [0.25, 0.75, 0.5], atol=0)
        assert ps.variant == "rescaled_rank"
        assert not ps.has_ties

    def test_rank_bound(self):
        rng = np.random.default_rng(2)
        sample = PairedSample(rng.normal(size=40), rng.normal(size=40))
        ps = pseudo_observations(sample)
        assert np.all(ps.us <= 40 / 41)
        assert np.all(ps.us >= 1 / 41)

    def test_permutation_of_grid(self):
        rng = np.random.default_rng(3)
        n = 25
        sample = PairedSample(rng.normal(size=n), rng.normal(size=n))
        ps = pseudo_observations(sample)
        assert_allclose(np.sort(ps.us), np.arange(1, n + 1) / (n + 1), atol=0)
        assert_allclose(np.sort(ps.vs), np.arange(1, n + 1) / (n + 1), atol=0)

    def test_average_ranks_under_ties(self):
        sample = PairedSample([1.0, 1.0, 2.0], [1, 2, 3])
        assert sample.has_ties
        ps = pseudo_observations(sample)
        assert_allclose(ps.us, [1.5 / 4, 1.5 / 4, 3 / 4], atol=0)
        assert ps.has_ties

    def test_smoothed_variant_matches_marginal(self):
        kernel = get_kernel("epanechnikov")
        rng = np.random.default_rng(4)
        xs, ys = rng.normal(size=30), rng.normal(size=30)
        sample = PairedSample(xs, ys)
        ps = pseudo_observations(sample, "smoothed", kernel=kernel, b1=0.3, b2=0.4)
        assert_allclose(ps.us, smoothed_marginal(kernel, xs, 0.3, xs), atol=0)
        assert_allclose(ps.vs, smoothed_marginal(kernel, ys, 0.4, ys), atol=0)
        assert ps.b1 == 0.3 and ps.b2 == 0.4

    def test_smoothed_one_point_example(self):
        kernel = get_kernel("epanechnikov")
        assert smoothed_marginal(kernel, [1, 2, 3], 0.5, 2.0) == 0.5

    def test_smoothed_requires_kernel_and_bandwidths(self):
        sample = PairedSample([1, 2, 3], [1, 3, 2])
        with pytest.raises(ValueError, match="need kernel"):
            pseudo_observations(sample, "smoothed")
        with pytest.raises(ValueError, match="bandwidth out of range"):
            pseudo_observations(
                sample, "smoothed", kernel=get_kernel("uniform"), b1=1.5, b2=0.1
            )

    def test_validation(self):
        with pytest.raises(ValueError, match="same length"):
            PseudoObservations([0.1, 0.2], [0.3], "rescaled_rank")
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            PseudoObservations([0.1, 1.2], [0.3, 0.4], "rescaled_rank")
        with pytest.raises(ValueError, match="variant"):
            PseudoObservations([0.1], [0.3], "ranks")


class TestPairedSample:
    def test_validation(self):
        with pytest.raises(ValueError, match="same length"):
            PairedSample([1, 2], [1, 2, 3])
        with pytest.raises(ValueError, match="at least 2"):
            PairedSample([1], [1])
        with pytest.raises(ValueError, match="finite"):
            PairedSample([1, np.nan], [1, 2])

    def test_immutability(self):
        sample = PairedSample([1, 2, 3], [1, 3, 2])
        with pytest.raises(ValueError):
            sample.xs[0] = 7.0


class TestEmpiricalCopula:
    def setup_method(self):
        self.sample = PairedSample([1, 2, 3], [1, 3, 2])

    def test_hand_values(self):
        assert empirical_copula(self.sample, 2 / 3, 2 / 3) == pytest.approx(1 / 3, abs=0)
        assert empirical_copula(self.sample, 1.0, 1.0) == 1.0
        assert empirical_copula(self.sample, 1 / 3, 1 / 3) == pytest.approx(1 / 3, abs=0)

    def test_groundedness_convention(self):
        assert empirical_copula(self.sample, 0.0, 0.6) == 0.0
        assert empirical_copula(self.sample, 0.6, 0.0) == 0.0

    def test_domain_errors(self):
        with pytest.raises(ValueError, match="unit square"):
            empirical_copula(self.sample, 1.2, 0.5)
        with pytest.raises(ValueError, match="unit square"):
            empirical_copula(self.sample, 0.5, -0.1)

    def test_uniform_margins_at_grid(self):
        rng = np.random.default_rng(5)
        n = 20
        sample = PairedSample(rng.normal(size=n), rng.normal(size=n))
        for k in range(1, n + 1):
            assert empirical_copula(sample, k / n, 1.0) == pytest.approx(k / n, abs=0)
            assert empirical_copula(sample, 1.0, k / n) == pytest.approx(k / n, abs=0)

    def test_monotone_in_each_argument(self):
        rng = np.random.default_rng(6)
        sample = PairedSample(rng.normal(size=30), rng.normal(size=30))
        us = np.linspace(0.05, 1.0, 15)
        grid = empirical_copula_grid(sample, us, us)
        assert np.all(np.diff(grid, axis=0) >= 0)
        assert np.all(np.diff(grid, axis=1) >= 0)

    def test_grid_matches_scalar(self):
        rng = np.random.default_rng(7)
        for n in (5, 17, 50):
            sample = PairedSample(rng.normal(size=n), rng.normal(size=n))
            us = rng.uniform(0.01, 1.0, 8)
            us.sort()
            grid = empirical_copula_grid(sample, us, us)
            direct = np.array(
                [[empirical_copula(sample, u, v) for v in us] for u in us]
            )
            assert np.array_equal(grid, direct)


class TestUniformEmpiricalCdf:
    def test_hand_values(self):
        us = np.array([0.25, 0.5, 0.75])
        vs = np.array([0.25, 0.75, 0.5])
        assert uniform_empirical_cdf((us, vs), 0.5, 0.5) == pytest.approx(1 / 3, abs=0)
        assert uniform_empirical_cdf((us, vs), 0.0, 0.0) == 0.0
        assert uniform_empirical_cdf((us, vs), 1.0, 1.0) == 1.0

    def test_accepts_pseudo_observations_and_arrays(self):
        ps = PseudoObservations([0.2, 0.6], [0.3, 0.9], "rescaled_rank")
        pairs = np.array([[0.2, 0.3], [0.6, 0.9]])
        assert uniform_empirical_cdf(ps, 0.5, 0.5) == uniform_empirical_cdf(pairs, 0.5, 0.5)

    def test_grid_matches_scalar(self):
        rng = np.random.default_rng(8)
        us, vs = rng.random(40), rng.random(40)
        pts = np.sort(rng.random(9))
        grid = uniform_empirical_cdf_grid((us, vs), pts, pts)
        direct = np.array(
            [[uniform_empirical_cdf((us, vs), u, v) for v in pts] for u in pts]
        )
        assert np.array_equal(grid, direct)

    def test_lattice_discretization_bound(self):
        # Rank pseudo-observations and the empirical copula differ by at
        # most 1/n at every lattice point {i/n}^2.
        rng = np.random.default_rng(9)
        for n in (5, 13, 50):
            sample = PairedSample(rng.normal(size=n), rng.normal(size=n))
            ps = pseudo_observations(sample)
            lattice = np.arange(1, n + 1) / n
            cn = empirical_copula_grid(sample, lattice, lattice)
            ct = uniform_empirical_cdf_grid(ps, lattice, lattice)
            assert np.max(np.abs(cn - ct)) <= 1.0 / n + 1e-15


class TestEmpiricalCopulaProcess:
    def test_zero_when_exact(self):
        sample = PairedSample([1, 2, 3], [1, 3, 2])
        assert empirical_copula_process(sample, IndependenceCopula(), 1.0, 1.0) == 0.0

    def test_hand_value(self):
        sample = PairedSample([1, 2, 3], [1, 3, 2])
        got = empirical_copula_process(sample, IndependenceCopula(), 2 / 3, 2 / 3)
        assert_allclose(got, -np.sqrt(3) / 9, atol=1e-15)
