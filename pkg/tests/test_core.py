import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_dataset
from sfr.core import (
    Dataset,
    NeumaierSum,
    draw_fittable_subsamples,
    fit_ols,
    fit_subsamples,
    fit_wls,
    pairs_bootstrap,
    solve_lstsq,
    summarize_replicates,
    two_sided_normal_p,
)
from sfr.errors import DegenerateWeights, RankDeficient, TooManyFailures, ValidationError


def normal_equations(A, y, w=None):
    """Independent oracle: solve (A' W A) b = A' W y directly."""
    w = np.ones(len(y)) if w is None else w
    AtW = A.T * w
    return np.linalg.solve(AtW @ A, AtW @ y)


@st.composite
def datasets(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(5, 60))
    p = draw(st.integers(1, 3))
    intercept = draw(st.booleans())
    rng = np.random.default_rng(seed)
    return random_dataset(rng, n=max(n, p + 4), p=p, intercept=intercept)


class TestDataset:
    def test_design_has_intercept_first(self):
        d = Dataset([1.0, 2, 3, 4], [[1.0], [2], [3], [5]], ("a",))
        assert d.k == 2 and d.coef_names == ("intercept", "a")
        np.testing.assert_array_equal(d.design[:, 0], 1.0)

    def test_too_few_rows(self):
        with pytest.raises(ValidationError):
            Dataset([1.0, 2], [[1.0], [2]])

    def test_non_finite(self):
        with pytest.raises(ValidationError):
            Dataset([1.0, np.nan, 3, 4], [[1.0], [2], [3], [4]])

    def test_arrays_are_read_only(self):
        d = Dataset([1.0, 2, 3, 4], [[1.0], [2], [3], [5]])
        with pytest.raises(ValueError):
            d.y[0] = 5.0

    def test_take_repeats_rows(self):
        d = Dataset([1.0, 2, 3, 4], [[1.0], [2], [3], [5]])
        t = d.take([0, 0, 3, 3])
        np.testing.assert_array_equal(t.y, [1, 1, 4, 4])


class TestLeastSquares:
    @settings(max_examples=50, deadline=None)
    @given(datasets())
    def test_ols_matches_normal_equations(self, data):
        np.testing.assert_allclose(
            fit_ols(data).coefficients, normal_equations(data.design, data.y), rtol=1e-8, atol=1e-8
        )

    @settings(max_examples=50, deadline=None)
    @given(datasets(), st.integers(0, 2**32 - 1))
    def test_wls_matches_normal_equations(self, data, wseed):
        w = np.random.default_rng(wseed).uniform(0.1, 2.0, data.n)
        np.testing.assert_allclose(
            fit_wls(data, w).coefficients, normal_equations(data.design, data.y, w), rtol=1e-7, atol=1e-8
        )

    @settings(max_examples=50, deadline=None)
    @given(datasets())
    def test_unit_weights_equal_ols(self, data):
        np.testing.assert_allclose(
            fit_wls(data, np.ones(data.n)).coefficients, fit_ols(data).coefficients, atol=1e-10, rtol=0
        )

    @settings(max_examples=30, deadline=None)
    @given(datasets(), st.integers(0, 2**32 - 1))
    def test_zero_weights_discard_rows(self, data, wseed):
        rng = np.random.default_rng(wseed)
        w = rng.uniform(0.5, 1.5, data.n)
        w[rng.permutation(data.n)[:2]] = 0.0
        keep = w > 0
        A, y = data.design[keep], data.y[keep]
        np.testing.assert_allclose(
            fit_wls(data, w).coefficients, normal_equations(A, y, w[keep]), rtol=1e-7, atol=1e-8
        )

    def test_residuals_cover_all_rows(self):
        data = random_dataset(np.random.default_rng(1))
        w = np.ones(data.n)
        w[:3] = 0
        fit = fit_wls(data, w)
        np.testing.assert_allclose(fit.residuals, data.y - data.design @ fit.coefficients)

    def test_weight_scale_invariance(self):
        data = random_dataset(np.random.default_rng(2))
        w = np.random.default_rng(3).uniform(0.1, 1, data.n)
        np.testing.assert_allclose(fit_wls(data, w).coefficients, fit_wls(data, 7.5 * w).coefficients, atol=1e-10)

    def test_rank_deficient(self):
        x = np.arange(6.0)
        data = Dataset(x + 1, np.column_stack([x, 2 * x]))
        with pytest.raises(RankDeficient):
            fit_ols(data)

    def test_negative_or_too_few_weights(self):
        data = random_dataset(np.random.default_rng(4))
        with pytest.raises(ValidationError):
            fit_wls(data, -np.ones(data.n))
        w = np.zeros(data.n)
        w[:2] = 1
        with pytest.raises(DegenerateWeights):
            fit_wls(data, w)

    def test_solve_lstsq_exact(self):
        A = np.array([[1.0, 0], [1, 1], [1, 2]])
        np.testing.assert_allclose(solve_lstsq(A, A @ [2.0, -3.0]), [2, -3], atol=1e-12)


class TestSubsampleFits:
    def test_batched_matches_individual(self):
        data = random_dataset(np.random.default_rng(5), n=30, p=2)
        rng = np.random.default_rng(6)
        idx = np.array([rng.choice(30, 4, replace=False) for _ in range(20)])
        coef, ok = fit_subsamples(data.design, data.y, idx)
        assert ok.all()
        for i in range(20):
            np.testing.assert_allclose(coef[i], np.linalg.lstsq(data.design[idx[i]], data.y[idx[i]], rcond=None)[0], atol=1e-9)

    def test_flags_singular_subsets(self):
        x = np.array([1.0, 1.0, 2.0, 3.0])
        design = np.column_stack([np.ones(4), x])
        _, ok = fit_subsamples(design, x, np.array([[0, 1], [0, 2]]))
        assert ok.tolist() == [False, True]

    def test_redraws_replace_singular_draws(self):
        # Half the rows share x = 0, so many size-2 draws are singular.
        x = np.r_[np.zeros(10), np.arange(1.0, 11)]
        design = np.column_stack([np.ones(20), x])
        idx, coef, ok = draw_fittable_subsamples(design, x, 2, 3, (1,), 0, 200, 100)
        assert ok.all()
        assert all(len(set(x[r])) == 2 for r in idx)

    def test_window_independence(self):
        data = random_dataset(np.random.default_rng(7))
        a = draw_fittable_subsamples(data.design, data.y, 4, 11, (1,), 0, 50, 10)[0]
        b = draw_fittable_subsamples(data.design, data.y, 4, 11, (1,), 20, 50, 10)[0]
        np.testing.assert_array_equal(a[20:], b)


def _ols_est(d, seed):
    return fit_ols(d).coefficients


class TestBootstrap:
    def test_deterministic_across_threads(self):
        data = random_dataset(np.random.default_rng(8))
        a = pairs_bootstrap(data, _ols_est, 50, 3, n_jobs=1)
        b = pairs_bootstrap(data, _ols_est, 50, 3, n_jobs=4)
        np.testing.assert_array_equal(a.replicate_estimates, b.replicate_estimates)

    def test_normal_interval(self):
        data = random_dataset(np.random.default_rng(9))
        res = pairs_bootstrap(data, _ols_est, 100, 0)
        np.testing.assert_allclose(res.ci_upper - res.point_estimate, 1.96 * res.standard_errors)
        np.testing.assert_allclose(res.standard_errors, res.replicate_estimates.std(axis=0, ddof=1))

    def test_failed_replicates_are_dropped(self):
        data = random_dataset(np.random.default_rng(10))
        def flaky(d, seed):
            if seed % 4 == 0:
                raise RankDeficient("synthetic")
            return fit_ols(d).coefficients

        res = pairs_bootstrap(data, flaky, 40, 1)
        assert res.b_effective == 40 - len(res.failed)
        assert len(res.failed) > 0

    def test_too_many_failures(self):
        point = np.zeros(2)
        draws = np.full((10, 2), np.nan)
        draws[:4] = 1.0
        with pytest.raises(TooManyFailures):
            summarize_replicates(point, draws, 10)

    def test_percentile_interval(self):
        draws = np.arange(101.0)[:, None]
        res = summarize_replicates(np.array([50.0]), draws, 101, "percentile")
        assert res.ci_lower[0] == pytest.approx(2.5) and res.ci_upper[0] == pytest.approx(97.5)


def test_two_sided_p():
    assert two_sided_normal_p(1.959963984540054) == pytest.approx(0.05, abs=1e-12)
    assert two_sided_normal_p(0.0) == 1.0
    assert math.isnan(two_sided_normal_p(float("nan")))


def test_neumaier_sum_compensates():
    s = NeumaierSum(np.zeros(1))
    for v in (1e16, 1.0, -1e16):
        s.add(np.array([v]))
    assert s.value[0] == 1.0


def test_boston_ols_slope(boston):
    assert fit_ols(boston).coefficients[1] == pytest.approx(0.54880478, abs=1e-7)
