import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import kstest

from lrdresid.empproc import (Normalization, estimate_theta, eval_process, ks_sup, l_sup,
                              scale_from_theta)
from lrdresid.lrd import gaussian_family
from lrdresid.regress import fit_ls

STD = gaussian_family(1.0)


def dense_sup(sample, dist, grid):
    # one-sided limits on a fine grid plus exact values at the observations
    pts = np.concatenate([grid, sample])
    right = np.abs(eval_process(sample, dist, pts))
    left = np.abs(eval_process(sample, dist, pts, left=True))
    return max(right.max(), left.max()) / len(sample)


def test_single_point_at_median():
    res = ks_sup([0.0], STD)
    assert res.sup_value == pytest.approx(0.5, abs=1e-15)
    assert res.argmax_x == 0.0


def test_three_points_by_hand():
    res = ks_sup([-1.0, 0.0, 1.0], STD)
    # Phi(1) - 2/3, attained at both x = 1 (right limit) and x = -1 (left limit)
    assert res.sup_value == pytest.approx(0.174678079401876, abs=1e-12)
    assert res.argmax_x in (-1.0, 1.0)


@pytest.mark.parametrize("n", [1, 5, 50, 500])
def test_matches_scipy_kstest(rng, n):
    x = rng.standard_normal(n)
    assert ks_sup(x, STD).sup_value == pytest.approx(kstest(x, "norm").statistic, abs=1e-14)


def test_against_dense_grid(rng):
    x = rng.standard_normal(40) * 1.3 + 0.2
    grid = np.linspace(-8, 8, 100_000)
    assert ks_sup(x, STD).sup_value == pytest.approx(dense_sup(x, STD, grid), abs=1e-12)


def test_ties_grouped():
    x = [0.5, 0.5, 0.5, -2.0]
    grid = np.linspace(-6, 6, 20_001)
    res = ks_sup(x, STD)
    assert res.sup_value == pytest.approx(dense_sup(np.array(x), STD, grid), abs=1e-12)
    # the step at 0.5 has height 3/4: left limit 1/4, right limit 1
    assert res.argmax_x == 0.5


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32), n=st.integers(1, 200))
def test_permutation_invariance(seed, n):
    g = np.random.default_rng(seed)
    x = np.round(g.standard_normal(n), 1)  # rounding produces ties
    a = ks_sup(x, STD)
    b = ks_sup(g.permutation(x), STD)
    assert a.sup_value == b.sup_value and a.argmax_x == b.argmax_x


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32), n=st.integers(1, 200))
def test_sup_in_unit_interval(seed, n):
    x = np.random.default_rng(seed).standard_cauchy(n)
    v = ks_sup(x, STD).sup_value
    assert 0 < v <= 1


def test_residual_statistic_ignores_true_coefficients(rng):
    x = rng.uniform(-1, 1, 300)
    eps = rng.standard_normal(300)
    base = ks_sup(fit_ls(x, eps).residuals, STD).sup_value
    for b0, b1 in [(1.0, 4.0), (-3.0, 0.5), (10.0, -7.0)]:
        r = fit_ls(x, b0 + b1 * x + eps).residuals
        assert ks_sup(r, STD).sup_value == pytest.approx(base, abs=1e-12)


def test_normalizations(rng):
    x = rng.standard_normal(64)
    raw = ks_sup(x, STD).raw_sup
    assert ks_sup(x, STD, "sqrt_n").scaled_value == pytest.approx(raw / 8)
    assert ks_sup(x, STD, Normalization.BY_SIGMA_N1, sigma=4.0).scaled_value == pytest.approx(raw / 4)
    assert ks_sup(x, STD).scaled_value == pytest.approx(raw / 64)
    with pytest.raises(ValueError):
        ks_sup(x, STD, "sigma_n2")


def test_empty_sample():
    with pytest.raises(ValueError):
        ks_sup([], STD)


class TestTheta:
    def test_cases(self):
        assert estimate_theta([1.0, -1.0]) == 1.0
        assert estimate_theta([0.0, 0.0, 3.0, -3.0]) == 4.5

    def test_large_sample(self, rng):
        assert estimate_theta(rng.standard_normal(10_000)) == pytest.approx(1.0, abs=0.05)

    def test_unsupported(self):
        with pytest.raises(ValueError):
            estimate_theta([1.0, 2.0], h="cube")

    def test_degenerate(self):
        with pytest.raises(ValueError):
            scale_from_theta(estimate_theta([0.0, 0.0]))
        with pytest.raises(ValueError):
            estimate_theta([1.0])


class TestLSup:
    def test_unit_scale_equals_ks(self, rng):
        x = rng.standard_normal(100)
        assert l_sup(x, 1.0).sup_value == ks_sup(x, STD).sup_value

    @pytest.mark.parametrize("c", [0.1, 2.0, 37.0])
    def test_scale_equivariance(self, rng, c):
        x = rng.standard_normal(100)
        assert l_sup(c * x, c * 1.7).sup_value == pytest.approx(l_sup(x, 1.7).sup_value, abs=1e-14)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            l_sup([1.0, 2.0], 0.0)
        with pytest.raises(ValueError):
            l_sup([1.0, 2.0], 1.0, family="laplace")


class TestEvalProcess:
    def test_values(self):
        s = [-1.0, 0.0, 1.0]
        assert eval_process(s, STD, 0.0) == pytest.approx(2 - 1.5)
        assert eval_process(s, STD, 0.0, left=True) == pytest.approx(1 - 1.5)
        assert eval_process(s, STD, -50.0) == pytest.approx(0.0)
        assert eval_process(s, STD, 50.0) == pytest.approx(0.0)

    def test_vectorized(self):
        out = eval_process([0.0], STD, np.array([-1.0, 1.0]))
        assert out.shape == (2,)


def test_iid_mean_band():
    # 100 reps at n=100: the scaled mean sits near the Kolmogorov mean
    g = np.random.default_rng(7)
    vals = [ks_sup(g.standard_normal(100), STD).sup_value for _ in range(400)]
    assert np.sqrt(100) * np.mean(vals) == pytest.approx(0.8687, abs=0.05)
