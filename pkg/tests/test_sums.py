import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lrdresid.lrd import ErrorPath, gaussian_family, gen_ma_path, make_spec
from lrdresid.streams import StreamKey, make_stream
from lrdresid.sums import (RateStudyResult, eps_n2_bruteforce, eps_nr, rate_slope, reduction_diag,
                           sigma_n1_exact, sigma_nr_asymptotic, xi_series)


def _path(alpha, n, m, eta):
    return gen_ma_path(make_spec(alpha, truncation_m=m), n, innovations=np.asarray(eta, float))


class TestEpsNr:
    def test_zero_innovations(self):
        assert eps_nr(_path(0.3, 10, 8, np.zeros(18)), 2) == 0.0

    def test_first_order_is_sum(self, stream):
        path = gen_ma_path(make_spec(0.3, truncation_m=30), 40, stream)
        assert eps_nr(path, 1) == pytest.approx(path.values.sum(), rel=1e-15)

    def test_hand_case(self):
        eta = np.array([0.5, -1.0, 2.0, 0.25, -0.75, 1.5, 0.1])  # eta_{-2}..eta_4
        path = _path(0.4, 4, 3, eta)
        assert eps_nr(path, 2) == pytest.approx(eps_n2_bruteforce(path), rel=1e-12)

    def test_hand_expansion_two_lags(self):
        # M = 2: sum_i c1 c2 eta_{i-1} eta_{i-2}
        eta = np.array([1.0, 2.0, 3.0, 4.0])  # eta_{-1}, eta_0, eta_1, eta_2
        path = _path(0.5, 2, 2, eta)
        c = path.spec.coefficients
        sd2 = path.spec.innovation_sd ** 2
        expected = sd2 * c[1] * c[2] * (2.0 * 1.0 + 3.0 * 2.0)
        assert eps_nr(path, 2) == pytest.approx(expected, rel=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(n=st.integers(1, 32), m=st.integers(0, 64), alpha=st.floats(0.05, 0.95),
           seed=st.integers(0, 2 ** 32))
    def test_fast_equals_bruteforce(self, n, m, alpha, seed):
        eta = np.random.default_rng(seed).standard_normal(n + m)
        path = _path(alpha, n, m, eta)
        fast, slow = eps_nr(path, 2), eps_n2_bruteforce(path)
        assert abs(fast - slow) <= 1e-10 * max(abs(slow), 1e-12)

    def test_fft_branch_matches_direct(self, stream):
        # large enough to take the FFT route inside eps_nr
        path = gen_ma_path(make_spec(0.3, truncation_m=2000), 300, stream)
        eta = path.innovations * path.spec.innovation_sd
        c = path.spec.coefficients
        lagged = np.convolve(eta, np.r_[0.0, c[1:]], mode="valid")
        diag = np.convolve(eta ** 2, np.r_[0.0, c[1:] ** 2], mode="valid")
        assert eps_nr(path, 2) == pytest.approx(0.5 * np.sum(lagged ** 2 - diag), rel=1e-9)

    def test_needs_innovations(self):
        from lrdresid.lrd import gen_fgn_path

        path = gen_fgn_path(0.3, 10, make_stream(StreamKey(0, 0)))
        with pytest.raises(ValueError, match="innovations"):
            eps_nr(path, 2)

    def test_bad_order(self, stream):
        path = gen_ma_path(make_spec(0.3, truncation_m=5), 5, stream)
        with pytest.raises(ValueError):
            eps_nr(path, 3)


class TestXi:
    def test_pure_noise(self, stream):
        path = gen_ma_path(make_spec(0.3, truncation_m=0), 25, stream)
        np.testing.assert_allclose(xi_series(path), 0.0, atol=1e-15)

    def test_reconstruction(self, stream):
        path = gen_ma_path(make_spec(0.3, truncation_m=40), 60, stream)
        # (a - b) + b equals a up to one rounding
        np.testing.assert_allclose(xi_series(path) + path.scaled_innovations(), path.values,
                                   rtol=0, atol=4.5e-16)

    def test_variance(self):
        n, reps = 256, 400
        spec = make_spec(0.3, n=n)
        draws = np.concatenate([xi_series(gen_ma_path(spec, n, make_stream(StreamKey(3, r))))
                                for r in range(reps)])
        target = 1.0 - spec.innovation_sd ** 2
        # paths are long-range dependent: allow a generous MC margin
        assert draws.var() == pytest.approx(target, abs=0.05)


class TestSigma:
    def test_iid_case(self):
        spec = make_spec(0.3, truncation_m=0)
        for n in (1, 7, 100):
            assert sigma_n1_exact(spec, n) == pytest.approx(np.sqrt(n), rel=1e-14)

    def test_hand_case(self):
        spec = make_spec(0.4, truncation_m=1)
        c, sd = spec.coefficients, spec.innovation_sd
        g0, g1 = sd ** 2 * (1 + c[1] ** 2), sd ** 2 * c[1]
        assert sigma_n1_exact(spec, 3) == pytest.approx(np.sqrt(3 * g0 + 4 * g1), rel=1e-14)
        assert sigma_n1_exact(spec, 3) == pytest.approx(np.sqrt(5.0), rel=1e-14)

    def test_matches_brute_force_variance(self):
        spec = make_spec(0.35, truncation_m=30)
        n = 12
        c, sd = spec.coefficients, spec.innovation_sd
        # sum_i eps_i = sd * sum_t w_t eta_t with w_t the number of (i, k) hitting t
        w = np.zeros(n + 30)
        for i in range(n):
            for k in range(31):
                w[i + 30 - k] += c[k]
        assert sigma_n1_exact(spec, n) == pytest.approx(sd * np.linalg.norm(w), rel=1e-12)

    def test_growth_exponent(self):
        ns = [2 ** k for k in range(10, 17)]
        var = [sigma_n1_exact(make_spec(0.2, truncation_m=10 * n), n) ** 2 for n in ns]
        slope, _ = rate_slope(ns, var)
        assert slope == pytest.approx(1.8, abs=0.05)

    def test_fgn_closed_form(self):
        spec = make_spec(0.4, "fgn")
        assert sigma_n1_exact(spec, 1000) == pytest.approx(1000 ** 0.8)

    def test_asymptotic_formula(self):
        assert sigma_nr_asymptotic(0.3, 10 ** 4, 2) == pytest.approx(10 ** 2.8, rel=1e-12)
        assert sigma_nr_asymptotic(0.6, 50, 1) == pytest.approx(50 ** 0.7)
        n = np.array([10.0, 1e3, 1e6])
        ratio = sigma_nr_asymptotic(0.3, n, 1) ** 2 / n / sigma_nr_asymptotic(0.3, n, 2)
        np.testing.assert_allclose(ratio, 1.0, rtol=1e-12)

    @pytest.mark.parametrize("alpha,r", [(0.5, 2), (0.7, 2)])
    def test_asymptotic_domain(self, alpha, r):
        with pytest.raises(ValueError):
            sigma_nr_asymptotic(alpha, 100, r)

    @pytest.mark.slow
    def test_second_order_scaling_is_tight(self):
        out = []
        for n in (1024, 2048, 4096, 8192):
            spec = make_spec(0.3, n=n)
            vals = [eps_nr(gen_ma_path(spec, n, make_stream(StreamKey(8, r))), 2) for r in range(300)]
            out.append(np.std(vals) / sigma_nr_asymptotic(0.3, n, 2))
        assert max(out) / min(out) < 2.0
        assert min(out) > 0


class TestReductionDiag:
    def test_empty(self):
        path = ErrorPath(values=np.zeros(0), spec=make_spec(0.3, truncation_m=3),
                         innovations=np.zeros(3))
        assert reduction_diag(path, gaussian_family(1.0)) == 0.0

    def test_three_points_by_hand(self):
        from scipy.stats import norm

        vals = np.array([-0.5, 0.2, 1.1])
        path = ErrorPath(values=vals, spec=make_spec(0.3, "fgn"))
        s1 = vals.sum()
        best = 0.0
        for k, x in enumerate(vals):
            smooth = -3 * norm.cdf(x) + norm.pdf(x) * s1
            best = max(best, abs(k + 1 + smooth), abs(k + smooth))
        grid = np.linspace(-1.5, 2.1, 512)
        for x in grid:
            best = max(best, abs(np.sum(vals <= x) - 3 * norm.cdf(x) + norm.pdf(x) * s1))
        assert reduction_diag(path, gaussian_family(1.0), 1, grid) == pytest.approx(best, rel=1e-13)

    def test_second_order_adds_term(self, stream):
        path = gen_ma_path(make_spec(0.3, truncation_m=50), 40, stream)
        a = reduction_diag(path, gaussian_family(1.0), 1)
        b = reduction_diag(path, gaussian_family(1.0), 2)
        assert a != b


class TestRateSlope:
    def test_exact_power_law(self):
        n = np.array([100, 200, 400, 1600])
        slope, se = rate_slope(n, 3.7 * n ** -0.25)
        assert slope == pytest.approx(-0.25, abs=1e-12)
        assert se == pytest.approx(0.0, abs=1e-12)

    def test_constant(self):
        slope, _ = rate_slope([10, 20, 30], [2.0, 2.0, 2.0])
        assert slope == pytest.approx(0.0, abs=1e-14)

    def test_from_exact_sigma(self):
        ns = [2 ** k for k in range(9, 14)]
        d = [sigma_n1_exact(make_spec(0.3, n=n), n) / n for n in ns]
        slope, _ = rate_slope(ns, d)
        assert slope == pytest.approx(-0.15, abs=0.02)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            rate_slope([1, 2, 3], [1.0, 0.0, 1.0])

    def test_too_short(self):
        with pytest.raises(ValueError):
            rate_slope([1, 2], [1.0, 2.0])

    def test_result_reproducible(self):
        res = RateStudyResult.from_grid("Kn", [10, 20, 40], [1.0, 0.8, 0.7])
        assert (res.slope, res.slope_se) == rate_slope(res.n_grid, res.dispersions)
