import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import binom

from schattenest import series
from schattenest.series import (
    SeriesParams,
    beta_m,
    binomial_coeff,
    binomial_coeffs,
    c1_of_p,
    c_of_p,
    choose_params_kappa,
    choose_params_plain,
    gamma_of_p,
    h_tilde_scalar,
    h_tilde_table,
    min_m_positivity,
    min_m_tail,
    tail_bound,
)

# Float evaluation of quantities that are exact inequalities in real
# arithmetic; this absorbs summation rounding only.
ROUND = 1e-13


def _remainder_mp(p, m, x, dps=60):
    """|h_m(x)| = |1 - (1-x)^p - h_tilde_m(x)| in high precision."""
    with mpmath.workdps(dps):
        p, x = mpmath.mpf(p), mpmath.mpf(x)
        partial = mpmath.mpf(0)
        for k in range(1, m + 1):
            partial += (-1) ** (k - 1) * mpmath.binomial(p, k) * x**k
        return float(abs(1 - (1 - x) ** p - partial))


class TestBinomial:
    @pytest.mark.parametrize("p, k, expected", [(2, 1, 2.0), (2, 3, 0.0), (0.5, 2, -0.125)])
    def test_examples(self, p, k, expected):
        assert binomial_coeff(p, k) == expected

    @pytest.mark.parametrize("p", [0.3, 1.5, 2.7, 4.0])
    def test_matches_scipy(self, p):
        k = np.arange(1, 60)
        np.testing.assert_allclose(binomial_coeffs(p, 59), binom(p, k), rtol=1e-12, atol=1e-300)

    def test_array_and_scalar_agree(self):
        a = binomial_coeffs(1.7, 40)
        assert [binomial_coeff(1.7, k) for k in range(1, 41)] == pytest.approx(a, rel=1e-14)

    def test_generator_recurrence(self):
        params = SeriesParams(2.5, 12)
        coeffs = list(params.coefficients())
        assert coeffs[0] == 2.5
        for k in range(2, 13):
            assert coeffs[k - 1] == pytest.approx(coeffs[k - 2] * (2.5 - (k - 1)) / k, rel=1e-15)

    @pytest.mark.parametrize("p", [1, 2, 3, 5])
    def test_integer_p_vanishes(self, p):
        a = binomial_coeffs(p, 20)
        assert np.all(a[p:] == 0)

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            binomial_coeff(2, 0)


class TestConstants:
    def test_c1(self):
        assert c1_of_p(0.5) == 1.0
        assert c1_of_p(1.5) == 1.5
        assert c1_of_p(2) == 1.0

    def test_c(self):
        assert c_of_p(0.5) == pytest.approx(2**1.5, rel=1e-15)
        assert c_of_p(1) == 9.0
        assert c_of_p(2) == 64.0

    def test_gamma(self):
        assert gamma_of_p(1) == pytest.approx(441.0)
        assert gamma_of_p(2) == pytest.approx(math.sqrt(32) * 37**2, rel=1e-14)

    @pytest.mark.parametrize("p", [0.5, 1, 2.5, 4])
    def test_gamma_exceeds_square_factor(self, p):
        assert gamma_of_p(p) > (1 + 6**p) ** 2

    def test_c_exceeds_p_on_log_grid(self):
        for p in np.geomspace(0.01, 50, 400):
            assert c_of_p(p) > p

    @pytest.mark.parametrize("bad", [0, -1, float("nan"), float("inf")])
    def test_domain(self, bad):
        with pytest.raises(ValueError):
            c_of_p(bad)


class TestCoefficientBound:
    @pytest.mark.parametrize("p", [0.5, 1, 1.5, 2.7, 5])
    def test_bound_up_to_ten_thousand(self, p):
        kmax = 10_000
        a = np.abs(binomial_coeffs(p, kmax))
        k = np.arange(1, kmax + 1)
        mask = k > math.floor(p) + 1
        bound = c_of_p(p) * (k + 1.0) ** (-(p + 1))
        assert np.all(a[mask] <= bound[mask] * (1 + 1e-12))


class TestBetaAndTail:
    def test_beta_examples(self):
        assert beta_m(2, 9) == pytest.approx(0.32, rel=1e-15)
        assert beta_m(1, 8) == pytest.approx(1.0, rel=1e-15)

    @given(p=st.floats(0.05, 8), m=st.integers(0, 300))
    def test_beta_decreasing(self, p, m):
        m = m + series.min_truncation_order(p)
        assert beta_m(p, m + 1) < beta_m(p, m)

    def test_m_too_small(self):
        with pytest.raises(ValueError):
            beta_m(2, 3)
        with pytest.raises(ValueError):
            tail_bound(2.5, 3, 0.5)

    def test_tail_examples(self):
        assert tail_bound(2, 9, 1.0) == pytest.approx(0.32, rel=1e-15)
        assert tail_bound(0.7, 10, 0.0) == 0.0

    def test_tail_bounds_high_precision_remainder(self):
        assert _remainder_mp(0.5, 50, 0.9) <= tail_bound(0.5, 50, 0.9)

    @pytest.mark.parametrize("p, m, x", [(1.5, 10, 0.99), (0.25, 40, 1.0), (3.3, 8, -0.8), (2.2, 30, 0.6)])
    def test_tail_bounds_remainder_more(self, p, m, x):
        assert _remainder_mp(p, m, x) <= tail_bound(p, m, x)


class TestHTilde:
    def test_exact_truncation(self):
        assert h_tilde_scalar(SeriesParams(2, 2), 0.5) == 0.75
        assert h_tilde_scalar(SeriesParams(2, 7), 0.5) == 0.75

    def test_zero(self):
        assert h_tilde_scalar(SeriesParams(1.3, 9), 0.0) == 0.0

    def test_half_power(self):
        got = h_tilde_scalar(SeriesParams(0.5, 200), 0.5)
        assert abs(got - (1 - math.sqrt(0.5))) <= tail_bound(0.5, 200, 0.5) + ROUND
        assert got == pytest.approx(0.2928932, abs=1e-7)

    def test_table_matches_scalar(self):
        x = np.linspace(-1, 1, 11)
        table = h_tilde_table(1.7, 25, x)
        for m in (1, 5, 25):
            np.testing.assert_allclose(table[m - 1], h_tilde_scalar(SeriesParams(1.7, m), x), atol=1e-15)

    def test_rejects_outside_unit_interval(self):
        with pytest.raises(ValueError):
            h_tilde_scalar(SeriesParams(2, 3), 1.5)

    @pytest.mark.parametrize("p", [1, 2, 3, 4])
    def test_integer_exact_truncation_grid(self, p):
        x = np.linspace(0, 1, 1001)
        table = h_tilde_table(p, 12, x)
        for m in range(p, 13):
            np.testing.assert_allclose(table[m - 1], 1 - (1 - x) ** p, atol=1e-12, rtol=0)


class TestSeriesIdentityAndPositivity:
    @pytest.mark.parametrize("p", [0.3, 0.5, 1, 1.5, 2.7, 5])
    def test_remainder_within_tail_bound(self, p):
        x = np.linspace(0, 1, 200, endpoint=False)
        m0 = series.min_truncation_order(p)
        table = h_tilde_table(p, 500, x)
        exact = 1 - (1 - x) ** p
        for m in range(m0, 501):
            err = np.abs(table[m - 1] - exact)
            assert np.all(err <= tail_bound(p, m, x) + ROUND), m

    @pytest.mark.parametrize("p", [0.3, 0.5, 1, 1.5, 2.7, 5])
    def test_shifted_polynomial_dominates(self, p):
        x = np.linspace(0, 1, 501)
        m0 = series.min_truncation_order(p)
        table = h_tilde_table(p, 400, x)
        target = (1 - x) ** p
        for m in list(range(m0, m0 + 20)) + [100, 250, 400]:
            lhs = 1 + beta_m(p, m) - table[m - 1]
            assert np.all(lhs >= target - ROUND), m
        assert np.all(target >= 0)


class TestMSelection:
    def test_positivity_example(self):
        a = 1 - 1 / 60
        assert min_m_positivity(2, a) <= 60 * (math.log(32) + 2 * math.log(60)) + 1

    @pytest.mark.parametrize("p, a", [(0.5, 0.5), (1.5, 0.9), (2.7, 0.95), (0.9, 0.99)])
    def test_positivity_grid(self, p, a):
        m = min_m_positivity(p, a)
        x = np.arange(1, int(round(a * 1000)) + 1) * 1e-3
        x = x[x <= a]
        assert np.all(1 - h_tilde_scalar(SeriesParams(p, m), x) > 0)

    @given(p=st.floats(0.05, 10), a=st.floats(0.01, 0.99))
    def test_positivity_floor_clamp(self, p, a):
        assert min_m_positivity(p, a) > math.floor(p) + 1

    def test_tail_example(self):
        bound = 60 * (2 * math.log(60) + math.log(10) + math.log(32)) - 1
        assert min_m_tail(2, 1 / 60, 0.1) == math.floor(bound) + 1

    @pytest.mark.parametrize("p, a, eps", [(2, 1 / 60, 0.1), (1.5, 0.1, 0.01), (0.5, 0.2, 0.05), (3.5, 0.25, 0.1)])
    def test_tail_grid(self, p, a, eps):
        m = min_m_tail(p, a, eps)
        x = np.arange(a, 1.0 + 1e-12, 1e-3)
        remainder = 1 - x**p - h_tilde_scalar(SeriesParams(p, m), 1 - x)
        assert np.max(np.abs(remainder) / x**p) < eps

    @given(p=st.floats(0.1, 5), a=st.floats(0.01, 0.9), e1=st.floats(0.001, 0.9), e2=st.floats(0.001, 0.9))
    def test_tail_monotone_in_eps(self, p, a, e1, e2):
        small, large = sorted((e1, e2))
        assert min_m_tail(p, a, small) >= min_m_tail(p, a, large)


class TestChooseParams:
    def test_plain_m(self):
        assert choose_params_plain(2, 100, 0.1, 0.3).m == 2169

    def test_plain_t(self):
        assert choose_params_plain(2, 100, 0.5, 0.01).t == 170
        assert math.ceil(32 * math.log(200)) == 170

    def test_rigorous_factor(self):
        prac = choose_params_plain(1, 20, 0.3, 0.1)
        rig = choose_params_plain(1, 20, 0.3, 0.1, rigor="rigorous")
        assert rig.t == 49 * prac.t
        assert rig.m == prac.m

    def test_kappa_m(self):
        assert choose_params_kappa(2, 10, 0.1, 0.1).m == 904

    def test_kappa_one(self):
        choice = choose_params_kappa(1, 1, 0.5, 0.1)
        expected = math.floor(6 * (math.log(6) + math.log(6) + math.log(9))) + 1
        assert choice.m == expected

    def test_kappa_rigorous_factor(self):
        prac = choose_params_kappa(1.5, 5, 0.2, 0.1)
        assert choose_params_kappa(1.5, 5, 0.2, 0.1, rigor="rigorous").t == 9 * prac.t

    def test_kappa_linear_growth(self):
        m1 = choose_params_kappa(2, 1e5, 0.1, 0.1).m
        m2 = choose_params_kappa(2, 2e5, 0.1, 0.1).m
        assert m2 / m1 == pytest.approx(2.0, rel=0.1)

    @given(p=st.floats(0.2, 6), kappa=st.floats(1, 1e4), eps=st.floats(0.01, 0.99))
    @settings(max_examples=60)
    def test_kappa_satisfies_both_bounds(self, p, kappa, eps):
        m = choose_params_kappa(p, kappa, eps, 0.1).m
        a = 1 / (6 * kappa)
        assert m >= min_m_positivity(p, 1 - a)
        assert m >= min_m_tail(p, a, eps)
        assert m > math.floor(p) + 1

    @pytest.mark.parametrize("kwargs", [
        dict(p=0, n=10, eps=0.1, delta=0.1),
        dict(p=2, n=0, eps=0.1, delta=0.1),
        dict(p=2, n=10, eps=1.0, delta=0.1),
        dict(p=2, n=10, eps=0.1, delta=0.0),
        dict(p=2, n=10, eps=0.1, delta=0.1, rigor="loose"),
    ])
    def test_plain_domain(self, kwargs):
        with pytest.raises(ValueError):
            choose_params_plain(**kwargs)

    def test_kappa_domain(self):
        with pytest.raises(ValueError):
            choose_params_kappa(2, 0.5, 0.1, 0.1)
