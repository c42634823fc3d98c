import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import rel
from polya.specfun import (
    BESSEL_CROSSOVER,
    bessel_i,
    bessel_i_asymptotic_coeffs,
    gamma_product_u3,
    log_gamma,
    log_pochhammer_seq,
    pochhammer,
    upper_incomplete_gamma,
)
from polya.specfun import _bessel_asymptotic, _bessel_series


class TestLogGamma:
    def test_one(self):
        assert log_gamma(1.0) == 0.0

    def test_half(self):
        assert rel(log_gamma(0.5), math.log(math.sqrt(math.pi))) < 1e-15

    def test_24_5_product_oracle(self, golden):
        assert rel(log_gamma(24.5), float(golden["log_gamma_24_5"])) < 1e-14

    def test_mpmath_grid(self, golden):
        for x, ref in golden["log_gamma"]:
            ref = float(ref)
            got = log_gamma(x)
            if ref == 0.0:
                assert abs(got) < 1e-15
            else:
                assert rel(got, ref) < 1e-14, x

    def test_vectorised_matches_scalar(self):
        xs = np.array([0.01, 0.7, 3.3, 42.0])
        assert np.array_equal(log_gamma(xs), [log_gamma(float(v)) for v in xs])

    @pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
    def test_domain(self, x):
        with pytest.raises(ValueError):
            log_gamma(x)

    @given(st.floats(1e-3, 1e6))
    def test_agrees_with_math_lgamma(self, x):
        ref = math.lgamma(x)
        assert abs(log_gamma(x) - ref) <= 1e-13 * max(1.0, abs(ref))

    def test_duplication(self):
        for k in range(41):
            lhs = math.exp(log_gamma(2 * k + 1.0))
            rhs = 2.0 ** (2 * k) * math.exp(log_gamma(k + 0.5) + log_gamma(k + 1.0)) / math.sqrt(math.pi)
            assert rel(lhs, rhs) < 1e-12, k


class TestPochhammer:
    @pytest.mark.parametrize("n", [0, 1, 5, 12, 20])
    def test_factorial(self, n):
        assert rel(pochhammer(1.0, n), math.factorial(n)) < 1e-15

    def test_half_two(self):
        assert pochhammer(0.5, 2) == 0.75

    def test_gamma_ratio(self):
        ref = math.exp(log_gamma(10.5) - log_gamma(0.5))
        assert rel(pochhammer(0.5, 10), ref) < 1e-14

    def test_large_k_log_space(self):
        assert rel(pochhammer(0.5, 1000, log=True), log_gamma(1000.5) - log_gamma(0.5)) < 1e-14

    def test_overflow(self):
        with pytest.raises(OverflowError):
            pochhammer(1.0, 200)
        assert math.isfinite(pochhammer(1.0, 200, log=True))

    def test_negative_argument(self):
        assert pochhammer(-2.5, 3) == pytest.approx(-2.5 * -1.5 * -0.5, rel=1e-15)
        assert pochhammer(-2.0, 4) == 0.0

    @given(st.floats(0.01, 50.0), st.integers(0, 200))
    def test_recurrence(self, f, k):
        lhs = pochhammer(f, k + 1, log=True)
        rhs = pochhammer(f, k, log=True) + math.log(f + k)
        assert abs(lhs - rhs) <= 1e-13 * max(1.0, abs(lhs))

    def test_seq_cumulative(self):
        logs, signs = log_pochhammer_seq(0.5, 5)
        assert np.all(signs == 1.0)
        assert rel(math.exp(logs[2]), 0.75) < 1e-15


class TestBessel:
    def test_zero(self):
        assert bessel_i(0.0, 0.0) == 1.0
        assert bessel_i(1.5, 0.0) == 0.0

    def test_series_oracle_at_one(self, golden):
        assert rel(bessel_i(0.0, 1.0), float(golden["bessel_i0_at_1_series"])) < 1e-15

    def test_large_scaled(self):
        # no overflow, and the leading asymptotic terms
        x = 500.0
        approx = (2 * math.pi * x) ** -0.5 * (1 + 1 / (8 * x) + 9 / (128 * x * x))
        got = bessel_i(0.0, x, scaled=True)
        assert math.isfinite(got)
        assert rel(got, approx) < 1e-8

    def test_mpmath_grid(self, golden):
        for nu, x, ref, ref_scaled in golden["bessel_i"]:
            ref, ref_scaled = float(ref), float(ref_scaled)
            if ref_scaled == 0.0:
                assert bessel_i(nu, x, scaled=True) == 0.0
                continue
            assert rel(bessel_i(nu, x, scaled=True), ref_scaled) < 1e-13, (nu, x)
            if x <= 500.0 and math.isfinite(ref) and ref != 0.0:
                assert rel(bessel_i(nu, x), ref) < 1e-13, (nu, x)

    def test_crossover_continuity(self):
        # both representations evaluated at the same points around the switch
        x = BESSEL_CROSSOVER * np.array([0.999, 1.0, 1.001])
        for nu in (0.0, 0.5, 2.0):
            total, lead = _bessel_series(nu, x)
            series = np.exp(lead - x) * total
            asym = _bessel_asymptotic(nu, x)
            assert np.all(np.abs(series / asym - 1) < 1e-12)

    def test_scaled_i0_shape(self):
        x = np.linspace(0.0, 300.0, 3001)
        y = bessel_i(0.0, x, scaled=True)
        assert y[0] == 1.0
        assert np.all((y > 0) & (y <= 1.0))
        assert np.all(np.diff(y) < 0)

    @pytest.mark.parametrize("nu,x", [(-1.0, 1.0), (-1.5, 1.0), (0.0, -0.1)])
    def test_domain(self, nu, x):
        with pytest.raises(ValueError):
            bessel_i(nu, x)

    def test_asymptotic_coeffs(self):
        c = bessel_i_asymptotic_coeffs(0.0, 3)
        assert np.allclose(c, [1.0, 1 / 8, 9 / 128, 225 / 3072], rtol=1e-15)
        # nu = 1/2 terminates: e^{-x} I_{1/2}(x) = (1 - e^{-2x}) / sqrt(2 pi x)
        assert np.allclose(bessel_i_asymptotic_coeffs(0.5, 4)[1:], 0.0)


class TestGammaProduct:
    def test_value(self, golden):
        u = gamma_product_u3()
        assert rel(u, float(golden["u3_gamma_product"])) < 1e-14
        assert 1.5 < u < 1.6
        assert abs(u - 1.5163860592) < 5e-11

    def test_return_probability(self):
        assert abs(1 - 1 / gamma_product_u3() - 0.3405373296) < 5e-11


class TestIncompleteGamma:
    def test_mpmath_grid(self, golden):
        for s, z, ref in golden["upper_incomplete_gamma"]:
            assert rel(upper_incomplete_gamma(s, z), float(ref)) < 1e-12, (s, z)

    def test_exponential(self):
        assert rel(upper_incomplete_gamma(1.0, 2.0), math.exp(-2.0)) < 1e-15

    def test_domain(self):
        with pytest.raises(ValueError):
            upper_incomplete_gamma(1.0, 0.0)
