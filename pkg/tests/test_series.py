import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import rel
from polya.errors import ConstraintError, ConvergenceWarning, DivergenceError
from polya.quad import u_quadrature
from polya.series import (
    LauricellaParams,
    Method,
    SeriesConfig,
    lauricella_fc,
    return_probability,
    sum_multi_coeff,
    u_series,
    u_terms,
)
from polya.specfun import gamma_product_u3

U3 = 1.5163860592
P3 = 0.3405373296


class TestConfig:
    @pytest.mark.parametrize("tol", [0.0, 1.0, -1e-3])
    def test_tolerance_range(self, tol):
        with pytest.raises(ValueError):
            SeriesConfig(tolerance=tol)

    def test_params_length(self):
        with pytest.raises(ConstraintError) as info:
            LauricellaParams(1, 0.5, (1, 1), (0.1,))
        assert info.value.hypothesis == "argument"

    @pytest.mark.parametrize("c", [0.0, -1.0, -3.0])
    def test_params_nonpositive_c(self, c):
        with pytest.raises(ConstraintError):
            LauricellaParams(1, 0.5, (c,), (0.1,))

    def test_params_noninteger_negative_c_ok(self):
        assert LauricellaParams(1, 0.5, (-0.5,), (0.1,)).d == 1


class TestMultiCoeff:
    def test_d1(self):
        t = sum_multi_coeff(1, 15)
        for n in range(16):
            assert rel(t[n], 1 / math.factorial(n) ** 2) < 1e-14

    def test_d2_n3(self):
        assert rel(sum_multi_coeff(2, 3)[3], 20 / 36) < 1e-15

    def test_d2_central_binomial(self):
        t = sum_multi_coeff(2, 30)
        for n in range(31):
            assert rel(t[n], math.comb(2 * n, n) / math.factorial(n) ** 2) < 1e-13

    def test_d3_zero(self):
        assert sum_multi_coeff(3, 0)[0] == 1.0

    def test_brute_force(self, golden):
        for d, rows in golden["log_multi_coeff"].items():
            t = sum_multi_coeff(int(d), 10)
            for n, ref in enumerate(rows):
                ref = float(ref)
                got = t.log_coeffs[n]
                assert abs(got - ref) <= 1e-13 * max(1.0, abs(ref)), (d, n)

    def test_large_table_finite_positive(self):
        t = sum_multi_coeff(5, 5000)
        assert np.all(np.isfinite(t.log_coeffs))
        assert t.n_max == 5000


class TestUSeries:
    def test_u3(self):
        res = u_series(3)
        assert rel(res.value, U3) < 1e-9
        assert rel(res.value, gamma_product_u3()) < 1e-10
        assert res.error_estimate >= 0
        assert res.value > 1

    def test_first_term(self):
        res = u_series(3, SeriesConfig(n_max=0, tail_model=False))
        assert res.value == 1.0

    def test_u4_vs_quadrature(self):
        assert rel(u_series(4).value, u_quadrature(4).value) < 1e-9

    @pytest.mark.parametrize("d", [1, 2])
    def test_divergent(self, d):
        with pytest.raises(DivergenceError, match="not convergent"):
            u_series(d)

    def test_terms_positive_partial_sums_increase(self):
        for d in (3, 4, 7):
            t = u_terms(d, 2000)
            assert np.all(t > 0)
            assert np.all(np.diff(np.cumsum(t)) > 0)

    def test_monotone_in_d(self):
        us = [u_series(d, SeriesConfig(tolerance=1e-9)).value for d in range(3, 11)]
        assert all(a > b for a, b in zip(us, us[1:]))
        assert all(u > 1 for u in us)

    @pytest.mark.parametrize("d", [3, 4, 5])
    def test_tail_model_honesty(self, d):
        n = 2000
        a = u_series(d, SeriesConfig(tolerance=1e-15, n_max=n))
        b = u_series(d, SeriesConfig(tolerance=1e-15, n_max=4 * n))
        assert abs(a.value - b.value) <= 10 * a.error_estimate

    def test_tail_off_is_plain_partial_sum(self):
        n = 50
        res = u_series(3, SeriesConfig(n_max=n, tail_model=False, tolerance=1e-15))
        assert rel(res.value, math.fsum(u_terms(3, n))) < 1e-14


class TestLauricella:
    def test_zero_arguments(self):
        assert lauricella_fc(LauricellaParams(1, 0.5, (1, 1), (0, 0))) == 1.0

    def test_reduction_point(self):
        params = LauricellaParams(1, 0.5, (1, 1, 1), (1 / 9, 1 / 9, 1 / 9))
        assert rel(lauricella_fc(params), gamma_product_u3()) < 1e-10

    def test_rounded_reduction_point(self):
        params = LauricellaParams(1, 0.5, (1, 1, 1), (0.1111111111,) * 3)
        assert abs(lauricella_fc(params) - 1.51637778928) < 1e-10

    def test_2f1_two_log_two(self):
        params = LauricellaParams(1, 1, (2,), (0.5,))
        val, info = lauricella_fc(params, full_output=True)
        assert abs(val - 2 * math.log(2)) <= info["error_estimate"]
        assert rel(val, 2 * math.log(2)) < 1e-10
        tight = lauricella_fc(params, SeriesConfig(tolerance=1e-14))
        assert rel(tight, 2 * math.log(2)) < 1e-14

    def test_2f1_oracle(self, golden):
        for a, b, c, x, ref in golden["hyp2f1"]:
            val = lauricella_fc(LauricellaParams(a, b, (c,), (x,)), SeriesConfig(tolerance=1e-14))
            assert rel(val, float(ref)) < 1e-12, (a, b, c, x)

    @pytest.mark.parametrize("d", [3, 4])
    def test_collapse_equivalence(self, d, golden):
        cfg = SeriesConfig(n_max=12, tail_model=False, tolerance=1e-15)
        params = LauricellaParams(1, 0.5, (1,) * d, (1 / d**2,) * d)
        with warnings.catch_warnings():
            # the symmetric point sits on the edge of the F_C domain
            warnings.simplefilter("ignore", ConvergenceWarning)
            naive = lauricella_fc(params, cfg, method="naive")
        collapsed = math.fsum(u_terms(d, 12))
        assert rel(naive, collapsed) < 1e-12
        assert rel(naive, float(golden["naive_fc_degree12"][str(d)])) < 1e-14

    def test_shell_vs_naive(self):
        params = LauricellaParams(0.7, 1.3, (1.5, 2.0, 0.8), (0.02, 0.05, 0.03))
        cfg = SeriesConfig(n_max=25, tolerance=1e-15)
        assert rel(lauricella_fc(params, cfg, method="shell"), lauricella_fc(params, cfg, method="naive")) < 1e-13

    def test_permutation_symmetry(self):
        c, x = (1.5, 2.0, 0.8), (0.02, 0.05, 0.03)
        base = lauricella_fc(LauricellaParams(0.7, 1.3, c, x))
        for perm in ((1, 2, 0), (2, 0, 1), (0, 2, 1)):
            other = lauricella_fc(LauricellaParams(0.7, 1.3, [c[i] for i in perm], [x[i] for i in perm]))
            assert rel(other, base) < 1e-13

    @settings(max_examples=30, deadline=None)
    @given(
        st.floats(0.1, 2.0), st.floats(0.1, 2.0),
        st.lists(st.tuples(st.floats(0.3, 3.0), st.floats(0.0, 0.04)), min_size=1, max_size=3),
    )
    def test_dimension_collapse(self, a, b, pairs):
        c = [p[0] for p in pairs]
        x = [p[1] for p in pairs]
        full = lauricella_fc(LauricellaParams(a, b, c + [1.7], x + [0.0]))
        reduced = lauricella_fc(LauricellaParams(a, b, c, x))
        assert rel(full, reduced) < 1e-12

    def test_convergence_warning(self):
        with pytest.warns(ConvergenceWarning):
            lauricella_fc(LauricellaParams(1, 1, (2, 2), (0.3, 0.3)), SeriesConfig(n_max=20))

    def test_no_warning_on_symmetric_path(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            lauricella_fc(LauricellaParams(1, 0.5, (1,) * 4, (1 / 16,) * 4))

    def test_full_output(self):
        val, info = lauricella_fc(LauricellaParams(1, 1, (2,), (0.5,)), full_output=True)
        assert set(info) >= {"terms_used", "last_shell", "error_estimate"}
        assert info["last_shell"] <= info["error_estimate"] <= 1e-10 * val


class TestReturnProbability:
    def test_series(self):
        r = return_probability(3)
        assert abs(r.p - P3) < 1e-9
        assert r.method is Method.SERIES

    def test_gamma(self):
        r = return_probability(3, "gamma_product")
        assert abs(r.p - return_probability(3).p) < 1e-10

    def test_gamma_only_d3(self):
        with pytest.raises(ValueError):
            return_probability(4, Method.GAMMA_PRODUCT)

    def test_d8_cross(self):
        s = return_probability(8).p
        q = return_probability(8, Method.QUADRATURE).p
        assert 0 < s < 1
        assert rel(s, q) < 1e-9

    @pytest.mark.parametrize("d", [1, 2])
    @pytest.mark.parametrize("method", list(Method))
    def test_divergent(self, d, method):
        with pytest.raises(DivergenceError):
            return_probability(d, method)
