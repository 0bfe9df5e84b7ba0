import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracgelfand import specfun


def bisect_zero(f, lo, hi, iters=200):
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) * flo <= 0:
            hi = mid
        else:
            lo = mid
            flo = f(lo)
    return 0.5 * (lo + hi)


class TestGamma:
    def test_half_integer(self):
        assert specfun.gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)

    def test_one(self):
        assert specfun.gamma(1.0) == 1.0

    def test_factorial(self):
        assert specfun.gamma(5.0) == pytest.approx(24.0, rel=1e-14)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            specfun.gamma(-1.0)
        with pytest.raises(ValueError):
            specfun.gamma(0.0)

    @given(st.floats(min_value=1e-3, max_value=49.0))
    @settings(max_examples=60, deadline=None)
    def test_functional_equation(self, x):
        assert specfun.gamma(x + 1.0) == pytest.approx(x * specfun.gamma(x), rel=1e-12)


class TestBesselJ:
    def test_half_order_closed_form(self):
        # J_{1/2}(x) = sqrt(2/(pi x)) sin(x)
        assert abs(specfun.bessel_j(0.5, math.pi)) < 1e-15
        assert specfun.bessel_j(0.5, math.pi / 2) == pytest.approx(
            2.0 / math.pi, rel=1e-12
        )

    def test_j0_origin(self):
        assert specfun.bessel_j(0.0, 0.0) == 1.0

    def test_negative_argument_rejected(self):
        with pytest.raises(ValueError):
            specfun.bessel_j(0.0, -1.0)


class TestBesselJZeros:
    def test_half_order_zeros_are_multiples_of_pi(self):
        zeros = specfun.bessel_j_zeros(0.5, 3)
        np.testing.assert_allclose(zeros, [math.pi, 2 * math.pi, 3 * math.pi],
                                   rtol=1e-12)

    def test_first_j0_zero_against_bisection(self):
        oracle = bisect_zero(lambda x: specfun.bessel_j(0.0, x), 2.0, 3.0)
        assert specfun.bessel_j_zeros(0.0, 1)[0] == pytest.approx(oracle, abs=1e-12)
        assert specfun.bessel_j_zeros(0.0, 1)[0] == pytest.approx(
            2.404825557695773, rel=1e-13
        )

    @pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 2.5, 9.0, 24.0, 59.0])
    def test_residual_and_spacing(self, nu):
        zeros = specfun.bessel_j_zeros(nu, 12)
        assert np.all(np.abs(specfun.bessel_j(nu, zeros)) <= 1e-12)
        assert np.all(np.diff(zeros) > 1.0)

    def test_count_validation(self):
        with pytest.raises(ValueError):
            specfun.bessel_j_zeros(0.0, 0)


class TestBesselK:
    # K_{1/2}(x) = sqrt(pi/(2x)) e^{-x}
    def test_half_order_closed_form_points(self):
        assert specfun.bessel_k(0.5, 1.0) == pytest.approx(
            math.sqrt(math.pi / 2.0) * math.exp(-1.0), rel=1e-12
        )
        assert specfun.bessel_k(0.5, 2.0) == pytest.approx(
            math.sqrt(math.pi / 4.0) * math.exp(-2.0), rel=1e-12
        )

    def test_half_order_closed_form_grid(self):
        x = np.geomspace(1e-3, 30.0, 200)
        ref = np.sqrt(math.pi / (2.0 * x)) * np.exp(-x)
        np.testing.assert_allclose(specfun.bessel_k(0.5, x), ref, rtol=1e-10)

    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_positive_and_decreasing(self, s):
        x = np.geomspace(1e-3, 30.0, 400)
        vals = specfun.bessel_k(s, x)
        assert np.all(vals > 0)
        assert np.all(np.diff(vals) < 0)

    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_small_argument_scaling(self, s):
        # x^s K_s(x) -> Gamma(s)/2 * 2^s as x -> 0
        # next-order term is O(x^{2s}) relative
        x = 1e-12
        limit = 0.5 * specfun.gamma(s) * 2.0 ** s
        assert x ** s * specfun.bessel_k(s, x) == pytest.approx(limit, rel=1e-5)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            specfun.bessel_k(0.5, -1.0)
        with pytest.raises(ValueError):
            specfun.bessel_k(1.5, 1.0)
