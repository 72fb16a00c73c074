import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from merosub.errors import DomainError
from merosub.lashin import (
    LashinParams,
    apply_lashin,
    check_recurrence,
    lashin_quadrature,
    multipliers,
    recurrence_residuals,
)
from merosub.series import MeromorphicSeries, evaluate
from merosub.verifier import random_sigma_function


def pole_plus(*tail, order=8):
    t = np.zeros(order, dtype=complex)
    t[: len(tail)] = tail
    return MeromorphicSeries(t)


def direct_integral(f, alpha, beta, z):
    """Integral form with t = z u, done by adaptive scipy quadrature on [0, 1].

    The pole contributes exactly 1/z (a Gamma integral); only the regular part
    is integrated numerically.
    """
    regular = np.concatenate([[f.constant], f.tail])[::-1]

    def part(u, which):
        if u <= 0 or u >= 1:
            return 0.0
        val = u ** beta * (-math.log(u)) ** (alpha - 1) * np.polyval(regular, z * u)
        return val.real if which == 0 else val.imag

    pref = beta ** alpha / math.gamma(alpha)
    re = integrate.quad(part, 0, 1, args=(0,), limit=200, epsabs=1e-13)[0]
    im = integrate.quad(part, 0, 1, args=(1,), limit=200, epsabs=1e-13)[0]
    return 1 / z + pref * complex(re, im)


class TestParams:
    @pytest.mark.parametrize("a,b", [(0, 1), (1, 0), (-1, 2), (math.inf, 1)])
    def test_invalid(self, a, b):
        with pytest.raises(ValueError):
            LashinParams(a, b)


class TestCoefficientMap:
    def test_pole_fixed(self):
        for a, b in [(0.5, 0.5), (3, 2), (1, 7)]:
            out = apply_lashin(MeromorphicSeries.pole(8), LashinParams(a, b))
            assert np.all(out.tail == 0) and out.constant == 0

    def test_first_coefficient(self):
        out = apply_lashin(pole_plus(1.0), LashinParams(1, 1))
        assert out.coefficient(1) == pytest.approx(1 / 3, abs=1e-16)

    def test_multiplier_values(self):
        m = multipliers(2.0, 1.0, 3)
        assert np.allclose(m, [1 / 4, 1 / 9, 1 / 16, 1 / 25], rtol=1e-15)

    def test_semigroup(self):
        f = random_sigma_function(11)
        once = apply_lashin(f, LashinParams(2, 1.5))
        twice = apply_lashin(apply_lashin(f, LashinParams(1, 1.5)), LashinParams(1, 1.5))
        assert np.max(np.abs(once.tail - twice.tail)) < 1e-15

    def test_linearity(self):
        f, g = random_sigma_function(1), random_sigma_function(2)
        prm = LashinParams(1.3, 0.8)
        combo = MeromorphicSeries(2 * f.tail - 3j * g.tail)
        lhs = apply_lashin(combo, prm).tail
        rhs = 2 * apply_lashin(f, prm).tail - 3j * apply_lashin(g, prm).tail
        assert np.max(np.abs(lhs - rhs)) < 1e-16


class TestQuadrature:
    def test_pole_fixed_point(self):
        assert abs(lashin_quadrature(MeromorphicSeries.pole(8), LashinParams(1, 1), 0.5) - 2.0) < 1e-12

    @pytest.mark.parametrize("a,b", [(0.5, 0.5), (2.5, 3.0)])
    def test_pole_fixed_point_any_params(self, a, b):
        assert abs(lashin_quadrature(MeromorphicSeries.pole(8), LashinParams(a, b), 0.3j) - 1 / 0.3j) < 1e-10

    def test_monomial(self):
        val = lashin_quadrature(pole_plus(1.0), LashinParams(1, 1), 0.5)
        assert abs(val - (2.0 + 0.5 / 3)) < 1e-12

    def test_matches_adaptive_integration(self):
        f = random_sigma_function(5, K=16, amplitude=0.2)
        prm = LashinParams(2.5, 0.5)
        z = 0.5 * np.exp(0.7j)
        assert abs(lashin_quadrature(f, prm, z) - direct_integral(f, prm.alpha, prm.beta, z)) < 1e-9

    def test_matches_series(self):
        f = random_sigma_function(9, K=16, amplitude=0.2)
        prm = LashinParams(0.5, 3.0)
        for z in 0.5 * np.exp(2j * np.pi * np.arange(16) / 16):
            assert abs(lashin_quadrature(f, prm, z) - evaluate(apply_lashin(f, prm), z)) < 1e-8

    @pytest.mark.parametrize("z", [1e-4, 0.95])
    def test_domain(self, z):
        with pytest.raises(DomainError):
            lashin_quadrature(MeromorphicSeries.pole(8), LashinParams(1, 1), z)


class TestRecurrence:
    def test_pure_pole(self):
        assert check_recurrence(MeromorphicSeries.pole(8), LashinParams(1.7, 0.4)) < 1e-15

    def test_hand_computed_pair(self):
        # alpha = 2, beta = 1, f = 1/z + z: P^2 f = 1/z + z/9, P^1 f = 1/z + z/3
        f = pole_plus(1.0)
        lhs_z = 1 / 9  # z (P^2 f)' coefficient of z
        rhs_z = 1 * (1 / 3) - 2 * (1 / 9)
        assert lhs_z == pytest.approx(rhs_z)
        res = recurrence_residuals(f, LashinParams(2, 1))
        assert np.max(np.abs(res)) < 1e-14

    def test_random_fractional(self):
        f = random_sigma_function(21)
        assert check_recurrence(f, LashinParams(0.7, 2.5)) < 1e-12

    def test_pointwise_against_finite_differences(self):
        f = random_sigma_function(4, K=32)
        prm = LashinParams(1.5, 2.0)
        pa = apply_lashin(f, prm)
        pa1 = apply_lashin(f, LashinParams(0.5, 2.0))
        z, h = 0.4 + 0.2j, 1e-5
        deriv = (evaluate(pa, z + h) - evaluate(pa, z - h)) / (2 * h)
        resid = z * deriv - (2.0 * evaluate(pa1, z) - 3.0 * evaluate(pa, z))
        assert abs(resid) < 1e-7


@settings(max_examples=40, deadline=None)
@given(
    st.floats(0.25, 4.0),
    st.floats(0.25, 4.0),
    st.floats(0.1, 5.0),
    st.integers(0, 2**31 - 1),
)
def test_semigroup_property(a1, a2, beta, seed):
    f = random_sigma_function(seed, K=32)
    joint = apply_lashin(f, LashinParams(a1 + a2, beta))
    split = apply_lashin(apply_lashin(f, LashinParams(a1, beta)), LashinParams(a2, beta))
    assert np.max(np.abs(joint.tail - split.tail)) < 1e-13


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 6.0), st.floats(0.05, 6.0), st.integers(0, 2**31 - 1))
def test_recurrence_property(alpha, beta, seed):
    assert check_recurrence(random_sigma_function(seed, K=32), LashinParams(alpha, beta)) < 1e-12
