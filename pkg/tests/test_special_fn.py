"""Bernoulli numbers, periodic Bernoulli functions, zeta and the K series."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from emreg import calculus
from emreg.special_fn import (
    BERNOULLI_MAX_INDEX,
    RegimeError,
    UnsupportedOrderError,
    bernoulli_number,
    periodic_bernoulli,
    periodic_bernoulli_bound,
    riemann_zeta,
    k_function_series,
)
from emreg.summands import IpqSpec, i_pq


@pytest.mark.parametrize("r, expected", [
    (0, Fraction(1)), (1, Fraction(-1, 2)), (2, Fraction(1, 6)),
    (4, Fraction(-1, 30)), (12, Fraction(-691, 2730)), (7, Fraction(0)),
])
def test_bernoulli_values(r, expected):
    assert bernoulli_number(r) == expected


def test_bernoulli_reduced_form():
    for r in range(BERNOULLI_MAX_INDEX + 1):
        b = bernoulli_number(r)
        assert b.denominator > 0
        assert math.gcd(b.numerator, b.denominator) == 1


def test_bernoulli_errors():
    with pytest.raises(ValueError):
        bernoulli_number(-1)
    with pytest.raises(UnsupportedOrderError):
        bernoulli_number(BERNOULLI_MAX_INDEX + 1)


@pytest.mark.parametrize("m", range(1, BERNOULLI_MAX_INDEX))
def test_bernoulli_recurrence(m):
    total = sum(math.comb(m + 1, j) * bernoulli_number(j) for j in range(m + 1))
    assert total == 0


@pytest.mark.parametrize("k, x, expected", [
    (1, 0.25, -0.25), (3, 0.0, 0.0), (4, 0.5, 7 / 240),
])
def test_periodic_bernoulli_examples(k, x, expected):
    assert periodic_bernoulli(k, x) == pytest.approx(expected, abs=1e-15)


def test_periodic_bernoulli_array():
    x = np.linspace(0, 3, 7)
    out = periodic_bernoulli(2, x)
    t = x - np.floor(x)
    np.testing.assert_allclose(out, t * t - t + 1 / 6, atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(k=st.integers(1, 9), x=st.floats(0.0, 3.0, exclude_max=True))
def test_periodic_bernoulli_bound(k, x):
    bound = periodic_bernoulli_bound(k) if k > 1 else 0.5
    assert abs(periodic_bernoulli(k, x)) <= bound * (1 + 1e-12)


@settings(max_examples=200, deadline=None)
@given(k=st.integers(1, 9), n=st.integers(0, 16))
def test_periodic_bernoulli_periodic(k, n):
    # dyadic points are exactly representable, as are their unit shifts
    x = n / 16.0
    assert periodic_bernoulli(k, x) == periodic_bernoulli(k, x + 1.0)


@pytest.mark.parametrize("k, expected", [
    (2, math.pi ** 2 / 6), (4, math.pi ** 4 / 90), (3, 1.202056903159594),
])
def test_zeta_examples(k, expected):
    assert riemann_zeta(k) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("k", range(2, 20))
def test_zeta_against_scipy(k):
    assert riemann_zeta(k) == pytest.approx(special.zeta(k), rel=1e-13)


def test_zeta_domain():
    with pytest.raises(ValueError):
        riemann_zeta(1)


def _k_exact(sigma):
    x = sigma / 2
    return special.y1(x) - special.struve(1, x)


@pytest.mark.parametrize("sigma", [1e-3, 1e-2, 0.05, 0.1])
def test_k_series_against_scipy(sigma):
    assert k_function_series(sigma) == pytest.approx(_k_exact(sigma), rel=1e-10)


def test_k_series_leading_behaviour():
    s = 1e-4
    assert k_function_series(s) * (-math.pi * s / 4) == pytest.approx(1.0, abs=1e-3)


def test_k_series_regime():
    with pytest.raises(RegimeError):
        k_function_series(0.5)
    with pytest.raises(RegimeError):
        k_function_series(0.0)


def test_k_series_third_derivative_matches_i31():
    sigma = 0.01
    oracle = i_pq(IpqSpec(3, 1, sigma=sigma)).value
    assert math.pi / 4 * k_function_series(sigma, deriv=3) == pytest.approx(oracle, rel=1e-5)


def test_k_series_first_derivative_matches_i11():
    sigma = 0.05
    oracle = i_pq(IpqSpec(1, 1, sigma=sigma)).value
    assert math.pi / 4 * k_function_series(sigma, deriv=1) == pytest.approx(oracle, rel=1e-6)
