"""Spectra, mode functions and normalization."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad, solve_ivp

from emreg.spectra import (
    ExcludedModeError,
    GuideGeometry,
    ModeIndex,
    cuboid_omega,
    mode_function,
    mode_values_precise,
    norm_integral_closed,
    normalization_constant,
    omega_enz,
    orthogonality_integral,
    theta,
)

Z_GRID = np.linspace(-5.0, 5.0, 201)
THETAS = [0.0, 0.01, math.pi ** 2 / 100, 1.0, 2.5, 30.0]


@pytest.mark.parametrize("sector, nx, ny, geom, expected", [
    ("TE", 0, 0, GuideGeometry(), 0.0),
    ("TM", 0, 0, GuideGeometry(), 1.0),
    ("TE", 1, 0, GuideGeometry(Lx=10.0), math.pi ** 2 / 100),
    ("TM", 1, 2, GuideGeometry(Lx=10.0, Ly=20.0), 1 + 2 * math.pi ** 2 / 100),
])
def test_theta(sector, nx, ny, geom, expected):
    assert theta(sector, nx, ny, geom) == pytest.approx(expected, rel=1e-15, abs=0)


@pytest.mark.parametrize("ell, th, expected", [
    (0, 0.0, 0.0), (1, 1.0, math.sqrt(6)), (0, 1.0, math.sqrt(2)),
])
def test_omega_enz(ell, th, expected):
    assert omega_enz(ell, th) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("labels, L, expected", [
    ((1, 1, 1), (1.0, 1.0), math.pi * math.sqrt(3)),
    ((0, 1, 1), (1.0, 1.0), math.pi * math.sqrt(2)),
    ((2, 0, 1), (2.0, 1.0), math.pi * math.sqrt(2)),
])
def test_cuboid_omega(labels, L, expected):
    geom = GuideGeometry(Lx=L[0], Ly=L[1], a=1.0)
    assert cuboid_omega(*labels, geom) == pytest.approx(expected, rel=1e-15)


@settings(max_examples=100, deadline=None)
@given(ell=st.integers(0, 50), th=st.floats(0.0, 1e4))
def test_spectral_monotonicity(ell, th):
    assert omega_enz(ell + 1, th) > omega_enz(ell, th)


def test_geometry_validation():
    for bad in (dict(Lx=0.0), dict(a=-1.0), dict(kappa0=math.inf), dict(Ly=math.nan)):
        with pytest.raises(ValueError):
            GuideGeometry(**bad)


@pytest.mark.parametrize("sector, labels, system", [
    ("TE", (0, 0, 0), "enz"), ("TM", (2, 0, 0), "enz"), ("TM", (1, 3, 0), "enz"),
    ("TM", (1, 0, 3), "enz"), ("TE", (1, 1, 0), "cuboid"), ("TE", (0, 0, 2), "cuboid"),
])
def test_gauge_exclusions(sector, labels, system):
    with pytest.raises(ExcludedModeError):
        ModeIndex(sector, labels, system).check()


def test_allowed_modes():
    ModeIndex("TE", (0, 1, 0)).check()
    ModeIndex("TM", (0, 1, 1)).check()
    ModeIndex("TM", (1, 1, 0), "cuboid").check()


def test_mode_ell0_single_term():
    for th in (0.5, 1.0, 4.0):
        y = mode_function(0, th)
        np.testing.assert_allclose(y(Z_GRID), np.cosh(Z_GRID) ** -math.sqrt(th), rtol=1e-14)


def test_mode_ell1_single_term():
    for th in (0.5, 1.0, 4.0):
        y = mode_function(1, th)
        q = math.sqrt(th)
        np.testing.assert_allclose(y(Z_GRID), np.sinh(Z_GRID) * np.cosh(Z_GRID) ** -(q + 1),
                                   rtol=1e-13, atol=1e-300)


def test_mode_ell2_against_shooting():
    y = mode_function(2, 1.0)
    assert len(y.coefficients) == 2 and y.omega2 == pytest.approx(12.0)
    assert np.max(y.ode_residual(Z_GRID)) < 1e-9
    sol = solve_ivp(lambda z, u: [u[1], (1 - 12 / math.cosh(z) ** 2) * u[0]], [0, 5],
                    [y(0.0), 0.0], rtol=1e-12, atol=1e-14, dense_output=True)
    zz = np.linspace(0, 5, 21)
    np.testing.assert_allclose(sol.sol(zz)[0], y(zz), atol=1e-9)


@pytest.mark.parametrize("th", THETAS)
@pytest.mark.parametrize("ell", range(7))
def test_ode_residual(ell, th):
    assert np.max(mode_function(ell, th).ode_residual(Z_GRID)) < 1e-9


@pytest.mark.parametrize("th", THETAS)
@pytest.mark.parametrize("ell", range(7))
def test_parity(ell, th):
    y = mode_function(ell, th)
    for d in range(3):
        sign = (-1) ** (ell + d)
        assert np.array_equal(y(-Z_GRID, d), sign * y(Z_GRID, d))


@pytest.mark.parametrize("ell", range(7))
def test_decay(ell):
    th = 2.0
    y = mode_function(ell, th)
    Z = np.array([20.0, 25.0])
    np.testing.assert_allclose(y(Z) * np.cosh(Z) ** math.sqrt(th), 1.0, rtol=1e-9)


@pytest.mark.parametrize("th", [0.3, 1.0, 30.0])
def test_precise_values_match_series(th):
    for ell in range(7):
        y = mode_function(ell, th)
        for Z in (0.0, 0.4, -1.3, 3.0):
            Y, Yp, Ypp = mode_values_precise(ell, th, Z)
            assert Y == pytest.approx(y(Z), rel=1e-9, abs=1e-12)
            assert Yp == pytest.approx(y(Z, 1), rel=1e-9, abs=1e-12)
            assert Ypp == pytest.approx(y(Z, 2), rel=1e-8, abs=1e-11)


def test_orthogonality_examples():
    assert orthogonality_integral(0, 1, 0.7) == 0.0
    assert abs(orthogonality_integral(0, 2, 1.0)) < 1e-9
    assert orthogonality_integral(0, 0, 1.0) == pytest.approx(4 / 3, rel=1e-13)


@pytest.mark.parametrize("th", THETAS)
def test_orthogonality_matrix(th):
    for a in range(7):
        for b in range(a + 1, 7):
            assert abs(orthogonality_integral(a, b, th)) < 1e-9
        assert orthogonality_integral(a, a, th) > 0


@pytest.mark.parametrize("th", [0.0, 0.2, 1.0, 9.0])
@pytest.mark.parametrize("ell", range(7))
def test_norm_closed_form(ell, th):
    assert norm_integral_closed(ell, th) == pytest.approx(orthogonality_integral(ell, ell, th),
                                                          rel=1e-12)


def test_norm_against_direct_quadrature():
    y = mode_function(3, 2.0)
    val, _ = quad(lambda z: (y(z) / math.cosh(z)) ** 2, -40, 40, limit=200, epsabs=1e-14)
    assert orthogonality_integral(3, 3, 2.0) == pytest.approx(val, rel=1e-10)


def test_completeness_spot_check():
    th, z0, L = 1.0, 0.3, 40

    def g(z):
        return math.exp(-z * z)

    # projections in t = tanh Z, where sech^2 dZ = dt
    t, w = np.polynomial.legendre.leggauss(400)
    Z = np.arctanh(t)
    gz = np.exp(-Z * Z)
    total = 0.0
    for ell in range(L + 1):
        y = mode_function(ell, th)
        c = np.dot(w, y(Z) * gz)
        total += y(z0) * c / norm_integral_closed(ell, th)
    assert total == pytest.approx(g(z0), rel=0.01)


def test_normalization_factors_cuboid():
    geom = GuideGeometry(Lx=3.0, Ly=2.0, a=1.0)
    both = normalization_constant(ModeIndex("TE", (1, 1, 1), "cuboid"), geom)
    kp2 = (math.pi / 3) ** 2 + (math.pi / 2) ** 2
    om = cuboid_omega(1, 1, 1, geom)
    assert both == pytest.approx(4 / (6 * kp2 * om), rel=1e-14)
    # half weight for a vanishing transverse label (TE) or nz = 0 (TM)
    te0 = normalization_constant(ModeIndex("TE", (0, 1, 1), "cuboid"), geom)
    assert te0 == pytest.approx(2 / (6 * (math.pi / 2) ** 2 * cuboid_omega(0, 1, 1, geom)))
    tm0 = normalization_constant(ModeIndex("TM", (1, 1, 0), "cuboid"), geom)
    tm1 = normalization_constant(ModeIndex("TM", (1, 1, 1), "cuboid"), geom)
    om0, om1 = cuboid_omega(1, 1, 0, geom), cuboid_omega(1, 1, 1, geom)
    assert tm0 * om0 ** 3 == pytest.approx(0.5 * tm1 * om1 ** 3, rel=1e-14)


def test_normalization_guide_te_ell0():
    # theta = 1 needs k_perp = 1/a: Lx = Ly = pi a sqrt(2)
    L = math.pi * math.sqrt(2.0)
    geom = GuideGeometry(Lx=L, Ly=L, a=1.0)
    mode = ModeIndex("TE", (0, 1, 1))
    assert theta("TE", 1, 1, geom) == pytest.approx(1.0)
    om = omega_enz(0, 1.0)
    expected = 2.0 / (L * L * 1.0 * om * (4 / 3))
    assert normalization_constant(mode, geom) == pytest.approx(expected, rel=1e-12)


def test_normalization_excluded():
    with pytest.raises(ExcludedModeError):
        normalization_constant(ModeIndex("TM", (0, 1, 0)), GuideGeometry())
