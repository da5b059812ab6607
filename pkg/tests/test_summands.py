"""Summand families: cuboid, guide energy and guide stress."""

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from emreg.calculus import fd_derivative, integrate
from emreg.spectra import ExcludedModeError, mode_values_precise
from emreg.summands import (
    EnzEnergyFamily,
    EnzStressFamily,
    HomogeneousFamily,
    IpqSpec,
    f_energy_enz,
    f_energy_hom,
    f_stress_enz,
    f_stress_hom,
    i_pq,
    stress_integrand_enz,
)

PI = math.pi


def _sqrt_kernel_oracle(g, a, sigma):
    return integrate(g, a, math.inf, 1e-13, sqrt_kernel=True, scale=1 / sigma).value


def test_energy_hom_tm_zero():
    s = 0.1
    assert f_energy_hom("TM", s, 0) == pytest.approx(4 / (PI ** 3 * s ** 3), rel=1e-14)


def test_energy_hom_te_one():
    s = 0.1
    b = PI * s
    expected = (4 / b ** 2 + 4 / b + 2) * math.exp(-b) / b
    assert f_energy_hom("TE", s, 1) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("sector", ["TE", "TM"])
def test_energy_hom_quadrature(sector):
    s = 0.1
    oracle = _sqrt_kernel_oracle(lambda u: np.sqrt(u) * np.exp(-s * PI * np.sqrt(u)), 9.0, s)
    assert f_energy_hom(sector, s, 3) == pytest.approx(oracle, rel=1e-10)


def test_stress_hom_examples():
    s = 0.1
    assert f_stress_hom("TM", s, 0) == 0.0
    assert f_stress_hom("TE", s, 1) == pytest.approx(2 * math.exp(-s * PI) / (PI * s), rel=1e-14)
    oracle = _sqrt_kernel_oracle(lambda u: 4 / np.sqrt(u) * np.exp(-0.2 * PI * np.sqrt(u)),
                                 4.0, 0.2)
    assert f_stress_hom("TM", 0.2, 2) == pytest.approx(oracle, rel=1e-10)


def test_hom_exclusions():
    with pytest.raises(ExcludedModeError):
        f_energy_hom("TE", 0.1, 0)
    with pytest.raises(ExcludedModeError):
        f_stress_hom("TM", 0.1, -1)
    with pytest.raises(ValueError):
        f_energy_hom("TM", 0.0, 1)


@pytest.mark.parametrize("quantity", ["energy", "stress"])
@pytest.mark.parametrize("sector", ["TE", "TM"])
def test_hom_family_matches_scalar(quantity, sector):
    f = HomogeneousFamily(quantity, sector)
    scalar = f_energy_hom if quantity == "energy" else f_stress_hom
    for nz in range(1, 5):
        with mp.workdps(f.dps):
            assert float(f.value(nz, 0.07)) == pytest.approx(scalar(sector, 0.07, nz), rel=1e-13)


@pytest.mark.parametrize("L", [200.0])
@pytest.mark.parametrize("nz, sigma", [(1, 1.0), (2, 0.5)])
def test_continuum_limit(L, nz, sigma):
    # (1/L^2) sum_{nx,ny>=1} Omega e^{-sigma Omega} tends to (pi^2/4) F(nz)
    kx = np.arange(1, int(40 * L / (PI * sigma)) + 1) * PI / L
    total = 0.0
    for k in kx:
        om = np.sqrt(k * k + kx ** 2 + (nz * PI) ** 2)
        total += np.sum(om * np.exp(-sigma * om))
    assert total / L ** 2 == pytest.approx(PI ** 2 / 4 * f_energy_hom("TM", sigma, nz), rel=0.01)


def test_ipq_closed_forms():
    # int sqrt(u) e^{-s sqrt(u)} du = 4/s^3 and int u e^{-s sqrt(u)} du = 12/s^4
    assert i_pq(IpqSpec(1, 0, sigma=0.1)).value == pytest.approx(4000.0, rel=1e-13)
    assert i_pq(IpqSpec(2, 0, sigma=0.1)).value == pytest.approx(120000.0, rel=1e-13)


def test_ipq_finite_range():
    s = 0.01
    r = i_pq(IpqSpec(1, 0, 0.0, 2.0, s)).value
    assert r == pytest.approx(4 * math.sqrt(2) / 3 - 2 * s, abs=2 * s * s)


def test_ipq_spec_validation():
    for bad in (dict(a=-1.0), dict(a=2.0, b=1.0), dict(sigma=0.0), dict(p=-2, q=0)):
        kw = dict(p=1, q=0)
        kw.update(bad)
        with pytest.raises(ValueError):
            IpqSpec(**kw)


@pytest.mark.parametrize("sigma", [0.5, 0.05, 0.005])
def test_energy_enz_ipq_identities(sigma):
    def I(p, q, a):
        return i_pq(IpqSpec(p, q, a, math.inf, sigma)).value

    assert f_energy_enz("TE", sigma, 0) == pytest.approx(I(1, 0, 0) - I(1, 1, 0), rel=1e-12)
    assert f_energy_enz("TM", sigma, 0) == pytest.approx(I(1, 0, 2) - I(1, 1, 2), rel=1e-12)
    assert f_energy_enz("TE", sigma, 1) == pytest.approx(I(1, 0, 2) - 3 * I(1, 1, 2), rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(sector=st.sampled_from(["TE", "TM"]), ell=st.floats(0.0, 50.0),
       sigma=st.floats(0.01, 2.0))
def test_energy_enz_positive(sector, ell, sigma):
    assert f_energy_enz(sector, sigma, ell) > 0


@pytest.mark.parametrize("sector", ["TE", "TM"])
@pytest.mark.parametrize("ell", [1, 2, 3])
@pytest.mark.parametrize("order", [1, 3])
def test_energy_enz_derivatives_fd(sector, ell, order):
    f = EnzEnergyFamily(sector)
    with mp.workdps(f.dps):
        exact = float(f.derivative(ell, 0.1, order))
    fd = fd_derivative(f.real_function(0.1).func, float(ell), order)
    assert fd == pytest.approx(exact, rel=1e-6)


@pytest.mark.slow
@pytest.mark.parametrize("sector", ["TE", "TM"])
@pytest.mark.parametrize("ell", [1, 2, 3])
def test_energy_enz_fifth_derivative(sector, ell):
    # double-precision differences lose ~1e-3 at order 5; use mpmath steps
    f = EnzEnergyFamily(sector)
    with mp.workdps(f.dps):
        exact = f.derivative(ell, 0.1, 5)
        g = lambda x: f.value(x, mp.mpf("0.1"))  # noqa: E731
        d1 = mp.diff(g, mp.mpf(ell), 5, h=mp.mpf("0.002"))
        d2 = mp.diff(g, mp.mpf(ell), 5, h=mp.mpf("0.001"))
        rich = (4 * d2 - d1) / 3
        assert float(abs(rich / exact - 1)) < 1e-6


def test_energy_enz_validation():
    with pytest.raises(ValueError):
        f_energy_enz("TE", 0.0, 1)
    with pytest.raises(ValueError):
        f_energy_enz("TE", 0.1, -1)
    with pytest.raises(ValueError):
        f_energy_enz("XX", 0.1, 1)


def test_stress_bracket_te_ell0():
    # bracket = 1 for sech(Z) at Z = 0; kernel = bracket / (4 Omega I)
    val = stress_integrand_enz("TE", 0, 0.0, 1.0)
    assert val == pytest.approx(1.0 / (4 * math.sqrt(2) * 4 / 3), rel=1e-13)


def test_stress_bracket_te_ell1_positive():
    Y, Yp, Ypp = mode_values_precise(1, 1.0, 0.0)
    assert Y == 0.0 and Yp != 0.0
    assert Yp * Yp - Y * Ypp > 0
    assert stress_integrand_enz("TE", 1, 0.0, 1.0) > 0


@pytest.mark.parametrize("sector, ell", [("TE", 0), ("TE", 3), ("TM", 2)])
def test_stress_integrand_decays(sector, ell):
    vals = [abs(stress_integrand_enz(sector, ell, z, 0.8)) for z in (5.0, 10.0, 20.0)]
    assert vals[0] > vals[1] > vals[2] or vals[2] == 0.0
    assert vals[2] < 1e-12


def test_stress_integrand_excluded():
    with pytest.raises(ExcludedModeError):
        stress_integrand_enz("TE", 0, 0.0, 0.0)


@pytest.mark.parametrize("sector", ["TE", "TM"])
@pytest.mark.parametrize("ell", [0, 1])
def test_stress_z0_parity(sector, ell):
    a = f_stress_enz(sector, 0.5, ell, 0.7)
    b = f_stress_enz(sector, 0.5, ell, -0.7)
    assert abs(a - b) <= 1e-9 * abs(a)


def test_stress_reproducible_across_refinements():
    a = f_stress_enz("TE", 0.5, 0, rel_tol=1e-10)
    b = f_stress_enz("TE", 0.5, 0, rel_tol=1e-12)
    assert a > 0 and math.isfinite(a)
    assert a == pytest.approx(b, rel=1e-10)


@pytest.mark.parametrize("sector, ell", [("TE", 0), ("TM", 1)])
def test_stress_large_sigma_monotone(sector, ell):
    vals = [f_stress_enz(sector, s, ell) for s in (0.5, 1, 2, 4, 8, 16)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-5 * vals[0]


@pytest.mark.parametrize("sector, parity, k, sigma", [
    ("TE", 0, 0, 0.5), ("TE", 1, 2, 0.3), ("TM", 0, 1, 0.2), ("TM", 1, 1, 0.3),
])
def test_stress_family_matches_integer_ell(sector, parity, k, sigma):
    f = EnzStressFamily(sector, parity)
    with mp.workdps(f.dps):
        val = float(f.value(k, sigma))
    assert val == pytest.approx(f_stress_enz(sector, sigma, 2 * k + parity), rel=1e-10)


@pytest.mark.parametrize("sector, parity", [("TE", 0), ("TM", 1)])
def test_stress_family_derivative_fd(sector, parity):
    f = EnzStressFamily(sector, parity)
    with mp.workdps(f.dps):
        for order in (1, 3):
            exact = float(f.derivative(3, 0.2, order))
            fd = fd_derivative(lambda x: float(f.value(x, 0.2)), 3.0, order)
            assert fd == pytest.approx(exact, rel=1e-6)
