"""Mode counting, continuum volumes and energy growth."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from emreg.dos import (
    EnumerationBudgetError,
    count_modes_brute,
    count_modes_weighted,
    dos_density_analytic,
    dos_volume_analytic,
    energy_growth_dos,
    energy_growth_leading,
    energy_growth_singular,
    surface_height,
    surface_root,
)


@pytest.mark.parametrize("sector", ["TE", "TM"])
def test_zero_cutoff(sector):
    assert count_modes_brute(sector, 0.0, 100.0) == 0
    assert dos_volume_analytic(sector, 0.0, 100.0) == 0.0


def test_tm_spectral_floor():
    assert count_modes_brute("TM", 1.4, 100.0) == 0
    assert dos_volume_analytic("TM", 1.4, 100.0) == 0.0
    assert count_modes_brute("TM", math.sqrt(6) + 0.05, 100.0) > 0


def test_volume_te_closed_form():
    L = 100.0
    assert dos_volume_analytic("TE", 2.0, L) == pytest.approx(
        (math.sqrt(17) - 1) ** 3 * L * L / (96 * math.pi), rel=1e-14)


def test_brute_small_case_by_hand():
    # L = pi a: theta^TE = nx^2 + ny^2; count l >= 0 with (l+q)(l+q+1) <= Omega^2
    L = math.pi
    Om = 3.0
    expected = 0
    for nx in range(0, 5):
        for ny in range(0, 5):
            if nx == ny == 0:
                continue
            q = math.hypot(nx, ny)
            expected += sum(1 for l in range(10) if (l + q) * (l + q + 1) <= Om * Om)
    assert count_modes_brute("TE", Om, L) == expected


@settings(max_examples=30, deadline=None)
@given(sector=st.sampled_from(["TE", "TM"]), o1=st.floats(0.0, 8.0), o2=st.floats(0.0, 8.0))
def test_count_monotone(sector, o1, o2):
    lo, hi = sorted((o1, o2))
    assert count_modes_brute(sector, lo, 20.0) <= count_modes_brute(sector, hi, 20.0)


def test_budget():
    with pytest.raises(EnumerationBudgetError):
        count_modes_brute("TE", 10.0, 100.0, budget=1000)


def test_input_validation():
    with pytest.raises(ValueError):
        count_modes_brute("XX", 1.0, 10.0)
    with pytest.raises(ValueError):
        dos_volume_analytic("TE", -1.0, 10.0)
    with pytest.raises(ValueError):
        count_modes_brute("TE", 1.0, 0.0)


@pytest.mark.parametrize("sector", ["TE", "TM"])
@pytest.mark.parametrize("Om", [3.0, 10.0, 50.0])
def test_root_on_surface(sector, Om):
    u0 = surface_root(sector, Om)
    assert surface_height(sector, Om, u0) == pytest.approx(0.0, abs=1e-12 * Om)
    xi = math.sqrt(4 * Om * Om + 1)
    expected = (xi - 1) / 2 if sector == "TE" else math.sqrt(4 * Om * Om - 2 * xi - 2) / 2
    assert u0 == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("sector", ["TE", "TM"])
def test_volume_asymptotics(sector):
    # remainder after the two leading terms is O(Omega)
    rem = []
    for Om in (1e2, 1e3, 1e4):
        v = dos_volume_analytic(sector, Om, 1.0)
        rem.append((v - Om ** 3 / (12 * math.pi) + Om ** 2 / (8 * math.pi)) / Om)
    assert abs(rem[2]) < 1.0
    assert rem[2] == pytest.approx(rem[1], rel=1e-2, abs=1e-6)


def test_sectors_differ_at_order_omega():
    for Om in (1e2, 1e3, 1e4):
        d = dos_volume_analytic("TE", Om, 1.0) - dos_volume_analytic("TM", Om, 1.0)
        assert abs(d) / Om < 1.0


@pytest.mark.parametrize("sector", ["TE", "TM"])
@pytest.mark.parametrize("Om", [3.0, 7.5, 20.0])
def test_density_is_volume_derivative(sector, Om):
    h = 1e-4 * Om
    fd = (dos_volume_analytic(sector, Om + h, 1.0) - dos_volume_analytic(sector, Om - h, 1.0)) / (2 * h)
    assert dos_density_analytic(sector, Om) == pytest.approx(fd, rel=1e-7)


@pytest.mark.parametrize("L", [50.0, 100.0, 200.0])
def test_weighted_count_matches_volume(L):
    for s in ("TE", "TM"):
        ratio = count_modes_weighted(s, 10.0, L) / dos_volume_analytic(s, 10.0, L)
        assert ratio == pytest.approx(1.0, abs=0.01)


_EXCESS = pytest.mark.xfail(strict=True, reason="exact counts exceed the volume by ~17% at "
                            "Omega = 10 for every L; see decisions ledger")


# at L = 50 the allowance 10 a / L = 0.2 still covers the excess
@pytest.mark.parametrize("L", [50.0, pytest.param(100.0, marks=_EXCESS),
                               pytest.param(200.0, marks=_EXCESS)])
def test_brute_count_matches_volume(L):
    for s in ("TE", "TM"):
        ratio = count_modes_brute(s, 10.0, L) / dos_volume_analytic(s, 10.0, L)
        assert abs(ratio - 1.0) < 10.0 / L


@pytest.mark.xfail(strict=True, reason="ratio 1.37 at Omega = 5; see decisions ledger")
def test_brute_count_te_omega5():
    ratio = count_modes_brute("TE", 5.0, 100.0) / dos_volume_analytic("TE", 5.0, 100.0)
    assert ratio == pytest.approx(1.0, abs=0.05)


def test_brute_excess_shrinks_with_omega():
    r = [count_modes_brute("TE", Om, 50.0) / dos_volume_analytic("TE", Om, 50.0)
         for Om in (5.0, 10.0, 20.0)]
    assert r[0] > r[1] > r[2] > 1.0


def test_energy_growth_agreement():
    g_dos, g_sing = energy_growth_leading(0.01)
    assert g_sing == pytest.approx(1.5e8, rel=1e-3)
    assert abs(g_dos - g_sing) / g_sing < 5e-3


def test_energy_growth_given_coefficients():
    assert energy_growth_singular(0.1, 6.0, 6.0) == pytest.approx(1.5e4, rel=1e-14)
    with pytest.raises(ValueError):
        energy_growth_dos(0.0)


def test_energy_growth_leading_order():
    # sigma^4 times the DOS estimate tends to 3/2
    vals = [energy_growth_dos(s) * s ** 4 for s in (0.02, 0.01, 0.005)]
    errs = [abs(v - 1.5) for v in vals]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 5e-3
