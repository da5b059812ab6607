"""Mode counting and density of states of the sech^2 guide.

For a square cross-section ``Lx = Ly = L`` the modes with spectral value
at most ``Omega`` fill, as ``L / a`` grows, the region under the surface

    l = (xi - 1) / 2 - F(u),   xi = sqrt(4 Omega^2 + 1),

in ``(l, nx, ny)`` space, where ``u = (pi a / L) sqrt(nx^2 + ny^2)``,
``F(u) = u`` for TE and ``F(u) = sqrt(u^2 + 1)`` for TM.  Volumes are
returned in mode-count units, so they compare directly with
:func:`count_modes_brute`.
"""

from __future__ import annotations

import math

import numpy as np

from .spectra import GuideGeometry, theta
from .summands import EnzEnergyFamily

__all__ = [
    "EnumerationBudgetError",
    "count_modes_brute",
    "count_modes_weighted",
    "dos_volume_analytic",
    "dos_density_analytic",
    "surface_height",
    "surface_root",
    "energy_growth_dos",
    "energy_growth_singular",
    "energy_growth_leading",
]

_TIE = 1e-12


class EnumerationBudgetError(RuntimeError):
    """The ``(nx, ny)`` search box exceeds the allowed number of cells."""


def _check(s: str, Omega: float, L: float, a: float) -> None:
    if s not in ("TE", "TM"):
        raise ValueError("sector must be 'TE' or 'TM'")
    if not (math.isfinite(Omega) and Omega >= 0):
        raise ValueError("Omega must be finite and non-negative")
    GuideGeometry(Lx=L, Ly=L, a=a)


def _xi(Omega):
    return np.sqrt(4.0 * np.asarray(Omega, dtype=float) ** 2 + 1.0)


def surface_height(s: str, Omega: float, u):
    """Height ``l(u)`` of the iso-spectral surface above the ``l = 0`` plane."""
    u = np.asarray(u, dtype=float)
    F = u if s == "TE" else np.sqrt(u * u + 1.0)
    return 0.5 * (_xi(Omega) - 1.0) - F


def surface_root(s: str, Omega: float) -> float:
    """Positive root ``u0`` of :func:`surface_height`; 0 when none exists."""
    xi = float(_xi(Omega))
    if s == "TE":
        return 0.5 * (xi - 1.0)
    arg = 4.0 * Omega ** 2 - 2.0 * xi - 2.0
    return 0.5 * math.sqrt(arg) if arg > 0 else 0.0


def count_modes_brute(s: str, Omega: float, L: float, a: float = 1.0,
                      budget: int = 50_000_000) -> int:
    """Number of guide modes of sector ``s`` with ``Omega_{l,nx,ny} <= Omega``.

    Parameters
    ----------
    s : {'TE', 'TM'}
    Omega : float
        Spectral cutoff.
    L, a : float
        Square cross-section side and profile scale.
    budget : int
        Largest admissible number of ``(nx, ny)`` cells.

    Returns
    -------
    int

    Raises
    ------
    EnumerationBudgetError
        When the search box is larger than ``budget``.

    Notes
    -----
    ``l >= 0`` bounds ``sqrt(theta)`` by the root ``u0`` of the TE surface,
    which bounds ``nx`` and ``ny``.  Gauge-trivial labels are skipped: ``nx =
    ny = 0`` in both sectors and ``nx ny = 0`` for TM.
    """
    _check(s, Omega, L, a)
    u0 = 0.5 * (float(_xi(Omega)) - 1.0)
    nmax = int(math.floor(u0 * L / (math.pi * a) + _TIE))
    if (nmax + 1) ** 2 > budget:
        raise EnumerationBudgetError(
            f"search box of {(nmax + 1) ** 2} cells exceeds budget {budget}")
    geom = GuideGeometry(Lx=L, Ly=L, a=a)
    lo = 0 if s == "TE" else 1
    n = np.arange(lo, nmax + 1, dtype=float)
    nx, ny = np.meshgrid(n, n, indexing="ij")
    q = np.sqrt(theta(s, nx, ny, geom))
    top = np.floor(u0 - q + _TIE)
    counts = np.where(top >= 0, top + 1, 0)
    if s == "TE":
        counts[0, 0] = 0
    return int(counts.sum())


def count_modes_weighted(s: str, Omega: float, L: float, a: float = 1.0,
                         budget: int = 50_000_000) -> float:
    """Lattice count with half weight on the bounding planes.

    Points with ``l = 0``, ``nx = 0`` or ``ny = 0`` carry weight 1/2 per
    plane and no gauge exclusion is applied.  This is the trapezoidal
    approximation to :func:`dos_volume_analytic`; the ``l`` direction is not
    rescaled by ``L``, so it differs from :func:`count_modes_brute` at
    relative order ``1 / Omega`` for every ``L``.
    """
    _check(s, Omega, L, a)
    u0 = 0.5 * (float(_xi(Omega)) - 1.0)
    nmax = int(math.floor(u0 * L / (math.pi * a) + _TIE))
    if (nmax + 1) ** 2 > budget:
        raise EnumerationBudgetError(
            f"search box of {(nmax + 1) ** 2} cells exceeds budget {budget}")
    geom = GuideGeometry(Lx=L, Ly=L, a=a)
    n = np.arange(0, nmax + 1, dtype=float)
    nx, ny = np.meshgrid(n, n, indexing="ij")
    top = np.floor(u0 - np.sqrt(theta(s, nx, ny, geom)) + _TIE)
    counts = np.where(top >= 0, top + 0.5, 0.0)
    w = np.where(nx == 0, 0.5, 1.0) * np.where(ny == 0, 0.5, 1.0)
    return float((counts * w).sum())


def dos_volume_analytic(s: str, Omega: float, L: float, a: float = 1.0) -> float:
    """Continuum volume ``V^s_Omega`` in mode-count units.

    Gauge exclusions are ignored; they occupy a set of measure zero.
    """
    _check(s, Omega, L, a)
    pref = L * L / (a * a * math.pi)
    xi = float(_xi(Omega))
    if s == "TE":
        return pref * (xi - 1.0) ** 3 / 96.0
    w = 4.0 * Omega ** 2 - 2.0 * xi + 2.0
    if 4.0 * Omega ** 2 - 2.0 * xi - 2.0 <= 0:
        return 0.0
    O2 = Omega ** 2
    return pref * (3.0 * xi * O2 - 9.0 * O2 + 4.0
                   - (2.0 * O2 - xi + 1.0) * math.sqrt(w)) / 24.0


def dos_density_analytic(s: str, Omega, L: float = 1.0, a: float = 1.0):
    """Exact ``dV^s_Omega / dOmega`` in mode-count units.

    Only the height ``l(u)`` depends on ``Omega``, with ``dl/dOmega = 2
    Omega / xi``, and ``l(u0) = 0``, so differentiating under the integral
    gives ``(L / (pi a))^2 (pi / 2) (2 Omega / xi) u0^2 / 2``.
    """
    Om = np.asarray(Omega, dtype=float)
    xi = _xi(Om)
    if s == "TE":
        u0 = 0.5 * (xi - 1.0)
    else:
        arg = 4.0 * Om ** 2 - 2.0 * xi - 2.0
        u0 = 0.5 * np.sqrt(np.clip(arg, 0.0, None))
    area = 0.5 * u0 ** 2
    out = (L / (math.pi * a)) ** 2 * (math.pi / 2.0) * area * 2.0 * Om / xi
    return float(out) if out.ndim == 0 else out


def energy_growth_dos(sigma: float, rel_tol: float = 1e-12) -> float:
    """DOS estimate of the large-``L`` energy growth.

    Returns ``(pi / 2) int_0^inf Omega e^{-sigma Omega} (v'_TE + v'_TM) dOmega``
    with ``v = V a^2 / L^2``, i.e. the energy in units of
    ``hbar c L^2 / (pi sqrt(kappa0) a^3)``.
    """
    from scipy.integrate import quad

    if not sigma > 0:
        raise ValueError("sigma must be positive")

    def g(Om):
        d = dos_density_analytic("TE", Om) + dos_density_analytic("TM", Om)
        return Om * math.exp(-sigma * Om) * d

    # TM density vanishes below Omega = sqrt(6)
    brk = [math.sqrt(6.0), 1.0 / sigma, 10.0 / sigma, 60.0 / sigma]
    total, lo = 0.0, 0.0
    for hi in brk:
        val, _ = quad(g, lo, hi, epsrel=rel_tol, epsabs=0.0, limit=400)
        total += val
        lo = hi
    return 0.5 * math.pi * total


def _leading_coefficient(sector: str, n0: int, sigmas=(1e-3, 2e-3, 4e-3)) -> float:
    """``lim sigma^4 Gamma`` from the integral term, by quadratic extrapolation."""
    f = EnzEnergyFamily(sector)
    s = np.asarray(sigmas, dtype=float)
    y = np.array([float(f.tail_integral(n0, x)) * x ** 4 for x in s])
    return float(np.polyval(np.polyfit(s, y, len(s) - 1), 0.0))


def energy_growth_singular(sigma: float, c4_te: float | None = None,
                           c4_tm: float | None = None) -> float:
    """Energy growth from the ``sigma^-4`` singular coefficients.

    ``(c4_TE + c4_TM) / (8 pi sigma^4)`` in units ``hbar c L^2 /
    (sqrt(kappa0) a^3)``, returned in the units of :func:`energy_growth_dos`.
    Missing coefficients are computed from the ENZ energy summands.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if c4_te is None:
        c4_te = _leading_coefficient("TE", 1)
    if c4_tm is None:
        c4_tm = _leading_coefficient("TM", 0)
    return math.pi * (c4_te + c4_tm) / (8.0 * math.pi) / sigma ** 4


def energy_growth_leading(sigma: float, c4_te: float | None = None,
                          c4_tm: float | None = None) -> tuple[float, float]:
    """Both large-volume energy growth estimates at ``sigma``.

    Returns
    -------
    (dos, singular) : tuple of float
        :func:`energy_growth_dos` and :func:`energy_growth_singular`, both in
        units ``hbar c L^2 / (pi sqrt(kappa0) a^3)``; each tends to
        ``3 / (2 sigma^4)``.
    """
    return energy_growth_dos(sigma), energy_growth_singular(sigma, c4_te, c4_tm)
