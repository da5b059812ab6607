"""Spectra and mode functions of the cuboid cavity and the sech^2 guide.

The guide modes solve

    Y''(Z) + (Omega^2 sech^2(Z) - theta) Y(Z) = 0,

with bound states ``Omega^2 = (l + q)(l + q + 1)``, ``q = sqrt(theta)``.
They are finite series in ``sech``:

    even l:  Y = sech^q(Z)          sum_r c_r sech^{2r}(Z)
    odd  l:  Y = tanh(Z) sech^q(Z)  sum_r c_r sech^{2r}(Z)

Substituting ``sech^mu`` into the ODE and using
``(cosh^-mu)'' = mu^2 cosh^-mu - mu(mu+1) cosh^-(mu+2)`` gives the
two-term recurrence implemented in :func:`frobenius_coefficients`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special
from scipy.special import gammaln

__all__ = [
    "GuideGeometry",
    "ModeIndex",
    "ModeFunction",
    "ExcludedModeError",
    "theta",
    "omega_enz",
    "cuboid_omega",
    "frobenius_coefficients",
    "mode_function",
    "mode_values_precise",
    "orthogonality_integral",
    "norm_integral_closed",
    "normalization_constant",
]

_Z_CLAMP = 30.0


class ExcludedModeError(ValueError):
    """Mode labels describe a gauge-trivial (identically zero) field."""


@dataclass(frozen=True)
class GuideGeometry:
    """Cross-section ``Lx x Ly``, profile scale ``a`` and amplitude ``kappa0``."""

    Lx: float = 100.0
    Ly: float = 100.0
    a: float = 1.0
    kappa0: float = 1.0

    def __post_init__(self):
        for name in ("Lx", "Ly", "a", "kappa0"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")


@dataclass(frozen=True)
class ModeIndex:
    """Sector plus integer labels.

    For the guide the labels are ``(l, nx, ny)``; for the cuboid they are
    ``(nx, ny, nz)``.
    """

    sector: str
    labels: tuple
    system: str = "enz"

    def __post_init__(self):
        if self.sector not in ("TE", "TM"):
            raise ValueError("sector must be 'TE' or 'TM'")
        if self.system not in ("enz", "cuboid"):
            raise ValueError("system must be 'enz' or 'cuboid'")
        if len(self.labels) != 3 or any(int(v) != v or v < 0 for v in self.labels):
            raise ValueError("labels must be three non-negative integers")

    def check(self) -> None:
        """Raise :class:`ExcludedModeError` for gauge-trivial labels."""
        if self.system == "enz":
            _, nx, ny = self.labels
        else:
            nx, ny, nz = self.labels
        if nx == 0 and ny == 0:
            raise ExcludedModeError("nx = ny = 0 carries no field")
        if self.sector == "TM" and (nx == 0 or ny == 0):
            raise ExcludedModeError("TM modes with nx = 0 or ny = 0 vanish")
        if self.system == "cuboid" and self.sector == "TE" and nz < 1:
            raise ExcludedModeError("cuboid TE modes need nz >= 1")


def theta(sector: str, nx: int, ny: int, geom: GuideGeometry) -> float:
    """Transverse spectral parameter ``chi^2`` (TE) or ``chi^2 + 1`` (TM)."""
    chi2 = (math.pi * geom.a) ** 2 * ((nx / geom.Lx) ** 2 + (ny / geom.Ly) ** 2)
    if sector == "TE":
        return chi2
    if sector == "TM":
        return chi2 + 1.0
    raise ValueError("sector must be 'TE' or 'TM'")


def omega_enz(ell, th):
    """Guide eigenvalue ``Omega = sqrt((l + q)(l + q + 1))``, ``q = sqrt(theta)``."""
    q = np.sqrt(th)
    out = np.sqrt((ell + q) * (ell + q + 1.0))
    return float(out) if np.ndim(out) == 0 else out


def cuboid_omega(nx: int, ny: int, nz: int, geom: GuideGeometry) -> float:
    """Cavity eigenvalue ``a sqrt(kx^2 + ky^2 + kz^2)``."""
    kx = nx * math.pi / geom.Lx
    ky = ny * math.pi / geom.Ly
    kz = nz * math.pi / geom.a
    return geom.a * math.sqrt(kx * kx + ky * ky + kz * kz)


def frobenius_coefficients(ell: int, th: float) -> np.ndarray:
    """Coefficients ``c_r`` of the sech-power series, ``c_0 = 1``."""
    ell = int(ell)
    if ell < 0:
        raise ValueError("ell must be >= 0")
    q = math.sqrt(th)
    p = ell % 2
    om2 = (ell + q) * (ell + q + 1.0)
    R = (ell - p) // 2
    c = [1.0]
    for r in range(1, R + 1):
        num = (q + 2 * r + p - 2) * (q + 2 * r + p - 1) - om2
        c.append(c[-1] * num / (4.0 * r * (q + r)))
    return np.array(c)


@dataclass(frozen=True)
class ModeFunction:
    """Guide mode function ``Z_{l,theta}`` in Frobenius form.

    Attributes
    ----------
    ell : int
    theta : float
    parity : str
        ``'even'`` or ``'odd'``.
    exponent : float
        ``sqrt(theta)``.
    coefficients : ndarray
        ``c_r`` multiplying ``sech^{2r}``.
    """

    ell: int
    theta: float
    parity: str
    exponent: float
    coefficients: np.ndarray

    @property
    def omega2(self) -> float:
        q = self.exponent
        return (self.ell + q) * (self.ell + q + 1.0)

    def _parts(self, Z):
        Z = np.clip(np.asarray(Z, dtype=float), -_Z_CLAMP, _Z_CLAMP)
        sech = 1.0 / np.cosh(Z)
        tanh = np.tanh(Z)
        w = sech * sech
        c = self.coefficients
        r = np.arange(len(c))
        # P(w) = sum c_r w^r and its first two w-derivatives
        P = np.polynomial.polynomial.polyval(w, c)
        c1 = c[1:] * r[1:]
        P1 = np.polynomial.polynomial.polyval(w, c1) if len(c1) else np.zeros_like(w)
        c2 = c1[1:] * r[1:-1] if len(c1) > 1 else np.array([])
        P2 = np.polynomial.polynomial.polyval(w, c2) if len(c2) else np.zeros_like(w)
        return Z, sech, tanh, w, P, P1, P2

    def __call__(self, Z, deriv: int = 0):
        """Evaluate ``Z_{l,theta}`` or its first two derivatives."""
        Zc, sech, tanh, w, P, P1, P2 = self._parts(Z)
        q = self.exponent
        s_q = sech ** q
        # G(Z) = sech^q P(w), w' = -2 w tanh
        wp = -2.0 * w * tanh
        wpp = -2.0 * w * (1.0 - 3.0 * tanh * tanh)
        G = s_q * P
        Gp = s_q * (-q * tanh * P + P1 * wp)
        Gpp = s_q * (q * q * tanh * tanh * P - q * w * P - 2.0 * q * tanh * P1 * wp
                     + P2 * wp * wp + P1 * wpp)
        if self.parity == "even":
            out = (G, Gp, Gpp)[deriv]
        else:
            # Y = tanh G, tanh' = w, tanh'' = -2 w tanh
            if deriv == 0:
                out = tanh * G
            elif deriv == 1:
                out = w * G + tanh * Gp
            else:
                out = -2.0 * w * tanh * G + 2.0 * w * Gp + tanh * Gpp
        return float(out) if np.ndim(out) == 0 else out

    def ode_residual(self, Z):
        """``|Y'' + (Omega^2 sech^2 - theta) Y|`` at ``Z``."""
        Z = np.asarray(Z, dtype=float)
        pot = self.omega2 / np.cosh(Z) ** 2 - self.theta
        return np.abs(self(Z, 2) + pot * self(Z, 0))


def mode_values_precise(ell: int, th: float, Z: float, dps: int = 40):
    """``(Y, Y', Y'')`` of the Frobenius mode at one point in mpmath.

    For large ``theta`` the sech-power series nearly cancels near ``Z = 0``
    (``P(1) ~ theta^{-l/4}``), so double precision loses digits there.
    ``Y''`` is taken from the mode equation.
    """
    import mpmath as mp

    ell = int(ell)
    if ell < 0:
        raise ValueError("ell must be >= 0")
    if th < 0:
        raise ValueError("theta must be >= 0")
    with mp.workdps(dps):
        q = mp.sqrt(mp.mpf(th))
        p = ell % 2
        om2 = (ell + q) * (ell + q + 1)
        Zm = mp.mpf(min(max(Z, -_Z_CLAMP), _Z_CLAMP))
        sech = 1 / mp.cosh(Zm)
        tanh = mp.tanh(Zm)
        w = sech * sech
        P = P1 = mp.mpf(0)
        c = mp.mpf(1)
        wr = mp.mpf(1)
        for r in range((ell - p) // 2 + 1):
            if r > 0:
                num = (q + 2 * r + p - 2) * (q + 2 * r + p - 1) - om2
                c = c * num / (4 * r * (q + r))
                P1 += r * c * wr
                wr *= w
            P += c * wr
        s_q = sech ** q
        G = s_q * P
        Gp = s_q * (-q * tanh * P - 2 * w * tanh * P1)
        if p == 0:
            Y, Yp = G, Gp
        else:
            Y, Yp = tanh * G, w * G + tanh * Gp
        Ypp = (mp.mpf(th) - om2 * w) * Y
        return float(Y), float(Yp), float(Ypp)


def mode_function(ell: int, th: float) -> ModeFunction:
    """Frobenius mode function with leading coefficient 1."""
    if th < 0:
        raise ValueError("theta must be >= 0")
    c = frobenius_coefficients(ell, th)
    parity = "even" if ell % 2 == 0 else "odd"
    return ModeFunction(int(ell), float(th), parity, math.sqrt(th), c)


def orthogonality_integral(ell: int, ell2: int, th: float) -> float:
    """``int Y_l Y_l' sech^2 dZ`` over the real line.

    With ``t = tanh Z`` each mode is ``(1 - t^2)^{q/2}`` times a polynomial
    of degree ``l``, so the integral is a Gauss-Jacobi rule with weight
    ``(1 - t^2)^q``, exact up to rounding.
    """
    if (ell - ell2) % 2:
        return 0.0
    y1 = mode_function(ell, th)
    y2 = mode_function(ell2, th)
    q = y1.exponent
    t, w = special.roots_jacobi((ell + ell2) // 2 + 4, q, q)
    Z = np.arctanh(t)
    # cosh^{2q} = (1 - t^2)^{-q} removes the weight from the mode product
    vals = y1(Z) * y2(Z) * np.cosh(Z) ** (2.0 * q)
    return float(np.dot(w, vals))


def norm_integral_closed(ell, th):
    """Closed form of ``I = int Z_l^2 sech^2 dZ`` for leading coefficient 1.

    With ``t = tanh Z`` the mode is ``(1 - t^2)^{q/2} C_l^{(alpha)}(t) /
    C_l^{(alpha)}(1)``, ``alpha = q + 1/2``, so ``I`` is the Gegenbauer norm
    divided by ``C_l^{(alpha)}(1)^2``.  Valid for real ``l >= 0``.
    """
    q = np.sqrt(th)
    al = q + 0.5
    # log h_l = log pi + (1-2 alpha) log 2 + lgG(l+2a) - lgG(l+1) - log(l+a) - 2 lgG(a)
    logh = (math.log(math.pi) + (1.0 - 2.0 * al) * math.log(2.0) + gammaln(ell + 2 * al)
            - gammaln(ell + 1.0) - np.log(ell + al) - 2.0 * gammaln(al))
    # C_l(1) = Gamma(l + 2 alpha) / (l! Gamma(2 alpha))
    logc1 = gammaln(ell + 2 * al) - gammaln(ell + 1.0) - gammaln(2 * al)
    out = np.exp(logh - 2.0 * logc1)
    return float(out) if np.ndim(out) == 0 else out


def normalization_constant(mode: ModeIndex, geom: GuideGeometry) -> float:
    """Squared normalization constant in units ``hbar = eps0 = c = 1``.

    Cuboid:
        TE  ``4 NF / (kappa0 Lx Ly a k_perp^2 omega)``
        TM  ``4 NF / (kappa0 Lx Ly a k_perp^2 omega^3)``
    Guide:
        TE  ``2 NF / (kappa0 Lx Ly k_perp^2 omega I)``
        TM  ``2 / (kappa0 Lx Ly k_perp^2 omega^3 I)``

    ``NF`` is 1/2 for a vanishing transverse label (TE) or ``nz = 0`` (TM)
    and 1 otherwise.  ``omega = c Omega / (a sqrt(kappa0))``.
    """
    mode.check()
    a, k0 = geom.a, geom.kappa0
    if mode.system == "cuboid":
        nx, ny, nz = mode.labels
        kp2 = (nx * math.pi / geom.Lx) ** 2 + (ny * math.pi / geom.Ly) ** 2
        om = cuboid_omega(nx, ny, nz, geom) / (a * math.sqrt(k0))
        if mode.sector == "TE":
            nf = 0.5 if (nx == 0 or ny == 0) else 1.0
            return 4.0 * nf / (k0 * geom.Lx * geom.Ly * a * kp2 * om)
        nf = 0.5 if nz == 0 else 1.0
        return 4.0 * nf / (k0 * geom.Lx * geom.Ly * a * kp2 * om ** 3)
    ell, nx, ny = mode.labels
    kp2 = (nx * math.pi / geom.Lx) ** 2 + (ny * math.pi / geom.Ly) ** 2
    th = theta(mode.sector, nx, ny, geom)
    om = omega_enz(ell, th) / (a * math.sqrt(k0))
    I = orthogonality_integral(ell, ell, th)
    if mode.sector == "TE":
        nf = 0.5 if (nx == 0 or ny == 0) else 1.0
        return 2.0 * nf / (k0 * geom.Lx * geom.Ly * kp2 * om * I)
    return 2.0 / (k0 * geom.Lx * geom.Ly * kp2 * om ** 3 * I)


def spectrum_table(ells: Sequence[int], thetas: Sequence[float]) -> list[tuple]:
    """Rows ``(l, theta, Omega)`` for every pair."""
    return [(int(l), float(t), omega_enz(l, t)) for t in thetas for l in ells]
