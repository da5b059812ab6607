"""Generalized Euler-Maclaurin regularization engine.

For a summand ``f_sigma(k)`` that decays for ``sigma > 0`` the engine
evaluates

    S_m(k)[f]  = sum_{r=1}^{m} B_{2r}/(2r)! f^{(2r-1)}(k)
    Gamma^n_m  = f(n)/2 - S_m(n)[f] + int_n^inf f(x) dx
    Gamma^{n,n0}_m = sum_{k=n}^{n0-1} f(k) + Gamma^{n0}_m
    eps^n_m    = 2 zeta(2m+1)/(2 pi)^{2m+1} int_n^inf |f^{(2m+1)}(x)| dx

All summand families work in mpmath arithmetic so that ``Gamma`` keeps its
constant term when the singular part is many orders of magnitude larger.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import mpmath as mp
import numpy as np

from . import calculus
from .special_fn import bernoulli_number, riemann_zeta

__all__ = [
    "SummandFamily",
    "EMConfig",
    "RegularizationReport",
    "SingularStartError",
    "HardyConditionError",
    "default_sigma_grid",
    "s_correction",
    "em_identity_residual",
    "gamma",
    "gamma_shifted",
    "gamma_multi",
    "tail_bound_epsilon",
    "select_n0",
]

DEFAULT_DPS = 40


class SingularStartError(ArithmeticError):
    """``S_m(n)`` is not finite; the sum must start the EM formula later."""

    def __init__(self, message: str, suggested_n0: Optional[int] = None):
        super().__init__(message)
        self.suggested_n0 = suggested_n0


class HardyConditionError(ArithmeticError):
    """``int |f^{(2m+1)}|`` does not converge."""


class SummandFamily:
    """A sigma-regulated summand ``f_sigma(k)``.

    Subclasses implement :meth:`value`, :meth:`derivative` and
    :meth:`tail_integral`, all returning mpmath numbers.

    Attributes
    ----------
    name : str
    n_min : int
        First index of the physical sum.
    closed_tail : bool
        ``True`` when ``int_n^inf f`` has a closed form.
    max_order : int
        Highest derivative order supplied.
    dps : int
        Working precision in decimal digits.
    fit_power : int
        Singular terms are integer powers of ``fit_variable(sigma)``.
    laurent_order, regular_order : int
        Default inverse and positive powers of the fit variable kept when
        ``Gamma`` is fitted.
    """

    name = "summand"
    n_min = 0
    closed_tail = False
    max_order = 17
    dps = DEFAULT_DPS
    fit_power = 1
    laurent_order = 4
    regular_order = 2

    def value(self, k, sigma):
        raise NotImplementedError

    def derivative(self, k, sigma, order: int):
        raise NotImplementedError

    def tail_integral(self, n, sigma):
        raise NotImplementedError

    def fit_variable(self, sigma):
        """Variable in which the singular part is a Laurent-log series."""
        return sigma

    def supports_sigma_zero(self, order: int) -> bool:
        """Whether ``derivative(k, 0, order)`` is finite."""
        return False

    def decay_length(self, sigma) -> float:
        """Scale in ``k`` beyond which ``f_sigma`` decays exponentially."""
        return 1.0 / max(float(sigma), 1e-300)

    def real_function(self, sigma) -> calculus.RealFunction:
        """Double precision view at fixed ``sigma`` with analytic derivatives."""
        def func(x):
            with mp.workdps(self.dps):
                return float(self.value(mp.mpf(x), sigma))

        def derivs(x, order):
            with mp.workdps(self.dps):
                return float(self.derivative(mp.mpf(x), sigma, order))

        return calculus.RealFunction(func, derivs, self.max_order)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


def default_sigma_grid(sigma_min: float = 1 / 20000, sigma_max: float = 1 / 2000,
                       points: int = 64) -> tuple[float, ...]:
    """Log-spaced regulator grid."""
    if not (0 < sigma_min < sigma_max):
        raise ValueError("need 0 < sigma_min < sigma_max")
    if points < 2:
        raise ValueError("need at least two grid points")
    return tuple(float(s) for s in np.geomspace(sigma_min, sigma_max, points))


@dataclass(frozen=True)
class EMConfig:
    """Configuration of one regularization run.

    Parameters
    ----------
    n : int
        First index of the sum.
    n0 : int or None
        Index where the EM formula starts; ``None`` selects it automatically.
    m : int
        Number of Bernoulli corrections.
    sigma_grid : tuple of float
        Sorted positive regulator values.
    rel_tol : float
        Tolerance passed to the tail-bound integral.
    """

    n: int = 0
    n0: Optional[int] = None
    m: int = 3
    sigma_grid: tuple = field(default_factory=default_sigma_grid)
    rel_tol: float = 1e-8

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if self.n0 is not None and self.n0 < self.n:
            raise ValueError("n0 must be >= n")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        grid = tuple(float(s) for s in self.sigma_grid)
        if len(grid) < 2 or any(s <= 0 for s in grid):
            raise ValueError("sigma_grid must hold at least two positive values")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("sigma_grid must be strictly increasing")
        object.__setattr__(self, "sigma_grid", grid)

    def to_dict(self) -> dict:
        return {"n": self.n, "n0": self.n0, "m": self.m,
                "sigma_grid": list(self.sigma_grid), "rel_tol": self.rel_tol}

    @classmethod
    def from_dict(cls, d: dict) -> "EMConfig":
        return cls(n=d["n"], n0=d["n0"], m=d["m"],
                   sigma_grid=tuple(d["sigma_grid"]), rel_tol=d["rel_tol"])


@dataclass
class RegularizationReport:
    """Outcome of a regularization.

    ``singular_coefficients`` maps ``(j, k)`` to the coefficient of
    ``ln(sigma)^j * sigma^(-k)``; only terms with ``j > 0`` or ``k > 0``
    appear.  Regular terms with positive powers go into ``diagnostics``.
    """

    beta: float
    singular_coefficients: dict
    epsilon_bound: float
    config: EMConfig
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.epsilon_bound >= 0:
            raise ValueError("epsilon_bound must be non-negative")
        for (j, k) in self.singular_coefficients:
            if j == 0 and k <= 0:
                raise ValueError("regular term listed as singular")

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "epsilon_bound": self.epsilon_bound,
            "singular_coefficients": [
                {"log_power": j, "inverse_sigma_power": k, "value": v}
                for (j, k), v in sorted(self.singular_coefficients.items())
            ],
            "config": self.config.to_dict(),
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RegularizationReport":
        sc = {(e["log_power"], e["inverse_sigma_power"]): e["value"]
              for e in d["singular_coefficients"]}
        return cls(beta=d["beta"], singular_coefficients=sc,
                   epsilon_bound=d["epsilon_bound"],
                   config=EMConfig.from_dict(d["config"]),
                   diagnostics=d.get("diagnostics", {}))


def _bern_coeff(r: int):
    b = bernoulli_number(2 * r)
    return mp.mpf(b.numerator) / b.denominator / mp.factorial(2 * r)


def _finite(v) -> bool:
    return not isinstance(v, mp.mpc) and mp.isfinite(v)


def _checked_derivative(f: SummandFamily, k, sigma, order):
    try:
        v = f.derivative(k, sigma, order)
    except (ZeroDivisionError, ValueError, OverflowError) as exc:
        raise SingularStartError(
            f"f^({order}) of {f.name} is singular at k={k}: {exc}", k + 1) from None
    if isinstance(v, mp.mpc):
        if abs(v.imag) <= mp.mpf(10) ** (-f.dps // 2) * max(1, abs(v.real)):
            return v.real
        raise SingularStartError(
            f"f^({order}) of {f.name} is not real analytic at k={k}", k + 1)
    if not mp.isfinite(v):
        raise SingularStartError(f"f^({order}) of {f.name} diverges at k={k}", k + 1)
    return v


def _derivative_stack(f: SummandFamily, k, sigma, m_max: int) -> dict:
    return {2 * r - 1: _checked_derivative(f, k, sigma, 2 * r - 1)
            for r in range(1, m_max + 1)}


def s_correction(f: SummandFamily, k, m: int, sigma):
    """Boundary correction ``S_m(k)[f_sigma]``.

    Parameters
    ----------
    f : SummandFamily
    k : int
        Evaluation index.
    m : int
        Number of Bernoulli terms.
    sigma : float

    Returns
    -------
    mpmath.mpf
    """
    with mp.workdps(f.dps):
        k = mp.mpf(k)
        d = _derivative_stack(f, k, mp.mpf(sigma), m)
        return mp.fsum(_bern_coeff(r) * d[2 * r - 1] for r in range(1, m + 1))


def gamma_multi(f: SummandFamily, n: int, n0: int, ms: Sequence[int], sigma) -> dict:
    """``Gamma^{n,n0}_m`` for several ``m`` sharing one derivative stack."""
    if n0 < n:
        raise ValueError("n0 must be >= n")
    with mp.workdps(f.dps):
        s = mp.mpf(sigma)
        d = _derivative_stack(f, mp.mpf(n0), s, max(ms))
        prefix = mp.fsum(f.value(mp.mpf(k), s) for k in range(n, n0))
        base = prefix + f.value(mp.mpf(n0), s) / 2 + f.tail_integral(mp.mpf(n0), s)
        out = {}
        for m in ms:
            S = mp.fsum(_bern_coeff(r) * d[2 * r - 1] for r in range(1, m + 1))
            out[m] = base - S
        return out


def gamma(f: SummandFamily, n: int, m: int, sigma):
    """``Gamma^n_m[f_sigma] = f(n)/2 - S_m(n) + int_n^inf f``.

    Raises
    ------
    SingularStartError
        When ``S_m(n)`` is singular; use :func:`gamma_shifted`.
    """
    return gamma_multi(f, n, n, [m], sigma)[m]


def gamma_shifted(f: SummandFamily, n: int, n0: int, m: int, sigma):
    """``sum_{k=n}^{n0-1} f(k) + Gamma^{n0}_m``."""
    return gamma_multi(f, n, n0, [m], sigma)[m]


def tail_bound_epsilon(f: SummandFamily, n: int, m: int, sigma,
                       rel_tol: float = 1e-8) -> float:
    """Bound ``eps^n_m`` on the Euler-Maclaurin remainder.

    ``sigma = 0`` is accepted for families whose ``(2m+1)``-th derivative
    is finite there.

    Raises
    ------
    HardyConditionError
        If the absolute derivative integral does not converge.
    """
    order = 2 * m + 1
    s = float(sigma)
    if s == 0.0 and not f.supports_sigma_zero(order):
        raise HardyConditionError(f"{f.name} has no sigma=0 derivative of order {order}")
    rf = f.real_function(s)
    # sample well past the exponential decay length
    x_max = n + max(1e4, 60.0 * f.decay_length(s)) if s > 0 else n + 1e4
    try:
        integral = calculus.abs_derivative_integral(rf, n, order, rel_tol, x_max=x_max)
    except calculus.DivergenceError as exc:
        raise HardyConditionError(str(exc)) from None
    pref = 2.0 * riemann_zeta(order) / (2.0 * math.pi) ** order
    return pref * integral


def select_n0(f: SummandFamily, n: int, m: int, sigma_grid: Sequence[float],
              max_shift: int = 8) -> int:
    """Smallest ``n0 >= n`` with ``S_m(n0)`` finite along the grid.

    ``S_m`` is evaluated at the largest, middle and smallest grid values.
    A non-finite value or a jump by more than ``1e6`` between successive
    probes rejects the candidate.
    """
    grid = sorted(sigma_grid, reverse=True)
    probes = [grid[0], grid[len(grid) // 2], grid[-1]]
    for n0 in range(n, n + max_shift + 1):
        try:
            vals = [s_correction(f, n0, m, s) for s in probes]
        except SingularStartError:
            continue
        ok = all(_finite(v) for v in vals)
        for a, b in zip(vals, vals[1:]):
            if ok and abs(a) > 0 and abs(b) / abs(a) > 1e6:
                ok = False
        if ok:
            return n0
    raise SingularStartError(f"no finite start found in [{n}, {n + max_shift}]")


def em_identity_residual(f, n: int, N: int, m: int, rel_tol: float = 1e-12) -> float:
    """Residual of the exact Euler-Maclaurin identity on ``[n, N]``.

    Both sides are evaluated independently in double precision.  Functions
    without an analytic derivative stack fall back to finite differences,
    which limits the attainable residual to about ``1e-8`` at high ``m``.

        sum_{k=n}^{N} f(k) - int_n^N f
            = (f(n) + f(N))/2 + S_m(N) - S_m(n) + T_m(n, N)

    where ``T_m = 1/(2m+1)! int_n^N P_{2m+1}(x) f^{(2m+1)}(x) dx`` is
    integrated panel by panel over unit intervals.

    Parameters
    ----------
    f : callable or RealFunction
    n, N : int
    m : int

    Returns
    -------
    float
        ``|LHS - RHS| / max(1, sum |f(k)|)``.
    """
    from .special_fn import periodic_bernoulli

    rf = calculus._as_real_function(f)
    terms = [float(rf(float(k))) for k in range(n, N + 1)]
    lhs = math.fsum(terms)
    size = max(1.0, math.fsum(abs(t) for t in terms))
    integral = calculus.integrate(rf, float(n), float(N), rel_tol).value
    lhs -= integral
    order = 2 * m + 1
    rhs = 0.5 * (float(rf(float(n))) + float(rf(float(N))))
    for r in range(1, m + 1):
        c = float(bernoulli_number(2 * r)) / math.factorial(2 * r)
        rhs += c * (calculus.derivative(rf, float(N), 2 * r - 1)
                    - calculus.derivative(rf, float(n), 2 * r - 1))
    # T_m may vanish (polynomials), so the panels need an absolute floor
    abs_tol = rel_tol * max(1.0, abs(lhs) + abs(integral))
    T = 0.0
    for k in range(n, N):
        g = lambda x: periodic_bernoulli(order, x) * np.array(  # noqa: E731
            [calculus.derivative(rf, float(t), order) for t in np.atleast_1d(x)])
        # P_k is a polynomial on (k, k+1); evaluate away from the jump
        lo, hi = k + 1e-15 * max(1, k), k + 1 - 1e-15 * max(1, k + 1)
        try:
            T += calculus.integrate(g, lo, hi, rel_tol, abs_tol=abs_tol).value
        except calculus.AccuracyError as exc:
            T += exc.best_estimate.value
    rhs += T / math.factorial(order)
    return abs(lhs - rhs) / size
