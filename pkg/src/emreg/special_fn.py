"""Exact and series-based special functions.

Bernoulli numbers are kept as exact fractions.  The zeta function and the
``K(sigma) = Y1(sigma/2) - H1(sigma/2)`` series are implemented directly so
that they can serve as independent references for the quadrature code.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "BERNOULLI_MAX_INDEX",
    "UnsupportedOrderError",
    "RegimeError",
    "bernoulli_number",
    "bernoulli_polynomial_coefficients",
    "periodic_bernoulli",
    "periodic_bernoulli_bound",
    "riemann_zeta",
    "k_function_series",
]

BERNOULLI_MAX_INDEX = 30


class UnsupportedOrderError(ValueError):
    """Requested index lies outside the tabulated range."""


class RegimeError(ValueError):
    """Argument outside the range where a truncated series is valid."""


@lru_cache(maxsize=None)
def _bernoulli_table() -> tuple[Fraction, ...]:
    # sum_{j=0}^{m} C(m+1, j) B_j = 0, B_1 = -1/2 convention
    B = [Fraction(1)]
    for m in range(1, BERNOULLI_MAX_INDEX + 1):
        acc = sum(math.comb(m + 1, j) * B[j] for j in range(m))
        B.append(-acc / (m + 1))
    return tuple(B)


def bernoulli_number(r: int) -> Fraction:
    """Exact Bernoulli number ``B_r``.

    Parameters
    ----------
    r : int
        Index, ``0 <= r <= 30``.  Odd ``r > 1`` gives an exact zero.

    Returns
    -------
    fractions.Fraction
        ``B_r`` in lowest terms with ``B_1 = -1/2``.

    Examples
    --------
    >>> bernoulli_number(12)
    Fraction(-691, 2730)
    """
    r = int(r)
    if r < 0:
        raise ValueError("Bernoulli index must be non-negative")
    if r > BERNOULLI_MAX_INDEX:
        raise UnsupportedOrderError(
            f"B_{r} requested; table holds indices up to {BERNOULLI_MAX_INDEX}"
        )
    return _bernoulli_table()[r]


@lru_cache(maxsize=None)
def bernoulli_polynomial_coefficients(k: int) -> tuple[Fraction, ...]:
    """Coefficients of ``B_k(x)`` in ascending powers of ``x``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    # B_k(x) = sum_j C(k, j) B_j x^{k-j}
    coeffs = [Fraction(0)] * (k + 1)
    for j in range(k + 1):
        coeffs[k - j] = math.comb(k, j) * bernoulli_number(j)
    return tuple(coeffs)


def periodic_bernoulli(k: int, x):
    """Periodic Bernoulli function ``P_k(x) = B_k(x - floor(x))``.

    Parameters
    ----------
    k : int
        Order, ``k >= 1``.
    x : float or array_like
        Evaluation point(s).

    Returns
    -------
    float or ndarray
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    xa = np.asarray(x, dtype=float)
    t = xa - np.floor(xa)
    c = [float(v) for v in bernoulli_polynomial_coefficients(k)]
    out = np.polynomial.polynomial.polyval(t, c)
    return float(out) if np.ndim(out) == 0 else out


def periodic_bernoulli_bound(k: int) -> float:
    """Sup-norm bound ``2 k! zeta(k) / (2 pi)^k`` on ``|P_k|`` (``inf`` at k=1)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return math.inf
    return 2.0 * math.factorial(k) * riemann_zeta(k) / (2.0 * math.pi) ** k


def riemann_zeta(k: int) -> float:
    """Riemann zeta at an integer ``k >= 2``.

    Even arguments use the Bernoulli closed form.  Odd arguments are summed
    directly up to ``N = 64`` and completed by an Euler-Maclaurin tail.
    """
    k = int(k)
    if k < 2:
        raise ValueError("zeta(k) requires k >= 2")
    if k % 2 == 0 and k <= BERNOULLI_MAX_INDEX:
        b = bernoulli_number(k)
        val = (-1) ** (k // 2 + 1) * float(b) * (2 * math.pi) ** k / (2 * math.factorial(k))
        return val
    N = 64
    head = math.fsum(j ** (-k) for j in range(1, N))
    # sum_{j>=N} j^-k = int_N^inf + f(N)/2 - sum_r B_2r/(2r)! f^(2r-1)(N)
    tail = N ** (1 - k) / (k - 1) + 0.5 * N ** (-k)
    for r in range(1, 7):
        order = 2 * r - 1
        rising = math.prod(range(k, k + order))
        dfn = -rising * N ** (-k - order)
        tail -= float(bernoulli_number(2 * r)) / math.factorial(2 * r) * dfn
    return head + tail


def _falling(p: float, d: int) -> float:
    return math.prod(p - i for i in range(d))


def _falling_dp(p: float, d: int) -> float:
    # derivative of the falling factorial with respect to p
    total = 0.0
    for i in range(d):
        total += math.prod(p - j for j in range(d) if j != i)
    return total


def _k_terms(order: int) -> list[tuple[float, float, float]]:
    """Terms ``(a, b, p)`` with ``K = sum (a + b ln x) x^p`` and ``x = sigma/2``."""
    terms: list[tuple[float, float, float]] = []
    # Y1(x) = -2/(pi x) + (2/pi) ln(x/2) J1(x)
    #         - (1/pi) sum_k (psi(k+1)+psi(k+2)) (-1)^k (x/2)^{2k+1} / (k!(k+1)!)
    terms.append((-2.0 / math.pi, 0.0, -1.0))
    ln2 = math.log(2.0)
    euler = 0.57721566490153286061
    for k in range(order):
        c = (-1) ** k / (math.factorial(k) * math.factorial(k + 1) * 2.0 ** (2 * k + 1))
        p = 2.0 * k + 1.0
        psi = -2 * euler + sum(1.0 / j for j in range(1, k + 1)) + sum(
            1.0 / j for j in range(1, k + 2)
        )
        # (2/pi) ln(x/2) J1 term
        terms.append((-(2.0 / math.pi) * ln2 * c, (2.0 / math.pi) * c, p))
        terms.append((-(1.0 / math.pi) * psi * c, 0.0, p))
    # H1(x) = (2/pi) sum_k (-1)^k (x/2)^{2k+2} / (Gamma(k+3/2) Gamma(k+5/2)) ... with x^2 prefactor
    for k in range(order):
        c = (-1) ** k / (math.gamma(k + 1.5) * math.gamma(k + 2.5) * 2.0 ** (2 * k + 2))
        terms.append((-c, 0.0, 2.0 * k + 2.0))
    return terms


def k_function_series(sigma: float, order: int = 8, deriv: int = 0) -> float:
    """Small-argument series of ``K(sigma) = Y1(sigma/2) - H1(sigma/2)``.

    Test oracle only.  Each ascending series is truncated after ``order``
    terms.

    Parameters
    ----------
    sigma : float
        Argument, ``0 < sigma <= 0.1``.
    order : int, optional
        Number of series terms, at most 8.
    deriv : int, optional
        Derivative order with respect to ``sigma``; taken term by term.

    Returns
    -------
    float
    """
    if not (0.0 < sigma <= 0.1):
        raise RegimeError("k_function_series is valid only for 0 < sigma <= 0.1")
    if not (1 <= order <= 8):
        raise RegimeError("order must lie in 1..8")
    if deriv < 0:
        raise ValueError("deriv must be non-negative")
    x = 0.5 * sigma
    lx = math.log(x)
    total = []
    for a, b, p in _k_terms(order):
        # d^d/dx^d [(a + b ln x) x^p]
        fp = _falling(p, deriv)
        val = (a + b * lx) * fp * x ** (p - deriv)
        if b != 0.0:
            val += b * _falling_dp(p, deriv) * x ** (p - deriv)
        total.append(val)
    return math.fsum(total) * 0.5 ** deriv
