"""Extraction of the regular part ``beta`` from sampled ``Gamma(sigma)``.

The sampled values are fitted by a Laurent series with a logarithm,

    Gamma(sigma) ~ sum_{j,k} c_{j,k} ln(sigma)^j sigma^k,

and ``beta = c_{0,0}``.  Families whose ``Gamma`` is an explicit
meromorphic function of the fit variable are handled exactly instead, by
averaging over a circle around the pole.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import mpmath as mp
import numpy as np

from . import em_core
from .em_core import EMConfig, RegularizationReport, SummandFamily

__all__ = [
    "ModelSpec",
    "LaurentLogModel",
    "IllConditionedFitError",
    "InstabilityError",
    "ScanResult",
    "fit_laurent_log",
    "sample_gamma",
    "extract_beta",
    "analytic_laurent",
    "model_scan",
    "combine_reports",
]

FIT_DPS = 40


class IllConditionedFitError(ArithmeticError):
    """Design matrix is numerically rank deficient."""

    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition


class InstabilityError(ArithmeticError):
    """No plateau of the extracted constant was found."""


@dataclass(frozen=True)
class ModelSpec:
    """Column set of the fit.

    ``kind='reduced'`` fits ``c_L ln(sigma) + sum_{j=0}^{N} c_j sigma^{-j}``.
    ``kind='general'`` adds the regular powers ``t, ..., t^{regular}`` and
    ``t^{regular} ln(sigma)``.  Exponents refer to the fit variable
    ``t = sigma^{1/power}``, so ``nmax`` counts powers of ``t``.

    Parameters
    ----------
    kind : {'reduced', 'general'}
    nmax : int
        Highest inverse power ``N``.
    regular : int
        Highest positive power (general form only).
    """

    kind: str = "general"
    nmax: int = 4
    regular: int = 2

    def __post_init__(self):
        if self.kind not in ("reduced", "general"):
            raise ValueError("kind must be 'reduced' or 'general'")
        if self.nmax < 0:
            raise ValueError("nmax must be >= 0")
        if self.regular < 0:
            raise ValueError("regular must be >= 0")

    def columns(self) -> list[tuple[int, int]]:
        """``(log power, t power)`` pairs."""
        cols = [(1, 0)] + [(0, -j) for j in range(self.nmax, -1, -1)]
        if self.kind == "general":
            cols += [(0, k) for k in range(1, self.regular + 1)]
            if self.regular > 0:
                cols.append((1, self.regular))
        return cols

    def to_dict(self) -> dict:
        return {"kind": self.kind, "nmax": self.nmax, "regular": self.regular}


@dataclass
class LaurentLogModel:
    """Fitted coefficients keyed by ``(log power, t power)``."""

    spec: ModelSpec
    power: int
    coefficients: dict
    residual_norm: float
    condition: float
    samples: int

    def __post_init__(self):
        if len(self.coefficients) > self.samples:
            raise ValueError("more coefficients than samples")
        if self.residual_norm < 0:
            raise ValueError("residual norm must be >= 0")

    @property
    def constant(self) -> float:
        return self.coefficients[(0, 0)]

    def __call__(self, sigma):
        t = mp.mpf(sigma) ** (mp.mpf(1) / self.power)
        ls = mp.log(mp.mpf(sigma))
        return float(mp.fsum(c * ls ** j * t ** k for (j, k), c in self.coefficients.items()))

    def singular_part(self) -> dict:
        """Map ``(j, k)`` to the coefficient of ``ln(sigma)^j sigma^{-k}``."""
        out = {}
        for (j, k), c in self.coefficients.items():
            if j > 0 or k < 0:
                kk = -k / self.power
                out[(j, int(kk) if float(kk).is_integer() else kk)] = float(c)
        # positive powers times ln are not singular
        return {key: v for key, v in out.items() if key[0] == 0 or key[1] >= 0}


def fit_laurent_log(samples: Sequence[tuple], model_spec: ModelSpec = ModelSpec(),
                    power: int = 1, dps: int = FIT_DPS) -> LaurentLogModel:
    """Least-squares fit of the Laurent-log model.

    Parameters
    ----------
    samples : sequence of (sigma, Gamma)
        ``sigma`` positive and distinct; ``Gamma`` may be an mpmath number.
    model_spec : ModelSpec
    power : int
        The fit variable is ``t = sigma^{1/power}``.
    dps : int
        Working precision.  Columns are scaled to unit maximum and the
        system is solved by Householder QR.

    Returns
    -------
    LaurentLogModel

    Raises
    ------
    IllConditionedFitError
        If the scaled design matrix is rank deficient at ``dps``.
    """
    cols = model_spec.columns()
    sig = [s for s, _ in samples]
    if len(samples) < 2 * len(cols):
        raise ValueError(f"need at least {2 * len(cols)} samples for {len(cols)} coefficients")
    if any(float(s) <= 0 for s in sig):
        raise ValueError("sigma values must be positive")
    if len({float(s) for s in sig}) != len(sig):
        raise ValueError("sigma values must be distinct")
    with mp.workdps(dps):
        rows, rhs = [], []
        for s, g in samples:
            s = mp.mpf(s)
            t = s ** (mp.mpf(1) / power)
            ls = mp.log(s)
            rows.append([ls ** j * t ** k for j, k in cols])
            rhs.append(mp.mpf(g))
        scale = [max(abs(r[c]) for r in rows) for c in range(len(cols))]
        A = mp.matrix([[r[c] / scale[c] for c in range(len(cols))] for r in rows])
        b = mp.matrix(rhs)
        sv = mp.svd_r(A, compute_uv=False)
        smax, smin = max(sv), min(sv)
        cond = float(smax / smin) if smin > 0 else math.inf
        if not cond < 10.0 ** (dps - 6):
            raise IllConditionedFitError(f"fit condition number {cond:.3g}", cond)
        x, res = mp.qr_solve(A, b)
        coeffs = {col: x[i] / scale[i] for i, col in enumerate(cols)}
        return LaurentLogModel(model_spec, power, coeffs, float(res), cond, len(samples))


def sample_gamma(f: SummandFamily, n: int, n0: int, ms: Sequence[int],
                 grid: Sequence[float]) -> dict:
    """``Gamma^{n,n0}_m(sigma)`` for each ``m`` in ``ms`` along ``grid``."""
    out = {m: [] for m in ms}
    for s in grid:
        vals = em_core.gamma_multi(f, n, n0, ms, s)
        for m in ms:
            out[m].append((s, vals[m]))
    return out


def analytic_laurent(f: SummandFamily, n: int, n0: int, m: int, orders: int = 6,
                     radius: float = 0.5, points: int = 128, dps: int = 60) -> dict:
    """Laurent coefficients of an explicit ``Gamma(t)`` by contour averaging.

    Returns a map from ``k`` to the coefficient of ``t^k`` for
    ``-orders <= k <= 0``.
    """
    with mp.workdps(dps):
        ts = [radius * mp.expjpi(mp.mpf(2 * j) / points) for j in range(points)]
        vals = [f.gamma_in_t(n, n0, m, t) for t in ts]
        out = {}
        for k in range(-orders, 1):
            c = mp.fsum(v * t ** (-k) for v, t in zip(vals, ts)) / points
            out[k] = float(mp.re(c))
        return out


def _to_fit_variable(f: SummandFamily, samples):
    # the model is a Laurent series in t = fit_variable(sigma); pass t^power
    power = getattr(f, "fit_power", 1)
    with mp.workdps(max(f.dps, FIT_DPS)):
        return [(f.fit_variable(s) ** power, g) for s, g in samples]


def _resolve_n0(f: SummandFamily, config: EMConfig) -> int:
    n = max(config.n, f.n_min)
    if config.n0 is not None:
        return max(config.n0, n)
    return em_core.select_n0(f, n, config.m, config.sigma_grid)


def extract_beta(f: SummandFamily, config: EMConfig = EMConfig(),
                 model_spec: Optional[ModelSpec] = None, *, analytic: bool = True,
                 samples: Optional[Sequence[tuple]] = None,
                 epsilon: Optional[float] = None) -> RegularizationReport:
    """Regular part ``beta`` of ``sum_{k>=n} f_sigma(k)``.

    Parameters
    ----------
    f : SummandFamily
    config : EMConfig
    model_spec : ModelSpec, optional
        Defaults to the general form with ``nmax`` matched to the family.
    analytic : bool
        Use the contour path when the family has an explicit ``Gamma``.
    samples : sequence of (sigma, Gamma), optional
        Precomputed samples on ``config.sigma_grid``.
    epsilon : float, optional
        Precomputed tail bound.

    Returns
    -------
    RegularizationReport
    """
    t_start = time.perf_counter()
    n = max(config.n, f.n_min)
    n0 = _resolve_n0(f, config)
    diag = {"family": f.name, "n": n, "n0": n0}
    power = getattr(f, "fit_power", 1)
    if analytic and hasattr(f, "gamma_in_t"):
        lc = analytic_laurent(f, n, n0, config.m)
        beta = lc[0]
        sing = {}
        for k, c in lc.items():
            if k < 0 and abs(c) > 1e-14 * max(1.0, abs(beta)):
                kk = -k / power
                sing[(0, int(kk) if float(kk).is_integer() else kk)] = c
        diag["path"] = "analytic"
    else:
        spec = model_spec or ModelSpec("general", f.laurent_order, f.regular_order)
        if samples is None:
            samples = sample_gamma(f, n, n0, [config.m], config.sigma_grid)[config.m]
        model = fit_laurent_log(_to_fit_variable(f, samples), spec, power,
                                dps=max(FIT_DPS, f.dps))
        beta = float(model.constant)
        sing = model.singular_part()
        diag.update({"path": "fit", "model": spec.to_dict(), "power": power,
                     "residual_norm": model.residual_norm, "condition": model.condition})
    if epsilon is None:
        epsilon = em_core.tail_bound_epsilon(f, n0, config.m, config.sigma_grid[0],
                                             config.rel_tol)
    diag["seconds"] = time.perf_counter() - t_start
    return RegularizationReport(beta=float(beta), singular_coefficients=sing,
                                epsilon_bound=float(epsilon), config=config,
                                diagnostics=diag)


@dataclass
class ScanResult:
    """Grid of extracted constants.

    ``rows`` holds ``(m, N, c0, eps)``; ``selected`` maps ``m`` to the
    plateau choice ``(N, c0)``.
    """

    rows: list
    selected: dict = field(default_factory=dict)

    def value(self, m: int, N: int) -> float:
        for mm, NN, c0, _ in self.rows:
            if mm == m and NN == N:
                return c0
        raise KeyError((m, N))

    def epsilon(self, m: int) -> float:
        for mm, _, _, eps in self.rows:
            if mm == m:
                return eps
        raise KeyError(m)


def model_scan(f: SummandFamily, config: EMConfig, nmax_range: Sequence[int],
               m_range: Sequence[int], kind: str = "reduced",
               samples: Optional[dict] = None, epsilons: Optional[dict] = None) -> ScanResult:
    """Extract ``c0`` for every ``(m, N)`` and locate the plateau.

    For each ``m`` the selected ``N`` minimizes ``|c0(N) - c0(N+1)|`` with
    ties going to the smaller ``N``.

    Raises
    ------
    InstabilityError
        If every adjacent spread exceeds ten times the tail bound.
    """
    nmax_range = sorted(nmax_range)
    m_range = sorted(m_range)
    if not nmax_range or not m_range:
        raise ValueError("ranges must be non-empty")
    n = max(config.n, f.n_min)
    n0 = _resolve_n0(f, EMConfig(n, config.n0, max(m_range), config.sigma_grid, config.rel_tol))
    power = getattr(f, "fit_power", 1)
    if samples is None:
        samples = sample_gamma(f, n, n0, m_range, config.sigma_grid)
    rows, selected = [], {}
    stable = False
    for m in m_range:
        eps = (epsilons or {}).get(m)
        if eps is None:
            eps = em_core.tail_bound_epsilon(f, n0, m, config.sigma_grid[0], config.rel_tol)
        vals = {}
        for N in nmax_range:
            model = fit_laurent_log(_to_fit_variable(f, samples[m]), ModelSpec(kind, N), power,
                                    dps=max(FIT_DPS, f.dps))
            vals[N] = float(model.constant)
            rows.append((m, N, vals[N], float(eps)))
        if len(nmax_range) == 1:
            selected[m] = (nmax_range[0], vals[nmax_range[0]])
            stable = True
            continue
        spreads = [(abs(vals[a] - vals[b]), a) for a, b in zip(nmax_range, nmax_range[1:])]
        best = min(spreads, key=lambda p: (p[0], p[1]))
        selected[m] = (best[1], vals[best[1]])
        if best[0] <= 10.0 * eps:
            stable = True
    if not stable:
        raise InstabilityError("no plateau within ten times the tail bound")
    return ScanResult(rows, selected)


def combine_reports(*reports: RegularizationReport) -> tuple[float, float]:
    """Sum of the ``beta`` values and of their tail bounds."""
    return (math.fsum(r.beta for r in reports), math.fsum(r.epsilon_bound for r in reports))
