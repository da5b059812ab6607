"""Command line front end.

Subcommands
-----------
energy
    Regularized ground-state energy per unit area.
stress
    Regularized normal stress (pressure) per unit area.
scan
    ``(m, N, c0, eps)`` tables over fit models and Bernoulli orders.
modes
    Sampled guide mode functions with their ODE residual.
dos
    Mode counts, continuum volumes and the large-volume energy growth.

Settings come from an optional JSON file (``--config``) overridden by
flags.  Every report is written as JSON (with ``schema_version``) or as
RFC 4180 CSV with numbers printed to 17 significant digits.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.

CSV layouts
-----------
energy, stress
    ``sector, kind, label, sigma, value`` where ``kind`` is ``result``,
    ``coefficient`` (label ``ln^j sigma^-k``) or ``sample`` (label
    ``gamma``).
scan
    ``sector, m, N, c0, epsilon``; combined rows use sector ``total`` and
    ``N`` empty.
modes
    ``ell, theta, omega, Z, value, ode_residual``.
dos
    ``omega, count_TE, volume_TE, count_TM, volume_TM``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__, dos, extractor, spectra, summands
from .em_core import EMConfig, default_sigma_grid

__all__ = ["RunConfig", "ConfigError", "main", "run", "cmd_energy", "cmd_stress",
           "cmd_scan", "cmd_modes", "cmd_dos"]

SCHEMA_VERSION = 1
COMMANDS = ("energy", "stress", "scan", "modes", "dos")

# Paper-default grids
ENERGY_GRID = (1 / 20000, 1 / 2000, 64)
STRESS_GRID = (0.02, 0.5, 40)
HOM_BENCHMARK = math.pi ** 2 / 720


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass
class RunConfig:
    """Declarative settings of one CLI run.

    ``None`` selects the default of the chosen pipeline.  Geometry values are
    in units of the profile scale unless ``a`` is changed.
    """

    command: str = "energy"
    system: str = "enz"
    sector: str = "both"
    # geometry
    Lx: float = 100.0
    Ly: float = 100.0
    a: float = 1.0
    kappa0: float = 1.0
    z0: float = 0.0
    # regularization
    n: int = 0
    n0: Optional[int] = None
    m: Optional[int] = None
    sigma_min: Optional[float] = None
    sigma_max: Optional[float] = None
    grid_points: Optional[int] = None
    rel_tol: float = 1e-8
    # model
    model_kind: str = "general"
    nmax_power: Optional[int] = None
    regular: Optional[int] = None
    # stress quadrature
    level: int = 6
    # scan
    m_values: list = field(default_factory=lambda: [2, 3, 4, 5, 6, 7, 8])
    nmin_power: int = 2
    # modes
    ells: list = field(default_factory=lambda: [0, 1, 2, 3, 4])
    thetas: list = field(default_factory=lambda: [1.0])
    z_min: float = -3.0
    z_max: float = 3.0
    z_points: int = 61
    # dos
    L: float = 100.0
    omega_max: float = 10.0
    omega_points: int = 11
    sigma_growth: float = 0.01
    # output
    format: str = "json"
    out: Optional[str] = None

    def validate(self) -> "RunConfig":
        def pos(name, allow_none=False):
            v = getattr(self, name)
            if v is None and allow_none:
                return
            if not (isinstance(v, (int, float)) and not isinstance(v, bool)
                    and math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be a positive number, got {v!r}")

        def nonneg_int(name, allow_none=False):
            v = getattr(self, name)
            if v is None and allow_none:
                return
            if not (isinstance(v, int) and not isinstance(v, bool) and v >= 0):
                raise ConfigError(f"{name} must be a non-negative integer, got {v!r}")

        if self.command not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}")
        if self.system not in ("cuboid", "enz"):
            raise ConfigError("system must be 'cuboid' or 'enz'")
        if self.sector not in ("TE", "TM", "both"):
            raise ConfigError("sector must be 'TE', 'TM' or 'both'")
        for name in ("Lx", "Ly", "a", "kappa0", "rel_tol", "L", "omega_max", "sigma_growth"):
            pos(name)
        for name in ("sigma_min", "sigma_max"):
            pos(name, allow_none=True)
        if not math.isfinite(self.z0):
            raise ConfigError("z0 must be finite")
        nonneg_int("n")
        for name in ("n0", "nmax_power", "regular"):
            nonneg_int(name, allow_none=True)
        if self.n0 is not None and self.n0 < self.n:
            raise ConfigError("n0 must be >= n")
        if self.m is not None and not (isinstance(self.m, int) and self.m >= 1):
            raise ConfigError("m must be an integer >= 1")
        if self.grid_points is not None and not (isinstance(self.grid_points, int)
                                                 and self.grid_points >= 2):
            raise ConfigError("grid_points must be an integer >= 2")
        if (self.sigma_min is not None and self.sigma_max is not None
                and not self.sigma_min < self.sigma_max):
            raise ConfigError("sigma_min must be below sigma_max")
        if self.model_kind not in ("reduced", "general"):
            raise ConfigError("model_kind must be 'reduced' or 'general'")
        if not (isinstance(self.level, int) and 3 <= self.level <= 9):
            raise ConfigError("level must be an integer in [3, 9]")
        if not self.m_values or any(not isinstance(v, int) or v < 1 for v in self.m_values):
            raise ConfigError("m_values must be a non-empty list of integers >= 1")
        nonneg_int("nmin_power")
        if not self.ells or any(not isinstance(v, int) or v < 0 for v in self.ells):
            raise ConfigError("ells must be a non-empty list of non-negative integers")
        if not self.thetas or any(not isinstance(v, (int, float)) or not v > 0
                                  for v in self.thetas):
            raise ConfigError("thetas must be a non-empty list of positive numbers")
        if not (self.z_min < self.z_max):
            raise ConfigError("z_min must be below z_max")
        if not (isinstance(self.z_points, int) and self.z_points >= 2):
            raise ConfigError("z_points must be an integer >= 2")
        if not (isinstance(self.omega_points, int) and self.omega_points >= 2):
            raise ConfigError("omega_points must be an integer >= 2")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be 'json' or 'csv'")
        try:
            spectra.GuideGeometry(self.Lx, self.Ly, self.a, self.kappa0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        return cls(**d)

    # derived settings

    def sectors(self) -> list[str]:
        return ["TE", "TM"] if self.sector == "both" else [self.sector]

    def grid(self, defaults) -> tuple:
        lo = self.sigma_min if self.sigma_min is not None else defaults[0]
        hi = self.sigma_max if self.sigma_max is not None else defaults[1]
        pts = self.grid_points if self.grid_points is not None else defaults[2]
        if not lo < hi:
            raise ConfigError("sigma_min must be below sigma_max")
        return default_sigma_grid(lo, hi, pts)

    def geometry(self) -> spectra.GuideGeometry:
        return spectra.GuideGeometry(self.Lx, self.Ly, self.a, self.kappa0)


# --------------------------------------------------------------------------
# helpers


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    try:
        import mpmath as mp
        if isinstance(obj, mp.mpf):
            return float(obj)
    except ImportError:  # pragma: no cover
        pass
    return obj


def _json_text(config: RunConfig, results: dict) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "generator": f"emreg {__version__}",
           "config": config.to_dict(), "results": _jsonable(results)}
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _emit(config: RunConfig, results: dict, header, rows) -> str:
    text = _json_text(config, results) if config.format == "json" else _csv_text(header, rows)
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


def _report_rows(sector: str, report, samples=None) -> list:
    rows = [(sector, "result", "beta", None, report.beta),
            (sector, "result", "epsilon", None, report.epsilon_bound)]
    for (j, k), v in sorted(report.singular_coefficients.items()):
        rows.append((sector, "coefficient", f"ln^{j} sigma^-{_fmt(k)}", None, v))
    for s, g in samples or []:
        rows.append((sector, "sample", "gamma", float(s), float(g)))
    return rows


def _model_spec(config: RunConfig, family) -> extractor.ModelSpec:
    return extractor.ModelSpec(
        config.model_kind,
        config.nmax_power if config.nmax_power is not None else family.laurent_order,
        config.regular if config.regular is not None else family.regular_order)


def _enz_energy_reports(config: RunConfig, keep_samples: bool = True) -> dict:
    grid = config.grid(ENERGY_GRID)
    m = config.m or 3
    out = {}
    for s in config.sectors():
        f = summands.EnzEnergyFamily(s)
        ec = EMConfig(n=config.n, n0=config.n0, m=m, sigma_grid=grid, rel_tol=config.rel_tol)
        n0 = extractor._resolve_n0(f, ec)
        samples = extractor.sample_gamma(f, max(config.n, f.n_min), n0, [m], grid)[m]
        ec = EMConfig(n=config.n, n0=n0, m=m, sigma_grid=grid, rel_tol=config.rel_tol)
        rep = extractor.extract_beta(f, ec, _model_spec(config, f), samples=samples)
        out[s] = (rep, samples if keep_samples else None)
    return out


def _hom_reports(config: RunConfig, quantity: str) -> dict:
    grid = config.grid(ENERGY_GRID)
    m = config.m or 2
    out = {}
    for s in config.sectors():
        f = summands.HomogeneousFamily(quantity, s)
        ec = EMConfig(n=config.n, n0=config.n0, m=m, sigma_grid=grid, rel_tol=config.rel_tol)
        out[s] = (extractor.extract_beta(f, ec), None)
    return out


def _richardson_derivative(func, x: float, rel_step: float = 0.01) -> float:
    h = rel_step * x
    d1 = (func(x + h) - func(x - h)) / (2 * h)
    d2 = (func(x + h / 2) - func(x - h / 2)) / h
    return (4 * d2 - d1) / 3


# --------------------------------------------------------------------------
# commands


def cmd_energy(config: RunConfig) -> dict:
    """Regularized energy per unit area.

    cuboid: ``beta`` per sector on the analytic path and the per-area
    coefficient ``(pi^2 / 8) sum beta`` of ``hbar c / (sqrt(kappa0) a^3)``.
    enz: fitted ``beta`` per sector, their sum with additive bound, the
    per-area coefficient ``sum beta / (8 pi)`` and its ratio to ``pi^2/720``.
    """
    reps = _hom_reports(config, "energy") if config.system == "cuboid" \
        else _enz_energy_reports(config)
    total = math.fsum(r.beta for r, _ in reps.values())
    eps = math.fsum(r.epsilon_bound for r, _ in reps.values())
    if config.system == "cuboid":
        coeff = math.pi ** 2 / 8.0 * total
    else:
        coeff = total / (8.0 * math.pi)
    res = {
        "system": config.system, "quantity": "energy",
        "sectors": {s: r.to_dict() for s, (r, _) in reps.items()},
        "total_beta": total, "total_epsilon": eps,
        "energy_per_area_coefficient": coeff,
        "energy_per_area_units": "hbar c / (sqrt(kappa0) a^3)",
        "energy_per_area": coeff / (math.sqrt(config.kappa0) * config.a ** 3),
        "ratio_to_homogeneous": coeff / HOM_BENCHMARK,
    }
    rows = []
    for s, (r, smp) in reps.items():
        rows += _report_rows(s, r, smp)
    rows += [("total", "result", "beta", None, total),
             ("total", "result", "epsilon", None, eps),
             ("total", "result", "energy_per_area_coefficient", None, coeff),
             ("total", "result", "ratio_to_homogeneous", None, coeff / HOM_BENCHMARK)]
    _emit(config, res, ["sector", "kind", "label", "sigma", "value"], rows)
    return res


def cmd_stress(config: RunConfig) -> dict:
    """Regularized normal stress per unit area.

    cuboid: ``beta`` per sector, the pressure coefficient ``(pi^2 / 8) sum
    beta`` of ``hbar c / (sqrt(kappa0) a^4)`` and the check against
    ``-dE/da`` by a Richardson central difference at ``+-1%`` of ``a``.
    enz: both parity classes of ``l`` at ``z0 = 0`` per sector, with the
    shift of ``beta`` under one refinement of the quadrature.
    """
    rows = []
    if config.system == "cuboid":
        reps = _hom_reports(config, "stress")
        ereps = _hom_reports(config, "energy")
        total = math.fsum(r.beta for r, _ in reps.values())
        eps = math.fsum(r.epsilon_bound for r, _ in reps.values())
        coeff = math.pi ** 2 / 8.0 * total
        e_coeff = math.pi ** 2 / 8.0 * math.fsum(r.beta for r, _ in ereps.values())
        k0 = math.sqrt(config.kappa0)
        pressure = coeff / (k0 * config.a ** 4)
        deriv = -_richardson_derivative(lambda a: e_coeff / (k0 * a ** 3), config.a)
        resid = abs(deriv - pressure) / abs(pressure)
        res = {
            "system": "cuboid", "quantity": "stress",
            "sectors": {s: r.to_dict() for s, (r, _) in reps.items()},
            "total_beta": total, "total_epsilon": eps,
            "pressure_coefficient": coeff,
            "pressure_units": "hbar c / (sqrt(kappa0) a^4)",
            "pressure": pressure,
            "minus_dE_da": deriv,
            "derivative_identity_residual": resid,
        }
        for s, (r, _) in reps.items():
            rows += _report_rows(s, r)
        rows += [("total", "result", "pressure_coefficient", None, coeff),
                 ("total", "result", "minus_dE_da", None, deriv),
                 ("total", "result", "derivative_identity_residual", None, resid)]
    else:
        if config.z0 != 0.0:
            raise ConfigError("the regularized guide stress is available at z0 = 0 only")
        grid = config.grid(STRESS_GRID)
        m = config.m or 3
        n0 = config.n0 if config.n0 is not None else summands.EnzStressFamily.default_n0
        ec = EMConfig(n=config.n, n0=max(n0, config.n), m=m, sigma_grid=grid,
                      rel_tol=config.rel_tol)
        sectors = {}
        total = eps = 0.0
        for s in config.sectors():
            classes = {}
            for P in (0, 1):
                f = summands.EnzStressFamily(s, P, level=config.level)
                spec = _model_spec(config, f)
                samples = extractor.sample_gamma(f, ec.n, ec.n0, [m], grid)[m]
                rep = extractor.extract_beta(f, ec, spec, samples=samples)
                fine = summands.EnzStressFamily(s, P, level=config.level + 1)
                rep_fine = extractor.extract_beta(fine, ec, spec, epsilon=rep.epsilon_bound)
                shift = abs(rep_fine.beta - rep.beta)
                rep.diagnostics["refined_beta"] = rep_fine.beta
                rep.diagnostics["refinement_shift"] = shift
                label = f"{s}-{'even' if P == 0 else 'odd'}"
                classes[label] = rep.to_dict()
                rows += _report_rows(label, rep, samples)
                rows.append((label, "result", "refinement_shift", None, shift))
                total += rep.beta
                eps += rep.epsilon_bound
            sectors[s] = classes
        res = {
            "system": "enz", "quantity": "stress", "z0": 0.0,
            "classes": sectors, "total_beta": total, "total_epsilon": eps,
            "stress_units": "hbar c / (sqrt(kappa0) a^4)",
            "stress_per_area": total / (math.sqrt(config.kappa0) * config.a ** 4),
        }
        rows += [("total", "result", "beta", None, total),
                 ("total", "result", "epsilon", None, eps)]
    _emit(config, res, ["sector", "kind", "label", "sigma", "value"], rows)
    return res


def cmd_scan(config: RunConfig) -> dict:
    """``(m, N, c0, eps)`` scan of the guide energy fits plus combined ``beta(m)``."""
    if config.system != "enz":
        raise ConfigError("scan is defined for the enz system")
    grid = config.grid(ENERGY_GRID)
    ms = [config.m] if config.m is not None else sorted(config.m_values)
    nmax = config.nmax_power if config.nmax_power is not None else 7
    if nmax < config.nmin_power:
        raise ConfigError("nmax_power must be >= nmin_power")
    Ns = list(range(config.nmin_power, nmax + 1))
    rows, tables, per_sector = [], {}, {}
    for s in config.sectors():
        f = summands.EnzEnergyFamily(s)
        n = max(config.n, f.n_min)
        n0 = extractor._resolve_n0(f, EMConfig(n, config.n0, max(ms), grid, config.rel_tol))
        samples = extractor.sample_gamma(f, n, n0, ms, grid)
        ec = EMConfig(n, n0, max(ms), grid, config.rel_tol)
        eps = {m: extractor.em_core.tail_bound_epsilon(f, n0, m, grid[0], config.rel_tol)
               for m in ms}
        try:
            scan = extractor.model_scan(f, ec, Ns, ms, kind="reduced", samples=samples,
                                        epsilons=eps)
            stable = True
        except extractor.InstabilityError:
            scan = _unchecked_scan(f, ec, Ns, ms, samples, eps)
            stable = False
        general = {}
        for m in ms:
            cfg = EMConfig(n, n0, m, grid, config.rel_tol)
            # --nmax-power sets the scan range here, so the family default applies
            spec = extractor.ModelSpec("general", f.laurent_order, f.regular_order)
            rep = extractor.extract_beta(f, cfg, spec, samples=samples[m], epsilon=eps[m])
            general[m] = (rep.beta, rep.epsilon_bound)
        per_sector[s] = general
        tables[s] = {"rows": [list(r) for r in scan.rows],
                     "selected": {str(m): list(v) for m, v in scan.selected.items()},
                     "plateau_found": stable,
                     "general_model": {str(m): list(v) for m, v in general.items()},
                     "n0": n0}
        rows += [(s, m, N, c0, e) for (m, N, c0, e) in scan.rows]
    combined = {}
    if len(per_sector) == 2:
        for m in ms:
            b = math.fsum(per_sector[s][m][0] for s in per_sector)
            e = math.fsum(per_sector[s][m][1] for s in per_sector)
            combined[str(m)] = [b, e]
            rows.append(("total", m, None, b, e))
    res = {"system": "enz", "quantity": "energy", "scan": tables, "combined": combined}
    _emit(config, res, ["sector", "m", "N", "c0", "epsilon"], rows)
    return res


def _unchecked_scan(f, ec, Ns, ms, samples, eps):
    rows, selected = [], {}
    power = getattr(f, "fit_power", 1)
    for m in ms:
        vals = {}
        for N in Ns:
            model = extractor.fit_laurent_log(
                extractor._to_fit_variable(f, samples[m]), extractor.ModelSpec("reduced", N),
                power, dps=max(extractor.FIT_DPS, f.dps))
            vals[N] = float(model.constant)
            rows.append((m, N, vals[N], float(eps[m])))
        spreads = [(abs(vals[a] - vals[b]), a) for a, b in zip(Ns, Ns[1:])] or [(0.0, Ns[0])]
        best = min(spreads)
        selected[m] = (best[1], vals[best[1]])
    return extractor.ScanResult(rows, selected)


def cmd_modes(config: RunConfig) -> dict:
    """Mode functions on a ``Z`` grid with their ODE residual, plus the spectrum."""
    Z = np.linspace(config.z_min, config.z_max, config.z_points)
    spectrum = spectra.spectrum_table(config.ells, config.thetas)
    rows, curves = [], []
    for th in config.thetas:
        for ell in config.ells:
            mode = spectra.mode_function(ell, float(th))
            vals = np.asarray(mode(Z), dtype=float)
            res = np.asarray(mode.ode_residual(Z), dtype=float)
            om = spectra.omega_enz(ell, float(th))
            curves.append({"ell": ell, "theta": float(th), "omega": om,
                           "Z": Z.tolist(), "value": vals.tolist(),
                           "ode_residual": res.tolist(),
                           "max_ode_residual": float(np.max(np.abs(res)))})
            rows += [(ell, float(th), om, z, v, r) for z, v, r in zip(Z, vals, res)]
    out = {"spectrum": [list(r) for r in spectrum], "modes": curves}
    _emit(config, out, ["ell", "theta", "omega", "Z", "value", "ode_residual"], rows)
    return out


def cmd_dos(config: RunConfig) -> dict:
    """Brute-force counts against continuum volumes, and the energy growth."""
    oms = np.linspace(0.0, config.omega_max, config.omega_points)
    rows, table = [], []
    for om in oms:
        r = [float(om)]
        for s in ("TE", "TM"):
            r += [dos.count_modes_brute(s, float(om), config.L, config.a),
                  dos.dos_volume_analytic(s, float(om), config.L, config.a)]
        rows.append(r)
        table.append(dict(zip(["omega", "count_TE", "volume_TE", "count_TM", "volume_TM"], r)))
    g_dos, g_sing = dos.energy_growth_leading(config.sigma_growth)
    out = {"L": config.L, "a": config.a, "table": table,
           "energy_growth": {"sigma": config.sigma_growth, "dos": g_dos, "singular": g_sing,
                             "relative_difference": abs(g_dos - g_sing) / abs(g_sing),
                             "units": "hbar c L^2 / (pi sqrt(kappa0) a^3)"}}
    _emit(config, out, ["omega", "count_TE", "volume_TE", "count_TM", "volume_TM"], rows)
    return out


_HELP = {
    "energy": "Regularized energy per unit area.",
    "stress": "Regularized normal stress per unit area.",
    "scan": "Extracted constants over (m, N) with plateau selection.",
    "modes": "Mode functions and their ODE residual.",
    "dos": "Mode counts, continuum volumes and energy growth.",
}

_DISPATCH = {"energy": cmd_energy, "stress": cmd_stress, "scan": cmd_scan,
             "modes": cmd_modes, "dos": cmd_dos}


# --------------------------------------------------------------------------
# argument parsing


def _int_list(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="emreg", description="Euler-Maclaurin regularization of mode sums.")
    p.add_argument("--version", action="version", version=f"emreg {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    flags = {
        "--config": dict(help="JSON file with RunConfig keys"),
        "--system": dict(choices=["cuboid", "enz"]),
        "--sector": dict(choices=["TE", "TM", "both"]),
        "--m": dict(type=int, help="number of Bernoulli corrections"),
        "--n0": dict(type=int, help="start of the Euler-Maclaurin formula"),
        "--nmax-power": dict(type=int, dest="nmax_power",
                             help="highest inverse power in the fit (scan: top of the N range)"),
        "--model-kind": dict(dest="model_kind", choices=["reduced", "general"]),
        "--sigma-min": dict(type=float, dest="sigma_min"),
        "--sigma-max": dict(type=float, dest="sigma_max"),
        "--grid-points": dict(type=int, dest="grid_points"),
        "--a": dict(type=float), "--Lx": dict(type=float), "--Ly": dict(type=float),
        "--kappa0": dict(type=float),
        "--z0": dict(type=float),
        "--level": dict(type=int, help="exp-sinh refinement for the guide stress"),
        "--ells": dict(type=_int_list), "--thetas": dict(type=_float_list),
        "--m-values": dict(type=_int_list, dest="m_values"),
        "--L": dict(type=float), "--omega-max": dict(type=float, dest="omega_max"),
        "--omega-points": dict(type=int, dest="omega_points"),
        "--sigma-growth": dict(type=float, dest="sigma_growth"),
        "--format": dict(choices=["json", "csv"]),
        "--out": dict(help="output path (default stdout)"),
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, help=_HELP[name])
        for flag, kw in flags.items():
            sp.add_argument(flag, default=None, **kw)
    return p


def make_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Parse arguments into a validated :class:`RunConfig`."""
    args = vars(build_parser().parse_args(argv))
    base: dict[str, Any] = {}
    path = args.pop("config")
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        if not isinstance(base, dict):
            raise ConfigError("config file must hold a JSON object")
        base.pop("command", None)
    base.update({k: v for k, v in args.items() if v is not None})
    try:
        cfg = RunConfig.from_dict(base)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return cfg.validate()


def run(config: RunConfig) -> dict:
    """Execute a validated configuration."""
    return _DISPATCH[config.validate().command](config)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = make_config(argv)
    except ConfigError as exc:
        print(f"emreg: invalid configuration: {exc}", file=sys.stderr)
        return 2
    try:
        run(config)
    except ConfigError as exc:
        print(f"emreg: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical failure of any pipeline stage
        print(f"emreg: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
