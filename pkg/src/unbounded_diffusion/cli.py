"""Command-line front end: verification suites and machine-readable reports.

Every subcommand produces a flat record set
``{module, bound_name, params, closed_form, probe, margin, satisfied}``
written as JSON (``{version, config, reports}``) or CSV.  Exit status is 0
when every record is satisfied, 1 otherwise, 2 on a configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import asymptotics, feller, forms, potential, semigroup, spectral
from .core import DISCRETIZATION_RTOL, BoundReport, OperatorParams, ParameterError, RadialFunction, RadialGrid
from .profiles import Plateau, PolyBump, SmoothBump

__all__ = ["RunConfig", "Collector", "main", "run", "build_parser", "read_csv_records",
           "COMMANDS", "REPORT_VERSION"]

REPORT_VERSION = "1"
COMMANDS = ("norms", "spectrum", "feller", "asymptotics", "semigroup", "hardy", "sector",
            "failure-demo", "verify-all")
# (N, alpha, p) with alpha = N/p' where the growth is visible on R <= 256
FAILURE_DEMO_REFERENCE = (6, 4.0, 3.0)
RECORD_FIELDS = ("module", "bound_name", "params", "closed_form", "probe", "margin", "satisfied")

# option name -> (type, default); config-file keys use the same names
OPTIONS = {
    "n": (int, 3),
    "alpha": (float, 4.0),
    "p": (str, None),
    "ell": (int, 0),
    "r": (float, None),
    "grid": (int, None),
    "dt": (float, None),
    "t-end": (float, None),
    "beta": (float, None),
    "gamma": (float, None),
    "format": (str, "json"),
    "out": (str, None),
    "seed": (int, 0),
    "plot-data": (str, None),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    N: int = 3
    alpha: float = 4.0
    p: Optional[float] = None
    alpha_given: bool = True
    ell: int = 0
    r: Optional[float] = None
    grid: Optional[int] = None
    dt: Optional[float] = None
    t_end: Optional[float] = None
    beta: Optional[float] = None
    gamma: Optional[float] = None
    output_format: str = "json"
    output_path: Optional[str] = None
    seed: int = 0
    plot_data: Optional[str] = None

    def params(self, p: Optional[float] = None, alpha: Optional[float] = None) -> OperatorParams:
        p = self.p if p is None else p
        return OperatorParams(self.N, self.alpha if alpha is None else alpha,
                              math.inf if p is None else p)

    @property
    def default_p(self) -> float:
        """The Sobolev exponent ``2N/(N-2)`` unless ``--p`` was given."""
        return self.p if self.p is not None else 2.0 * self.N / (self.N - 2)

    def as_dict(self) -> dict:
        out = {"command": self.command, "n": self.N, "alpha": self.alpha,
               "p": _num(self.p), "ell": self.ell, "r": self.r, "grid": self.grid,
               "dt": self.dt, "t-end": self.t_end, "beta": self.beta, "gamma": self.gamma,
               "format": self.output_format, "seed": self.seed}
        return out


def _num(x):
    """JSON-safe float: non-finite values become strings."""
    if x is None or isinstance(x, str):
        return x
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_num(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def _parse_p(value) -> Optional[float]:
    if value is None:
        return None
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"cannot read p = {value!r}") from None


@dataclass
class Collector:
    """Records and tidy plot rows of one run."""

    records: List[dict] = field(default_factory=list)
    plot_rows: List[tuple] = field(default_factory=list)

    def add(self, module: str, report: BoundReport, params: dict):
        self.records.append({
            "module": module,
            "bound_name": report.bound_name,
            "params": {k: _num(v) for k, v in params.items()},
            "closed_form": _num(report.closed_form_value),
            "probe": _num(report.probe_value),
            "margin": _num(report.margin),
            "satisfied": bool(report.satisfied),
        })

    def series(self, name: str, x, y):
        for a, b in zip(np.ravel(x), np.ravel(y)):
            self.plot_rows.append((float(a), float(b), name))

    @property
    def all_satisfied(self) -> bool:
        return all(r["satisfied"] for r in self.records)


def _pdict(params: OperatorParams, **extra) -> dict:
    d = params.as_dict()
    d.update(extra)
    return d


# ---------------------------------------------------------------- potential

def _cmd_norms(cfg: RunConfig, out: Collector):
    P = cfg.params()
    closed = asymptotics.resolvent_sup_norm(P)
    quad = asymptotics.resolvent_sup_norm_by_quadrature(P)
    out.add("asymptotics", BoundReport.check("sup_norm_T", closed, quad, sense="upper",
                                             rtol=1e-6, atol=0.0), _pdict(P))
    # two-sided: the quadrature must not undershoot either
    out.add("asymptotics", BoundReport.check("sup_norm_T_lower", closed, quad, sense="lower",
                                             rtol=1e-6), _pdict(P))
    p = cfg.default_p
    Pp = cfg.params(p=p)
    probes = potential.standard_probe_set()
    beta = 0.0 if cfg.beta is None else cfg.beta
    gamma = 0.0 if cfg.gamma is None else cfg.gamma
    try:
        probe = potential.WeightedEstimateProbe(beta, gamma, probes)
        rep = potential.verify_weighted_estimate(probe, Pp)
    except ParameterError as exc:
        print(f"norms: weighted estimate skipped: {exc}", file=sys.stderr)
        return
    rep.bound_name = "lp_norm_bound" if beta == 0.0 else rep.bound_name
    out.add("potential", rep, _pdict(Pp, beta=beta, gamma=gamma))


def _newtonian_checks(cfg: RunConfig, out: Collector):
    N = cfg.N
    betas = [cfg.beta] if cfg.beta is not None and 2 < cfg.beta < N else [2.0 + 0.5 * (N - 2)]
    for beta in betas:
        c = potential.newtonian_weight_constant(N, beta)
        for x in (0.5, 1.0, 2.0):
            closed = c * x ** (2.0 - beta)
            val = potential.newtonian_weight_potential(N, beta, x)
            for sense in ("upper", "lower"):
                rep = BoundReport.check(f"newtonian_weight[{sense}]", closed, val, sense=sense,
                                        rtol=1e-6)
                out.add("potential", rep, {"N": N, "beta": beta, "x": x})


def inversion_shapes():
    """Five smooth data with compact support inside ``[0, 4]``."""
    return [PolyBump(1.5, 5), SmoothBump(2.0), SmoothBump(1.0), Plateau(0.5, 1.5), PolyBump(3.0, 4)]


def _inversion_order(cfg: RunConfig, out: Collector):
    """Observed order of ``apply_resolvent(-L v) = v`` under grid halving."""
    P = cfg.params()
    shapes = inversion_shapes()
    R = 4.0
    worst = []
    for n in (400, 800, 1600):
        grid = RadialGrid.uniform(R, n)
        r = grid.nodes
        errs = []
        for s in shapes:
            f = RadialFunction(grid, -(1.0 + r ** P.alpha) * s.laplacian(r, P.N))
            u = potential.apply_resolvent(f, P)
            errs.append(float(np.max(np.abs(u.values - s.value(r)))))
        worst.append(max(errs))
    orders = [math.log2(a / b) for a, b in zip(worst, worst[1:])]
    out.add("potential", BoundReport.check("resolvent_inversion_order", 1.9, min(orders),
                                           sense="lower", rtol=0.0),
            _pdict(P, errors=worst))


# ---------------------------------------------------------------- spectral

def _cmd_spectrum(cfg: RunConfig, out: Collector):
    P = cfg.params()
    n = cfg.grid or 2000
    radii = None if cfg.r is None else (cfg.r, 2.0 * cfg.r)
    res = spectral.extrapolate_in_radius(P, radii, ell=cfg.ell, n=n)
    info = _pdict(P, ell=cfg.ell, radii=res.details["radii"], grid=n)
    out.add("spectral", BoundReport.check("lambda1_estimate", None, res.extrapolated_lambda1), info)
    if res.eigenvector is not None:
        vec = res.eigenvector
        out.add("spectral", BoundReport.check("ground_state_nonnegative", 0.0,
                                              float(np.min(vec) / np.max(np.abs(vec))),
                                              sense="lower", rtol=0.0, atol=1e-10), info)
        out.series(f"eigenvector[ell={cfg.ell}]", res.free_nodes, vec)
    if cfg.ell == 0:
        for rep in spectral.check_bounds(res, spectral.eigenvalue_bounds(P)):
            out.add("spectral", rep, info)
    else:
        base = spectral.extrapolate_in_radius(P, radii, ell=0, n=n)
        out.add("spectral", BoundReport.check("radial_channel_carries_lambda1",
                                              base.extrapolated_lambda1, res.extrapolated_lambda1,
                                              sense="upper", rtol=DISCRETIZATION_RTOL), info)


# ---------------------------------------------------------------- feller

def _cmd_feller(cfg: RunConfig, out: Collector):
    N, alpha = cfg.N, cfg.alpha
    info = {"N": N, "alpha": alpha}
    try:
        cl = feller.classify_infinity(N, alpha)
    except feller.InconclusiveClassificationError as exc:
        print(f"feller: {exc}", file=sys.stderr)
        out.add("feller", BoundReport.check("classification_conclusive", -1.0 - feller.RATE_MARGIN,
                                            exc.rate, sense="upper", rtol=0.0), info)
        return
    # entrance: Q integrable (rate < -1), R not (rate >= -1 or non-shrinking increments)
    q = BoundReport.check("Q_integrable", -1.0, cl.Q_rate, sense="upper", rtol=0.0)
    q.satisfied = cl.Q_integrable
    r = BoundReport.check("R_not_integrable", -1.0, cl.R_rate, sense="lower", rtol=0.0)
    # increments that stop shrinking decide non-integrability regardless of the rate
    r.satisfied = not cl.R_integrable
    out.add("feller", q, dict(info, classification=cl.classification))
    out.add("feller", r, dict(info, classification=cl.classification))
    out.add("feller", BoundReport.check("Q_cauchy_increment", 1e-8, cl.cauchy_increment("Q"),
                                        sense="upper", rtol=0.0), info)
    out.add("feller", BoundReport.check("R_growth_factor", 10.0, cl.growth_factor("R", 1e3, 1e6),
                                        sense="lower", rtol=0.0), info)
    Ms = [M for M, _ in cl.Q_partial_integrals]
    out.series("Q_partial_integral", Ms, [v for _, v in cl.Q_partial_integrals])
    out.series("R_partial_integral", Ms, [v for _, v in cl.R_partial_integrals])


# ---------------------------------------------------------------- asymptotics

def _asymptotic_cases(cfg: RunConfig):
    N = cfg.N
    gamma = float(N - 2) if cfg.gamma is None else cfg.gamma
    if cfg.beta is not None:
        return [(gamma, cfg.beta)]
    # below N the potential must still converge at infinity: gamma + beta > N
    low = N - min(1.0, gamma / 2.0)
    return [(gamma, low), (gamma, float(N)), (gamma, N + 2.0)]


def _cmd_asymptotics(cfg: RunConfig, out: Collector):
    for gamma, beta in _asymptotic_cases(cfg):
        case = asymptotics.fit_asymptotic_regime(gamma, beta, cfg.N)
        info = {"N": cfg.N, "gamma": gamma, "beta": beta, "regime": case.regime}
        out.add("asymptotics", BoundReport.check("decay_exponent_error", 0.05, case.exponent_error,
                                                 sense="upper", rtol=0.0), info)
        expected = case.regime == "log"
        out.add("asymptotics", BoundReport.check(
            "log_factor_detected" if expected else "no_log_factor",
            1.0, 1.0 if case.fitted_log_flag == expected else 0.0, sense="lower", rtol=0.0), info)
        radii = np.asarray(asymptotics.DEFAULT_FIT_RADII)
        vals = [asymptotics.weighted_riesz_potential(s, gamma, beta, cfg.N) for s in radii]
        out.series(f"J[gamma={gamma:g},beta={beta:g}]", radii, vals)


# ---------------------------------------------------------------- semigroup

def _cmd_semigroup(cfg: RunConfig, out: Collector):
    p = cfg.default_p
    P = cfg.params(p=p)
    rho = 4.0 if cfg.r is None else cfg.r
    dt = 1e-3 if cfg.dt is None else cfg.dt
    T = 0.1 if cfg.t_end is None else cfg.t_end
    cells = semigroup.DEFAULT_CELLS_PER_UNIT if cfg.grid is None else float(cfg.grid)
    f0 = Plateau(0.5, 1.0)
    run = semigroup.solve_on_ball(f0, P, rho, dt, T, p=p, cells_per_unit=cells,
                                  snapshot_times=list(np.linspace(0.0, T, 5)[1:]), check=False)
    info = _pdict(P, rho=rho, dt=dt, t_end=T)
    lowest = min(float(np.min(f.values)) for _, f in run.snapshots)
    out.add("semigroup", BoundReport.check("positivity", 0.0, lowest / run.norm_trace[0][1],
                                           sense="lower", rtol=0.0, atol=1e-10), info)
    out.add("semigroup", semigroup.sup_contraction_check(run), info)
    if math.isfinite(p):
        out.add("semigroup", semigroup.lp_contraction_check(run, p), info)
    for t, f in run.snapshots:
        out.series(f"u[t={t:g}]", f.nodes, f.values)

    rhos = [rho, 2.0 * rho, 4.0 * rho]
    family = semigroup.expanding_ball_limit(f0, P, rhos, T, dt=dt, cells_per_unit=cells, tol=math.inf)
    worst = max(float(np.max(a.values - b.values)) for (_, a), (_, b) in zip(family, family[1:]))
    out.add("semigroup", BoundReport.check("monotone_in_rho", 0.0, worst, sense="upper",
                                           rtol=0.0, atol=1e-10), _pdict(P, rhos=rhos, t=T))
    out.add("semigroup", semigroup.steady_state_report(PolyBump(1.0, 4), P, rho,
                                                       cells_per_unit=max(cells, 400.0)),
            _pdict(P, rho=rho))


# ---------------------------------------------------------------- forms

def _hardy_profiles(seed: int, count: int = 100):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        prof = forms.random_hardy_profile(rng)
        grid = RadialGrid.uniform(prof.support, 2000)
        out.append(RadialFunction.sample(grid, prof))
    return out


def _cmd_hardy(cfg: RunConfig, out: Collector):
    N = cfg.N
    ps = [cfg.p] if cfg.p is not None and math.isfinite(cfg.p) else [2.0, 3.0, 4.0]
    gammas = [cfg.gamma] if cfg.gamma is not None else [0.0, 1.0, 2.0]
    profiles = _hardy_profiles(cfg.seed)
    for p in ps:
        for g in gammas:
            reps = [forms.hardy_check(u, p, g, N) for u in profiles]
            ratios = [r.probe_value / r.closed_form_value for r in reps]
            violations = sum(not r.satisfied for r in reps)
            rep = BoundReport.check(f"hardy[p={p:g},gamma={g:g}]", 1.0, max(ratios), sense="upper",
                                    rtol=1e-8)
            rep.satisfied = rep.satisfied and violations == 0
            out.add("forms", rep, {"N": N, "p": p, "gamma": g, "profiles": len(profiles),
                                   "seed": cfg.seed, "violations": violations})


def _cmd_sector(cfg: RunConfig, out: Collector):
    P = cfg.params(p=cfg.default_p)
    sec = forms.sector_angle(P)
    grid = forms.sector_constant_by_grid(sec.a_coeff, sec.b_coeff)
    info = _pdict(P, a=sec.a_coeff, b=sec.b_coeff, angle_deg=sec.degrees)
    for sense in ("upper", "lower"):
        out.add("forms", BoundReport.check(f"sector_constant_grid[{sense}]", sec.tangent, grid,
                                           sense=sense, rtol=0.0, atol=1e-4), info)


def _failure_params(cfg: RunConfig) -> OperatorParams:
    p = cfg.default_p
    if not math.isfinite(p):
        raise ConfigError("failure-demo needs finite p")
    critical = cfg.N * (p - 1.0) / p
    if cfg.alpha_given and abs(cfg.alpha - critical) > 1e-12:
        raise ConfigError(f"failure-demo runs at alpha = N/p' = {critical:g}; got --alpha {cfg.alpha:g}")
    return OperatorParams(cfg.N, critical, p)


def _cmd_failure_demo(cfg: RunConfig, out: Collector, P: Optional[OperatorParams] = None):
    P = _failure_params(cfg) if P is None else P
    Rs = [4.0, 16.0, 64.0, 256.0]
    pairs = potential.estimate_failure_demo(P, Rs)
    ratios = np.array([v for _, v in pairs])
    rep = BoundReport.check("ratio_strictly_increasing", 0.0, float(np.min(np.diff(ratios))),
                            sense="lower", rtol=0.0)
    rep.satisfied = bool(np.min(np.diff(ratios)) > 0)
    out.add("potential", rep, _pdict(P, R_values=Rs))
    slope = float(np.polyfit(np.log(np.log(Rs)), P.p * np.log(ratios), 1)[0])
    out.add("potential", BoundReport.check("log_growth_exponent[lower]", 0.7, slope, sense="lower",
                                           rtol=0.0), _pdict(P))
    out.add("potential", BoundReport.check("log_growth_exponent[upper]", 1.3, slope, sense="upper",
                                           rtol=0.0), _pdict(P))
    out.series("failure_ratio", Rs, ratios)


# ---------------------------------------------------------------- aggregate

def _skip(name: str, fn: Callable, *args):
    try:
        fn(*args)
    except (ParameterError, ConfigError) as exc:
        print(f"verify-all: {name} skipped: {exc}", file=sys.stderr)


def _cmd_verify_all(cfg: RunConfig, out: Collector):
    if cfg.p is None:
        cfg.p = 2.0 * cfg.N / (cfg.N - 2)
    _skip("norms", _cmd_norms, cfg, out)
    _skip("newtonian", _newtonian_checks, cfg, out)
    _skip("inversion", _inversion_order, cfg, out)
    spec_cfg = RunConfig(**{**asdict(cfg), "ell": 0})
    _skip("spectrum", _cmd_spectrum, spec_cfg, out)
    _skip("feller", _cmd_feller, cfg, out)
    _skip("asymptotics", _cmd_asymptotics, cfg, out)
    _skip("semigroup", _cmd_semigroup, cfg, out)
    _skip("hardy", _cmd_hardy, cfg, out)
    _skip("sector", _cmd_sector, cfg, out)
    # the demo lives at alpha = N/p'; off that line run its reference configuration
    crit = cfg.N * (cfg.p - 1.0) / cfg.p if math.isfinite(cfg.p) else math.nan
    if abs(cfg.alpha - crit) <= 1e-12:
        demo = OperatorParams(cfg.N, crit, cfg.p)
    else:
        demo = OperatorParams(*FAILURE_DEMO_REFERENCE)
    _skip("failure-demo", _cmd_failure_demo, cfg, out, demo)


_DISPATCH: Dict[str, Callable] = {
    "norms": _cmd_norms,
    "spectrum": _cmd_spectrum,
    "feller": _cmd_feller,
    "asymptotics": _cmd_asymptotics,
    "semigroup": _cmd_semigroup,
    "hardy": _cmd_hardy,
    "sector": _cmd_sector,
    "failure-demo": _cmd_failure_demo,
    "verify-all": _cmd_verify_all,
}


# ---------------------------------------------------------------- output

def render_json(cfg: RunConfig, records: List[dict]) -> str:
    doc = {"version": REPORT_VERSION, "config": cfg.as_dict(), "reports": records}
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_csv(records: List[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for rec in records:
        row = []
        for k in RECORD_FIELDS:
            v = rec[k]
            row.append(json.dumps(v, sort_keys=True) if k == "params" else _cell(v))
        w.writerow(row)
    return buf.getvalue()


def read_csv_records(text: str) -> List[dict]:
    """Inverse of the CSV writer; gives the same records as the JSON ``reports``."""
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        rec = {"module": row["module"], "bound_name": row["bound_name"],
               "params": json.loads(row["params"]), "satisfied": row["satisfied"] == "true"}
        for k in ("closed_form", "probe", "margin"):
            v = row[k]
            if v == "":
                rec[k] = None
            elif v in ("inf", "-inf", "nan"):
                rec[k] = v
            else:
                rec[k] = float(v)
        out.append(rec)
    return out


def render_plot_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("x", "y", "series"))
    for x, y, s in rows:
        w.writerow((repr(x), repr(y), s))
    return buf.getvalue()


# ---------------------------------------------------------------- entry points

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unbounded-diffusion",
        description="Numerical checks for L = (1 + |x|^alpha) Laplacian on radial data.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=None, help="dimension N (default 3)")
    common.add_argument("--alpha", type=float, default=None, help="diffusion exponent (default 4)")
    common.add_argument("--p", default=None, help="integrability index, a number or 'inf'")
    common.add_argument("--ell", type=int, default=None, help="angular channel (spectrum)")
    common.add_argument("--r", type=float, default=None, help="truncation or ball radius")
    common.add_argument("--grid", type=int, default=None,
                        help="cells (spectrum) or cells per unit length (semigroup)")
    common.add_argument("--dt", type=float, default=None, help="time step (semigroup)")
    common.add_argument("--t-end", dest="t_end", type=float, default=None, help="final time")
    common.add_argument("--beta", type=float, default=None, help="weight exponent")
    common.add_argument("--gamma", type=float, default=None, help="kernel or Hardy exponent")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--out", default=None, help="report path (default stdout)")
    common.add_argument("--seed", type=int, default=None, help="seed for randomized suites")
    common.add_argument("--config", default=None, help="JSON file whose keys mirror the flags")
    common.add_argument("--plot-data", dest="plot_data", default=None,
                        help="write tidy (x, y, series) CSV here")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=f"run the {name} checks")
    return parser


def _resolve(ns: argparse.Namespace) -> RunConfig:
    values = {k: d for k, (_, d) in OPTIONS.items()}
    given_alpha = False
    if ns.config:
        try:
            with open(ns.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from None
        unknown = set(data) - set(OPTIONS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(data)
        given_alpha = "alpha" in data
    for key in OPTIONS:
        v = getattr(ns, key.replace("-", "_"))
        if v is not None:
            values[key] = v
            given_alpha = given_alpha or key == "alpha"
    try:
        cfg = RunConfig(
            command=ns.command, N=int(values["n"]), alpha=float(values["alpha"]),
            p=_parse_p(values["p"]), alpha_given=given_alpha, ell=int(values["ell"]),
            r=None if values["r"] is None else float(values["r"]),
            grid=None if values["grid"] is None else int(values["grid"]),
            dt=None if values["dt"] is None else float(values["dt"]),
            t_end=None if values["t-end"] is None else float(values["t-end"]),
            beta=None if values["beta"] is None else float(values["beta"]),
            gamma=None if values["gamma"] is None else float(values["gamma"]),
            output_format=str(values["format"]), output_path=values["out"],
            seed=int(values["seed"]), plot_data=values["plot-data"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if cfg.output_format not in ("json", "csv"):
        raise ConfigError(f"unknown format {cfg.output_format!r}")
    if cfg.N < 3:
        raise ConfigError("dimension must be at least 3")
    if cfg.command == "failure-demo" and not given_alpha:
        cfg.alpha = cfg.N * (cfg.default_p - 1.0) / cfg.default_p
    return cfg


def run(cfg: RunConfig) -> int:
    """Execute one command and write its report; returns the exit status."""
    out = Collector()
    t0 = time.perf_counter()
    try:
        _DISPATCH[cfg.command](cfg, out)
    except (ParameterError, ConfigError, spectral.SingularMassError) as exc:
        print(f"{cfg.command}: configuration error: {exc}", file=sys.stderr)
        return 2
    text = render_json(cfg, out.records) if cfg.output_format == "json" else render_csv(out.records)
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cfg.plot_data:
        with open(cfg.plot_data, "w") as fh:
            fh.write(render_plot_csv(out.plot_rows))
    failed = [r for r in out.records if not r["satisfied"]]
    for r in failed:
        print(f"UNSATISFIED {r['module']}/{r['bound_name']}: probe={r['probe']} "
              f"closed_form={r['closed_form']} margin={r['margin']}", file=sys.stderr)
    print(f"{cfg.command}: {len(out.records) - len(failed)}/{len(out.records)} satisfied "
          f"in {time.perf_counter() - t0:.1f} s", file=sys.stderr)
    return 0 if not failed else 1


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        cfg = _resolve(ns)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)
