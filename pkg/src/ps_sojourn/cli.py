"""Command-line interface: ``ps-sojourn <subcommand> --rho R --capacity K ...``.

Exit status is 0 on success, 2 on bad flags or parameters, and 1 when
``compare`` finds a residual above its tolerance.  CSV output carries 17
significant digits; JSON output embeds the full run configuration so the
file alone reproduces the run.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from . import __version__
from ._backend import NAME as BACKEND
from .errors import SojournError
from .model import ModelParams
from .simulator import (admission_weights, ordered_map, simulate_conditional,
                        simulate_stationary, write_csv)
from .spectrum import (applicable_estimates, asymptotic_estimate, deltah_spectrum,
                       dominant_pole, eigen_spectrum, theta_s_via_deltaH)
from .timedomain import (inversion_solution, ode_evolve, spectral_expand)
from .transform import relative_discrepancy, resolvent_solve, transform_theorem21

TABLE_HEADER = ["K", "theta_s_exact", "theta_s_asymp", "abs_err", "implied_order"]


class UsageError(Exception):
    """Bad flag combination; maps to exit status 2."""


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    rho: float | None = None
    capacity: int | None = None
    method: str | None = None
    theta: str | None = None
    n: str | None = None
    t_max: float | None = None
    points: int | None = None
    quantity: str | None = None
    count: int | None = None
    seed: int | None = None
    regime: str | None = None
    capacities: tuple[int, ...] | None = None
    eta: float | None = None
    window: float | None = None
    output: str | None = None
    samples_out: str | None = None
    fmt: str = "csv"
    gnuplot: str | None = None

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        if d["capacities"] is not None:
            d["capacities"] = list(d["capacities"])
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunConfig":
        d = dict(d)
        if d.get("capacities") is not None:
            d["capacities"] = tuple(int(k) for k in d["capacities"])
        return cls(**d)


# ------------------------------------------------------------- formatting


def fmt_num(x: float) -> str:
    return f"{x:.17g}"


def _json_value(v: Any) -> Any:
    if isinstance(v, (np.floating, float)):
        v = float(v)
        if not math.isfinite(v):
            return str(v)
        digits = len(repr(v).split("e")[0].replace("-", "").replace(".", "").lstrip("0"))
        return repr(v) if digits >= 16 else v
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_json_value(x) for x in v]
    return v


def render_json(payload: dict, config: RunConfig) -> str:
    doc = {
        "provenance": {"tool": "ps-sojourn", "version": __version__, "backend": BACKEND,
                       "config": config.to_dict()},
        "result": _json_value(payload),
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def render_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_num(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _emit(text: str, config: RunConfig) -> None:
    if config.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(config.output, "w", newline="") as fh:
            fh.write(text)


def _tabular(config: RunConfig, header: list[str], rows: list[list[Any]], extra: dict | None = None) -> str:
    if config.fmt == "json":
        payload = {"columns": header, "rows": rows}
        if extra:
            payload.update(extra)
        return render_json(payload, config)
    return render_csv(header, rows)


def _gnuplot(config: RunConfig, data_path: str, ycols: Sequence[int], logy: bool = False,
             logx: bool = False) -> None:
    """Script plotting CSV columns ``ycols`` (1-based) against column 1."""
    lines = ["set datafile separator ','", "set key autotitle columnhead"]
    if logx:
        lines.append("set logscale x")
    if logy:
        lines.append("set logscale y")
    plots = [f"'{data_path}' using 1:{c} with linespoints" for c in ycols]
    lines.append("plot " + ", \\\n     ".join(plots))
    with open(config.gnuplot, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ------------------------------------------------------------- subcommands


def _params(config: RunConfig) -> ModelParams:
    try:
        return ModelParams(config.rho, config.capacity)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


def _theta(raw: str) -> complex:
    try:
        return complex(raw.replace(" ", ""))
    except ValueError as exc:
        raise UsageError(f"cannot parse theta {raw!r}") from exc


def cmd_transform(config: RunConfig) -> int:
    params = _params(config)
    theta = _theta(config.theta)
    method = config.method or "resolvent"
    real = theta.imag == 0.0
    if method in ("theorem21", "both") and not real:
        raise UsageError("the theorem21 method needs real theta")
    K = params.capacity
    if method == "both":
        a = transform_theorem21(params, theta.real)
        b = resolvent_solve(params, theta)
        rel = relative_discrepancy(a, b)
        header = ["n", "theorem21", "resolvent", "rel_discrepancy"]
        rows = [[n, float(a.values[n]), float(b.values[n].real), float(rel[n])] for n in range(K)]
    else:
        tv = transform_theorem21(params, theta.real) if method == "theorem21" else resolvent_solve(params, theta)
        if real:
            header = ["n", "p_hat"]
            rows = [[n, float(np.real(tv.values[n]))] for n in range(K)]
        else:
            header = ["n", "p_hat_real", "p_hat_imag"]
            rows = [[n, float(tv.values[n].real), float(tv.values[n].imag)] for n in range(K)]
    _emit(_tabular(config, header, rows), config)
    return 0


def cmd_spectrum(config: RunConfig) -> int:
    params = _params(config)
    method = config.method or "eigen"
    spec = eigen_spectrum(params) if method == "eigen" else deltah_spectrum(params)
    rows = [[i, float(v)] for i, v in enumerate(spec.eigenvalues)]
    _emit(_tabular(config, ["index", "pole"], rows, {"theta_s": spec.theta_s, "method": spec.method}), config)
    return 0


def _estimate_dict(est, exact: float) -> dict:
    return {
        "regime": est.regime,
        "eta": est.eta,
        "terms": list(est.terms),
        "estimate": est.theta_s_estimate,
        "abs_err": abs(exact - est.theta_s_estimate),
        "airy_root": est.airy_root,
    }


def cmd_theta_s(config: RunConfig) -> int:
    params = _params(config)
    window = config.window if config.window is not None else 3.0
    exact = dominant_pole(params)
    payload: dict[str, Any] = {"theta_s_exact": exact,
                               "estimates": [_estimate_dict(e, exact) for e in applicable_estimates(params, window)]}
    if config.method == "deltaH":
        payload["theta_s_deltaH"] = theta_s_via_deltaH(params)
    if config.fmt == "csv":
        rows = []
        for e in payload["estimates"]:
            for i, term in enumerate(e["terms"]):
                rows.append([e["regime"], i + 1, term])
            rows.append([e["regime"], "total", e["estimate"]])
        rows.append(["exact", "", exact])
        _emit(render_csv(["regime", "term", "value"], rows), config)
    else:
        _emit(render_json(payload, config), config)
    return 0


def table_rows(regime: str, capacities: Sequence[int], rho: float | None, eta: float | None,
               window: float = 3.0) -> list[list[Any]]:
    """Exact vs. asymptotic ``theta_s`` over ``capacities`` with implied remainder order."""
    caps = list(capacities)
    if caps != sorted(caps) or len(set(caps)) != len(caps):
        raise UsageError("capacities must be strictly ascending")

    def one(K: int) -> tuple[float, float]:
        r = rho if eta is None else 1.0 + eta * K ** (-2.0 / 3.0)
        p = ModelParams(r, K)
        return dominant_pole(p), asymptotic_estimate(p, regime, max(window, abs(eta or 0.0))).theta_s_estimate

    results = ordered_map(one, caps)
    rows: list[list[Any]] = []
    prev = None
    for K, (ex, est) in zip(caps, results):
        err = abs(ex - est)
        order = ""
        if prev is not None and prev[1] > 0 and err > 0:
            order = -math.log(err / prev[1]) / math.log(K / prev[0])
        rows.append([K, ex, est, err, order])
        prev = (K, err)
    return rows


def cmd_table(config: RunConfig) -> int:
    regime = config.regime
    if (config.rho is None) == (config.eta is None):
        raise UsageError("table needs exactly one of --rho or --eta")
    if config.eta is not None and regime != "critical":
        raise UsageError("--eta is only meaningful for the critical regime")
    rows = table_rows(regime, config.capacities, config.rho, config.eta,
                      config.window if config.window is not None else 3.0)
    _emit(_tabular(config, TABLE_HEADER, rows), config)
    if config.gnuplot and config.output not in (None, "-"):
        _gnuplot(config, config.output, [TABLE_HEADER.index("abs_err") + 1], logy=True, logx=True)
    return 0


def _time_grid(config: RunConfig, params: ModelParams) -> np.ndarray:
    points = config.points or 200
    if config.t_max is None:
        top = 10.0 / abs(dominant_pole(params))
    else:
        top = config.t_max
    if not top > 0:
        raise UsageError("--t-max must be positive")
    return np.linspace(0.0, top, points + 1)


def _components(raw: str | None, capacity: int) -> list[int]:
    if raw in (None, ""):
        return [0]
    if raw == "all":
        return list(range(capacity))
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"--n must be an integer or 'all', got {raw!r}") from None
    if not 0 <= n < capacity:
        raise UsageError(f"--n must lie in 0..{capacity - 1}")
    return [n]


def cmd_density(config: RunConfig) -> int:
    params = _params(config)
    cols = _components(config.n, params.capacity)
    quantity = config.quantity or "density"
    t = _time_grid(config, params)
    route = {"ode": ode_evolve, "spectral": spectral_expand, "invert": inversion_solution}[config.method or "ode"]
    sol = route(params, t, quantity)
    values = sol.density if quantity == "density" else sol.survival
    symbol = "p" if quantity == "density" else "q"
    header = ["t"] + [f"{symbol}_{n}" for n in cols]
    rows = [[float(tj)] + [float(v) for v in row[cols]] for tj, row in zip(t, values)]
    _emit(_tabular(config, header, rows), config)
    if config.gnuplot and config.output not in (None, "-"):
        _gnuplot(config, config.output, range(2, len(header) + 1), logy=quantity == "survival")
    return 0


def cmd_simulate(config: RunConfig) -> int:
    params = _params(config)
    count = config.count or 10_000
    seed = config.seed if config.seed is not None else 0
    if config.n in (None, "stationary"):
        res = simulate_stationary(params, count, seed)
        summary = res.summary()
        hist = np.bincount(res.observed_initial, minlength=params.capacity) / count
        summary["observed_initial_law"] = hist.tolist()
        summary["admission_weights"] = admission_weights(params).tolist()
    else:
        try:
            n = int(config.n)
        except ValueError as exc:
            raise UsageError(f"--n must be an integer or 'stationary', got {config.n!r}") from exc
        res = simulate_conditional(params, n, count, seed)
        summary = res.summary()
    if config.samples_out:
        write_csv(res, config.samples_out)
    _emit(render_json(summary, config), config)
    return 0


def compare_report(params: ModelParams, thetas: Sequence[float] = (0.1, 0.5, 1.0, 3.0),
                   t_max: float = 20.0) -> list[dict]:
    """Cross-method residuals with their tolerances."""
    checks = []
    for th in thetas:
        try:
            a = transform_theorem21(params, th)
        except SojournError as exc:
            checks.append({"check": f"transform theta={th}", "residual": None, "tolerance": 1e-8,
                           "ok": True, "note": f"skipped: {type(exc).__name__}"})
            continue
        res = float(relative_discrepancy(a, resolvent_solve(params, th)).max())
        checks.append({"check": f"transform theta={th}", "residual": res, "tolerance": 1e-8, "ok": res <= 1e-8})
    exact = dominant_pole(params)
    if params.capacity <= 200:
        res = abs(theta_s_via_deltaH(params) - exact)
        checks.append({"check": "theta_s eigen vs deltaH", "residual": res, "tolerance": 1e-8, "ok": res <= 1e-8})
    t = np.linspace(0.0, t_max, 81)
    sols = [ode_evolve(params, t), spectral_expand(params, t), inversion_solution(params, t)]
    names = ["ode", "spectral", "inversion"]
    for i in range(3):
        for j in range(i + 1, 3):
            res = float(max(np.abs(sols[i].density - sols[j].density).max(),
                            np.abs(sols[i].survival - sols[j].survival).max()))
            checks.append({"check": f"time {names[i]} vs {names[j]}", "residual": res,
                           "tolerance": 1e-6, "ok": res <= 1e-6})
    return checks


def cmd_compare(config: RunConfig) -> int:
    params = _params(config)
    checks = compare_report(params, t_max=config.t_max or 20.0)
    ok = all(c["ok"] for c in checks)
    if config.fmt == "json":
        _emit(render_json({"checks": checks, "ok": ok}, config), config)
    else:
        rows = [[c["check"], "" if c["residual"] is None else c["residual"], c["tolerance"],
                 "pass" if c["ok"] else "FAIL"] for c in checks]
        _emit(render_csv(["check", "residual", "tolerance", "status"], rows), config)
    return 0 if ok else 1


COMMANDS = {
    "transform": cmd_transform,
    "spectrum": cmd_spectrum,
    "theta-s": cmd_theta_s,
    "table": cmd_table,
    "density": cmd_density,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
}


# ------------------------------------------------------------------ parsing


def _capacity_list(raw: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in raw.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ps-sojourn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, need_params=True, fmt="csv"):
        if need_params:
            p.add_argument("--rho", type=float, required=True)
            p.add_argument("--capacity", type=int, required=True)
        p.add_argument("--output", "-o", default=None, help="output file (default stdout)")
        p.add_argument("--format", dest="fmt", choices=["csv", "json"], default=fmt)

    p = sub.add_parser("transform", help="p_hat_n(theta) for n = 0..K-1")
    common(p)
    p.add_argument("--theta", required=True, help="real or complex, e.g. 0.3 or 0.1+2j")
    p.add_argument("--method", choices=["theorem21", "resolvent", "both"], default="resolvent")

    p = sub.add_parser("spectrum", help="all poles of the transform")
    common(p)
    p.add_argument("--method", choices=["eigen", "deltaH"], default="eigen")

    p = sub.add_parser("theta-s", help="dominant pole vs. applicable asymptotic expansions")
    common(p, fmt="json")
    p.add_argument("--method", choices=["eigen", "deltaH"], default="eigen",
                   help="deltaH also reports the root of H_K - H_(K-1)")
    p.add_argument("--window", type=float, default=None, help="critical window in |eta| (default 3)")

    p = sub.add_parser("table", help="convergence table of an asymptotic regime")
    common(p, need_params=False)
    p.add_argument("--regime", choices=["sub", "critical", "super"], required=True)
    p.add_argument("--capacities", type=_capacity_list, required=True, help="e.g. 100,200,400")
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--eta", type=float, default=None, help="critical regime: rho = 1 + eta K^(-2/3)")
    p.add_argument("--window", type=float, default=None)
    p.add_argument("--gnuplot", default=None, help="also write a gnuplot script here")

    p = sub.add_parser("density", help="p_n(t) or q_n(t) on a uniform grid")
    common(p)
    p.add_argument("--n", default="0", help="component index, or 'all'")
    p.add_argument("--method", choices=["ode", "spectral", "invert"], default="ode")
    p.add_argument("--quantity", choices=["density", "survival"], default="density")
    p.add_argument("--t-max", dest="t_max", type=float, default=None)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--gnuplot", default=None, help="also write a gnuplot script here")

    p = sub.add_parser("simulate", help="Monte Carlo sojourn samples and summary")
    common(p, fmt="json")
    p.add_argument("--n", default="stationary", help="customers found on arrival, or 'stationary'")
    p.add_argument("--count", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples-out", dest="samples_out", default=None, help="CSV dump of the samples")

    p = sub.add_parser("compare", help="cross-method residual report (exit 1 on violation)")
    common(p)
    p.add_argument("--t-max", dest="t_max", type=float, default=None)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    values = {k: v for k, v in vars(args).items() if k in fields}
    return RunConfig(**values)


def run(config: RunConfig) -> int:
    try:
        return COMMANDS[config.subcommand](config)
    except UsageError as exc:
        print(f"ps-sojourn: error: {exc}", file=sys.stderr)
        return 2
    except (SojournError, ValueError) as exc:
        print(f"ps-sojourn: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
