"""Command line front end.

    rtbp-duffing integrate    --rho 0.2 --eps 0.4 --theta0 0.7
    rtbp-duffing homoclinic   --eps 0.4
    rtbp-duffing manifold     --rho 0.2 --eps 0.35 --theta0 0.7
    rtbp-duffing melnikov     --eps 0.45 --theta0-grid 64 --out d0.csv
    rtbp-duffing asympt       --eps-sweep 0.45,0.4,0.35
    rtbp-duffing verify       --suite identities

Output is CSV (header row, one row per record, a trailing ``#`` metadata
line with the config hash) or JSON (one object per run).  Floats carry 17
significant digits and nothing depends on the clock, so a given config
always produces the same bytes.  Exit codes: 0 success, 1 a verification
check failed, 2 bad configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from multiprocessing import Pool

import numpy as np

from .core_model import DuffingState, ParamSet, duffing_field
from .errors import DomainError, RtbpError

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("integrate", "homoclinic", "manifold", "melnikov", "asympt", "verify")
ESCAPE_X = 0.1


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# formatting

def fmt_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _json_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v) if math.isfinite(v) else "null"
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k), ensure_ascii=False)}: {_json_value(x)}"
                               for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialise {type(v).__name__}")


def dump_json(obj) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _json_value(obj) + "\n"


def dump_csv(rows, config_hash: str) -> str:
    """RFC 4180 CSV of flat records plus a trailing metadata comment."""
    buf = io.StringIO()
    if rows:
        cols = list(rows[0].keys())
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([fmt_float(r[c]) if isinstance(r[c], (float, np.floating)) else r[c]
                        for c in cols])
    buf.write(f"# schema={SCHEMA_VERSION} config_hash={config_hash}\r\n")
    return buf.getvalue()


def config_hash(config: dict) -> str:
    return hashlib.sha256(dump_json(config).encode()).hexdigest()[:16]


# --------------------------------------------------------------------------
# config

def _parse_list(text: str, name: str):
    """``a,b,c`` or ``lo:hi:n`` (inclusive linspace)."""
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            vals = np.linspace(float(lo), float(hi), n).tolist()
        else:
            vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--{name}: expected 'a,b,c' or 'lo:hi:n', got {text!r}") from None
    if not vals:
        raise ConfigError(f"--{name}: empty sweep")
    return vals


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--rho", type=float, default=0.2, help="mass ratio")
    p.add_argument("--eps", type=float, default=0.4, help="perturbation 1/|J|")
    p.add_argument("--theta0", type=float, default=0.0, help="section phase")
    p.add_argument("--theta0-grid", type=int, default=None, metavar="N",
                   help="use theta0 = 2 pi k/N, k = 0..N-1")
    p.add_argument("--rho-sweep", default=None, help="rho values 'a,b,c' or 'lo:hi:n'")
    p.add_argument("--eps-sweep", default=None, help="eps values 'a,b,c' or 'lo:hi:n'")
    p.add_argument("--tol", type=float, default=None, help="solver tolerance")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtbp-duffing", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "integrate": "integrate the perturbed Duffing system from the section Y = 0",
        "homoclinic": "tabulate the homoclinic orbit and its frame",
        "manifold": "primary stable/unstable solutions and the splitting distance",
        "melnikov": "first-order splitting function, direct and by series",
        "asympt": "Watson-lemma leading terms against quadrature",
        "verify": "run a verification suite",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        _add_common(p)
        if name in ("integrate", "homoclinic"):
            p.add_argument("--t-end", type=float, default=4.0)
            p.add_argument("--samples", type=int, default=41)
        if name == "verify":
            p.add_argument("--suite", default="quick")
    return parser


def make_config(args) -> dict:
    rhos = _parse_list(args.rho_sweep, "rho-sweep") if args.rho_sweep else [args.rho]
    epss = _parse_list(args.eps_sweep, "eps-sweep") if args.eps_sweep else [args.eps]
    if args.theta0_grid is not None:
        if args.theta0_grid < 1:
            raise ConfigError("--theta0-grid must be positive")
        thetas = (2 * np.pi * np.arange(args.theta0_grid) / args.theta0_grid).tolist()
    else:
        thetas = [args.theta0]
    if args.jobs < 1:
        raise ConfigError("--jobs must be positive")
    if args.tol is not None and not args.tol > 0:
        raise ConfigError("--tol must be positive")
    for r in rhos:
        for e in epss:
            ParamSet(r, e)      # raises DomainError outside the parameter domain
    cfg = {"schema": SCHEMA_VERSION, "command": args.command, "rho": rhos, "eps": epss,
           "theta0": thetas, "tol": args.tol}
    if args.command in ("integrate", "homoclinic"):
        if args.samples < 2 or not args.t_end > 0:
            raise ConfigError("--samples must be >= 2 and --t-end > 0")
        cfg.update(t_end=args.t_end, samples=args.samples)
    if args.command == "verify":
        from .verify import SUITES
        if args.suite not in SUITES:
            raise ConfigError(f"--suite must be one of {sorted(SUITES)}")
        cfg["suite"] = args.suite
    return cfg


# --------------------------------------------------------------------------
# tasks; module level so that a process pool can pickle them

def _task_integrate(job):
    cfg, rho, eps, theta0 = job
    from .frame import homoclinic_a, homoclinic_b
    from .numerics import OdeSpec, integrate_ode
    p = ParamSet(rho, eps, theta0)
    rtol = cfg["tol"] or 1e-11
    # X -> 0 at finite tau is escape to infinity; theta' ~ X^-3 makes the
    # steps collapse long before the floor, so stop at ESCAPE_X
    traj = integrate_ode(duffing_field(p), DuffingState(theta0, np.sqrt(2.0), 0.0).as_array(),
                         (0.0, cfg["t_end"]), OdeSpec(rtol, rtol * 1e-2),
                         stop=lambda t, y: y[1] - ESCAPE_X)
    t = np.linspace(0.0, cfg["t_end"], cfg["samples"])
    t = t[t <= traj.t[-1]]
    y = traj(t)
    rows = [{"rho": rho, "eps": eps, "theta0": theta0, "tau": float(ti), "theta": float(y[0, j]),
             "X": float(y[1, j]), "Y": float(y[2, j]),
             "x": float(y[1, j] - homoclinic_a(ti)), "y": float(y[2, j] - homoclinic_b(ti)),
             "escaped_at": float(traj.t[-1]) if traj.stopped else float("nan")}
            for j, ti in enumerate(t)]
    return rows


def _task_homoclinic(job):
    cfg, _, eps, _ = job
    from .frame import eval_frame
    t = np.linspace(-cfg["t_end"], cfg["t_end"], cfg["samples"])
    fr = eval_frame(t, eps)
    return [{"eps": eps, "tau": float(t[j]), "a": float(fr.a[j]), "b": float(fr.b[j]),
             "bprime": float(fr.bprime[j]), "psi": float(fr.psi[j]), "h": float(fr.h[j]),
             "H": float(fr.H[j]), "Htilde": float(fr.Htilde[j])} for j in range(t.size)]


def _task_manifold(job):
    cfg, rho, eps, theta0 = job
    from .manifold import matching_X0, solve_stable, solve_unstable
    p = ParamSet(rho, eps, theta0)
    s, rs = solve_stable(p, cfg["tol"])
    u, ru = solve_unstable(p, cfg["tol"])
    rec = {"rho": rho, "eps": eps, "theta0": theta0,
           "mM0_stable": s.mM0, "mM0_unstable": u.mM0,
           "splitting": (s.mM0 - u.mM0) / rho if rho else float("nan"),
           "X0_stable": matching_X0(s), "cut_T": s.T, "nodes": int(s.grid.size),
           "iterations_stable": rs.iterations, "iterations_unstable": ru.iterations,
           "max_ratio_stable": rs.max_ratio(1e-9), "max_ratio_unstable": ru.max_ratio(1e-9),
           "final_residual_stable": rs.residuals[-1], "final_residual_unstable": ru.residuals[-1]}
    rec["_json"] = {"residuals_stable": rs.residuals, "residuals_unstable": ru.residuals,
                    "ratios_stable": rs.contraction_ratios, "ratios_unstable": ru.contraction_ratios}
    return [rec]


def _task_melnikov(job):
    cfg, _, eps, _ = job
    from .asymptotics import leading_splitting
    from .melnikov import D0_direct, fourier_series_D0
    table = fourier_series_D0(eps, (8, 8, 8))
    th = np.asarray(cfg["theta0"])
    series, tail = table(th), table.tail_estimate(th)
    return [{"eps": eps, "theta0": float(t), "D0_direct": D0_direct(t, eps),
             "D0_series": float(series[j]), "series_tail": float(tail[j]),
             "leading": float(leading_splitting(t, eps))} for j, t in enumerate(th)]


def _task_asympt(job):
    _, _, eps, _ = job
    from .asymptotics import leading_scale, cubic_phase_asymptotic, cubic_phase_integral
    from .melnikov import D0_direct
    rec = {"eps": eps}
    for which in (1, 2):
        v, lead = cubic_phase_integral(which, eps), cubic_phase_asymptotic(which, eps)
        rec[f"cubic{which}"] = v
        rec[f"cubic{which}_leading"] = lead
        rec[f"cubic{which}_rel_err"] = (v - lead) / lead
    rec["D0_half_pi_over_scale"] = D0_direct(np.pi / 2, eps) / leading_scale(eps)
    return [rec]


_TASKS = {"integrate": _task_integrate, "homoclinic": _task_homoclinic,
          "manifold": _task_manifold, "melnikov": _task_melnikov, "asympt": _task_asympt}


def _jobs(cfg):
    cmd = cfg["command"]
    if cmd == "homoclinic":
        return [(cfg, None, e, None) for e in cfg["eps"]]
    if cmd in ("melnikov", "asympt"):
        return [(cfg, None, e, None) for e in cfg["eps"]]
    return [(cfg, r, e, t) for r in cfg["rho"] for e in cfg["eps"] for t in cfg["theta0"]]


def execute(cfg: dict, jobs: int = 1):
    """Run a config; returns ``(records, exit_code)``."""
    if cfg["command"] == "verify":
        from .verify import run_suite
        results = run_suite(cfg["suite"])
        recs = [{"criterion": r.criterion, "name": r.name, "passed": r.passed,
                 "summary": r.summary, "_json": {"details": _plain(r.details)}} for r in results]
        return recs, EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED
    task = _TASKS[cfg["command"]]
    work = _jobs(cfg)
    if jobs > 1 and len(work) > 1:
        with Pool(jobs) as pool:
            chunks = pool.map(task, work)      # map keeps input order
    else:
        chunks = [task(w) for w in work]
    return [r for c in chunks for r in c], EXIT_OK


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, np.generic):
        return v.item()
    return v


def render(cfg: dict, records, fmt: str) -> str:
    h = config_hash(cfg)
    if fmt == "json":
        runs = []
        for r in records:
            flat = {k: v for k, v in r.items() if k != "_json"}
            flat.update(r.get("_json", {}))
            runs.append(flat)
        return dump_json({"schema": SCHEMA_VERSION, "config": cfg, "config_hash": h, "runs": runs})
    rows = [{k: v for k, v in r.items() if k != "_json"} for r in records]
    return dump_csv(rows, h)


def _default_format(args):
    if args.format:
        return args.format
    if args.out and args.out.endswith(".csv"):
        return "csv"
    return "json" if args.command in ("manifold", "verify") else "csv"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)        # exits with status 2 on bad flags
    try:
        cfg = make_config(args)
    except (ConfigError, DomainError) as exc:
        sys.stderr.write(dump_json({"error": type(exc).__name__, "message": str(exc)}))
        return EXIT_CONFIG
    try:
        records, code = execute(cfg, args.jobs)
    except RtbpError as exc:
        sys.stderr.write(dump_json({"error": type(exc).__name__,
                                    "module": type(exc).__module__, "message": str(exc),
                                    "config_hash": config_hash(cfg)}))
        return EXIT_NUMERIC
    text = render(cfg, records, _default_format(args))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
