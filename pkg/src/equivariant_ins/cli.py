"""Command-line interface.

Exit codes: 0 success, 1 runtime or check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .analysis import LimitSet, classify_limit, pe_metric, spectral_data
from .dynamics import Gains, admissibility_problems
from .errors import EquivariantInsError, NumericalBlowupError, PathError
from .output import write_csv, write_svg_plots
from .sim import apply_override, config_from_dict, config_to_dict, paper_config, run

log = logging.getLogger("equivariant_ins")

LOG_ENV = "EQUIVARIANT_INS_LOG"
_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


class UsageError(Exception):
    pass


def _setup_logging() -> None:
    level = _LEVELS.get(os.environ.get(LOG_ENV, "warn").strip().lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _add_run_flags(p: argparse.ArgumentParser, with_config: bool = True, with_out: bool = True) -> None:
    if with_config:
        p.add_argument("--config", metavar="PATH", help="JSON config file (default: the paper setup)")
    if with_out:
        p.add_argument("--out", metavar="DIR", default="results", help="output directory (default: results)")
    p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[], dest="overrides",
                   help="override a dotted config key, e.g. gains.c=8.0 (repeatable)")
    p.add_argument("--integrator", choices=["euler", "rk4"], help="integration scheme")
    p.add_argument("--dt", type=float, metavar="SECONDS", help="integration step")
    p.add_argument("--duration", type=float, metavar="SECONDS", help="simulated time span")
    p.add_argument("--seed", type=int, metavar="U64", help="seed for measurement noise")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="equivariant-ins",
        description="Equivariant GNSS-aided inertial navigation observer simulator.",
        epilog=f"Set {LOG_ENV}=error|warn|info|debug to control log verbosity.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("simulate", help="run a configured simulation and write CSV, SVG and a summary")
    _add_run_flags(p)

    p = sub.add_parser("reproduce-paper", help="run the published experiment and check convergence")
    _add_run_flags(p, with_config=False)

    p = sub.add_parser("check-gains", help="report admissibility and spectral data for observer gains")
    p.add_argument("--c", type=float, default=4.0, help="attitude gain c (default 4.0)")
    p.add_argument("--lv", type=float, default=24.0, help="velocity gain l_v (default 24.0)")
    p.add_argument("--lp", type=float, default=20.0, help="position gain l_p (default 20.0)")

    p = sub.add_parser("pe-report", help="measure persistence of excitation along a run")
    _add_run_flags(p)
    p.add_argument("--window", type=float, default=2 * math.pi, metavar="SECONDS",
                   help="PE integration window (default 2*pi)")
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


# --- config assembly ---------------------------------------------------------


def load_config_dict(args: argparse.Namespace, use_file: bool = True) -> tuple[dict, set[str]]:
    """Config mapping with file, ``--set`` and shortcut flags applied in that order.

    Also returns the set of keys the user set explicitly.
    """
    d = config_to_dict(paper_config())
    path = getattr(args, "config", None) if use_file else None
    if path:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise PathError(f"cannot read config {path}: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise EquivariantInsError(f"{path}: invalid JSON ({exc})") from exc
        d = config_to_dict(config_from_dict(user), checks={**d["checks"], **user.get("checks", {})})
    explicit = set()
    for item in args.overrides:
        try:
            apply_override(d, item)
        except KeyError as exc:
            raise UsageError(f"--set: {exc.args[0]}") from exc
        explicit.add(item.split("=", 1)[0].strip())
    for key in ("integrator", "dt", "duration", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            d[key] = val
            explicit.add(key)
    return d, explicit


# --- reporting ---------------------------------------------------------------


def summarize(traj, checks: dict) -> dict:
    """Final metrics, PE measurements and Lyapunov increments of a run."""
    cfg = traj.config
    inc = np.diff(traj.lyapunov)
    window = float(checks.get("pe_window", 2 * math.pi))
    ebar = traj.final_error()
    out = {
        "duration_s": float(traj.t[-1]),
        "dt_s": float(cfg.dt),
        "integrator": cfg.integrator,
        "steps": len(traj) - 1,
        "final_attitude_err_rad": float(traj.attitude_err[-1]),
        "final_pos_err_m": float(traj.pos_err[-1]),
        "final_vel_err_mps": float(traj.vel_err[-1]),
        "initial_lyapunov": float(traj.lyapunov[0]),
        "final_lyapunov": float(traj.lyapunov[-1]),
        "lyapunov_increment_min": float(inc.min()) if inc.size else 0.0,
        "lyapunov_increment_max": float(inc.max()) if inc.size else 0.0,
        "final_limit": classify_limit(ebar, float(checks.get("classify_tol", 1e-2))).value,
    }
    try:
        out["pe_inertial_accel"] = pe_metric(traj.inertial_accel(), cfg.dt, window)
        out["pe_p_minus_pz"] = pe_metric(traj.p - traj.pz, cfg.dt, window)
    except analysis.WindowTooLongError:
        out["pe_inertial_accel"] = None
        out["pe_p_minus_pz"] = None
    out["pe_window_s"] = window
    return out


def write_summary(summary: dict, path: Path) -> None:
    lines = []
    for k, v in summary.items():
        if isinstance(v, float):
            v = format(v, ".6e")
        elif v is None:
            v = "n/a"
        lines.append(f"{k}: {v}")
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise PathError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _prepare_out(out: str) -> Path:
    path = Path(out)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise PathError(f"cannot create output directory {path}: {exc.strerror or exc}") from exc
    if not os.access(path, os.W_OK):
        raise PathError(f"output directory {path} is not writable")
    return path


def write_config(cfg, checks: dict, path: Path) -> None:
    """Echo the fully resolved configuration, so a run can be repeated with ``--config``."""
    try:
        path.write_text(json.dumps(config_to_dict(cfg, checks), indent=2) + "\n")
    except OSError as exc:
        raise PathError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _emit(traj, summary: dict, out: Path, checks: dict) -> None:
    write_config(traj.config, checks, out / "config.json")
    write_csv(traj, out / "trajectory.csv")
    write_svg_plots(traj, out)
    write_summary(summary, out / "summary.txt")
    log.info("wrote results to %s", out)


# --- subcommands -------------------------------------------------------------


def cmd_simulate(args) -> int:
    d, _ = load_config_dict(args)
    cfg = config_from_dict(d)
    out = _prepare_out(args.out)
    traj = run(cfg)
    summary = summarize(traj, d["checks"])
    _emit(traj, summary, out, d["checks"])
    print(f"final attitude error {summary['final_attitude_err_rad']:.6e} rad, "
          f"limit {summary['final_limit']}; results in {out}")
    return 0


def cmd_reproduce_paper(args) -> int:
    d, explicit = load_config_dict(args, use_file=False)
    checks = d["checks"]
    cfg = config_from_dict(d)
    out = _prepare_out(args.out)
    traj = run(cfg)
    summary = summarize(traj, checks)

    tol = checks[f"lyapunov_increase_tol_{cfg.integrator}"]
    lyap_ok = summary["lyapunov_increment_max"] <= tol
    stable = summary["final_limit"] == LimitSet.STABLE.value
    bounds = {
        "attitude": summary["final_attitude_err_rad"] <= checks["max_final_attitude_err"],
        "position": summary["final_pos_err_m"] <= checks["max_final_pos_err"],
        "velocity": summary["final_vel_err_mps"] <= checks["max_final_vel_err"],
    }
    short = "duration" in explicit and cfg.duration < checks["nominal_duration"]
    summary["lyapunov_increase_tol"] = tol
    summary["lyapunov_check"] = "pass" if lyap_ok else "fail"
    summary["reference_bounds"] = ", ".join(f"{k}={'pass' if v else 'fail'}" for k, v in bounds.items())
    _emit(traj, summary, out, d["checks"])

    print(f"final errors: attitude {summary['final_attitude_err_rad']:.3e} rad, "
          f"position {summary['final_pos_err_m']:.3e} m, velocity {summary['final_vel_err_mps']:.3e} m/s")
    print(f"max Lyapunov increment {summary['lyapunov_increment_max']:.3e} (tol {tol:g}); "
          f"final limit {summary['final_limit']}")
    if not lyap_ok:
        print("error: Lyapunov value increased beyond tolerance", file=sys.stderr)
        return 1
    if not stable:
        if short:
            print(f"warning: duration {cfg.duration:g} s is shorter than the nominal "
                  f"{checks['nominal_duration']:g} s; convergence not expected", file=sys.stderr)
            return 0
        print("error: observer error did not reach the stable equilibrium", file=sys.stderr)
        return 1
    return 0


def cmd_check_gains(args) -> int:
    problems = admissibility_problems(args.c, args.lv, args.lp)
    print(f"gains: c={args.c:g} l_v={args.lv:g} l_p={args.lp:g}")
    if problems:
        print("inadmissible:")
        for msg in problems:
            print(f"  - {msg}")
        return 1
    k = Gains(args.c, args.lv, args.lp)
    r1, r2 = analysis.characteristic_roots(k)
    sd = spectral_data(k)
    print("admissible: l_p > 0 and 0 < l_v < l_p^2/4")
    print(f"characteristic roots: {r1:.6f}, {r2:.6f}")
    print(f"s1 = {sd.s1:.6f}, s2 = {sd.s2:.6f}")
    print(f"alpha = {sd.alpha:.6f}")
    print(f"m_p = {sd.m_p:.6f}")
    return 0


def cmd_pe_report(args) -> int:
    d, _ = load_config_dict(args)
    cfg = config_from_dict(d)
    traj = run(cfg)
    ra = traj.inertial_accel()
    x1 = traj.p - traj.pz
    x2 = traj.v - traj.vz
    z, k = analysis.pe_cascade_state(x1, x2, cfg.gains.l_p, cfg.gains.l_v)
    resid = np.diff(z, axis=0) / cfg.dt + k * z[:-1] - ra[:-1]
    rms = float(np.sqrt(np.mean(np.sum(resid**2, axis=1))))
    print(f"window T = {args.window:.6f} s")
    print(f"PE metric of R a      : {pe_metric(ra, cfg.dt, args.window):.6e}")
    print(f"PE metric of p - p_Z  : {pe_metric(x1, cfg.dt, args.window):.6e}")
    print(f"PE metric of cascade z: {pe_metric(z, cfg.dt, args.window):.6e}")
    print(f"cascade rate k = {k:.6f}, residual RMS = {rms:.3e}")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "reproduce-paper": cmd_reproduce_paper,
    "check-gains": cmd_check_gains,
    "pe-report": cmd_pe_report,
}


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except NumericalBlowupError as exc:
        print(f"error: numerical blow-up at step {exc.step}", file=sys.stderr)
        return 1
    except (EquivariantInsError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
