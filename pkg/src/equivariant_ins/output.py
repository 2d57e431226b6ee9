"""CSV and SVG writers for simulation trajectories."""

from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np

from .errors import PathError
from .lie_core import euler_zyx


def _names(prefix: str, n: int) -> list[str]:
    return [f"{prefix}{i}" for i in range(n)]


CSV_COLUMNS = (
    ["t"]
    + _names("R", 9) + _names("v", 3) + _names("p", 3)
    + _names("Rhat", 9) + _names("vhat", 3) + _names("phat", 3)
    + _names("vz", 3) + _names("pz", 3)
    + ["att_err_rad", "pos_err_m", "vel_err_mps", "lyapunov"]
)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def trajectory_table(traj) -> np.ndarray:
    """Rows in :data:`CSV_COLUMNS` order, shape ``(n, 48)``."""
    if len(traj) == 0:
        return np.empty((0, len(CSV_COLUMNS)))
    return np.column_stack([
        traj.t, traj.states,
        traj.attitude_err, traj.pos_err, traj.vel_err, traj.lyapunov,
    ])


def write_csv(traj, path) -> Path:
    """Write one row per recorded step with 17 significant digits.

    `traj` may be ``None`` or empty, which yields a header-only file.
    """
    path = Path(path)
    table = trajectory_table(traj) if traj is not None else np.empty((0, len(CSV_COLUMNS)))
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for row in table:
                fh.write(",".join(map(_fmt, row)) + "\n")
    except OSError as exc:
        raise PathError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    """Parse a file written by :func:`write_csv` into column arrays."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [[float(x) for x in r] for r in reader if r]
    except OSError as exc:
        raise PathError(f"cannot read CSV {path}: {exc.strerror or exc}") from exc
    if header != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected CSV header")
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def stack(cols: dict[str, np.ndarray], prefix: str, n: int) -> np.ndarray:
    return np.column_stack([cols[f"{prefix}{i}"] for i in range(n)])


def write_svg_plots(traj, out_dir, log_errors: bool = True) -> list[Path]:
    """Write ``estimates.svg`` and ``errors.svg`` into `out_dir`."""
    import matplotlib

    from matplotlib.figure import Figure

    out_dir = Path(out_dir)
    if not out_dir.is_dir() or not os.access(out_dir, os.W_OK):
        raise PathError(f"output directory {out_dir} is not writable")

    t = traj.t
    eul = euler_zyx(traj.r)
    eul_hat = euler_zyx(traj.rhat)
    paths = []
    with matplotlib.rc_context({"svg.hashsalt": "equivariant-ins", "svg.fonttype": "none"}):
        fig = Figure(figsize=(12, 9))
        axes = fig.subplots(3, 3, sharex=True)
        rows = [
            ("attitude", ["roll", "pitch", "yaw"], "rad", eul, eul_hat),
            ("position", ["x", "y", "z"], "m", traj.p, traj.phat),
            ("velocity", ["x", "y", "z"], "m/s", traj.v, traj.vhat),
        ]
        for i, (title, labels, unit, true, est) in enumerate(rows):
            for j in range(3):
                ax = axes[i, j]
                ax.plot(t, true[:, j], label="true")
                ax.plot(t, est[:, j], "--", label="estimate")
                ax.set_ylabel(f"{title} {labels[j]} [{unit}]")
                ax.grid(True, alpha=0.3)
        for ax in axes[-1]:
            ax.set_xlabel("time [s]")
        axes[0, 0].legend(loc="best")
        fig.tight_layout()
        paths.append(_save(fig, out_dir / "estimates.svg"))

        fig = Figure(figsize=(8, 9))
        axes = fig.subplots(4, 1, sharex=True)
        series = [
            (traj.attitude_err, "attitude error [rad]"),
            (traj.pos_err, "position error [m]"),
            (traj.vel_err, "velocity error [m/s]"),
            (traj.lyapunov, "Lyapunov value"),
        ]
        for ax, (y, label) in zip(axes, series):
            ax.plot(t, y, label=label)
            if log_errors and np.all(y > 0):
                ax.set_yscale("log")
            ax.set_ylabel(label)
            ax.legend(loc="best")
            ax.grid(True, alpha=0.3)
        axes[-1].set_xlabel("time [s]")
        fig.tight_layout()
        paths.append(_save(fig, out_dir / "errors.svg"))
    return paths


def _save(fig, path: Path) -> Path:
    try:
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise PathError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path
