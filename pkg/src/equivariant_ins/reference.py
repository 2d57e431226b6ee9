"""Frozen results of the fine-step reference run.

The values below come from :func:`compute_reference` (RK4, ``dt = 1e-4``,
paper initial conditions) and were recorded once. Acceptance thresholds are
1.5 times these.
"""

REFERENCE_DT = 1e-4

REFERENCE_FINAL = {
    "attitude_err": 0.0002804943463963391,
    "pos_err": 5.50616722242584e-05,
    "vel_err": 0.001143188339185145,
}

THRESHOLD_FACTOR = 1.5

DEFAULT_CHECKS = {
    "lyapunov_increase_tol_euler": 1e-4,
    "lyapunov_increase_tol_rk4": 1e-9,
    "classify_tol": 1e-2,
    "max_final_attitude_err": THRESHOLD_FACTOR * REFERENCE_FINAL["attitude_err"],
    "max_final_pos_err": THRESHOLD_FACTOR * REFERENCE_FINAL["pos_err"],
    "max_final_vel_err": THRESHOLD_FACTOR * REFERENCE_FINAL["vel_err"],
    "pe_window": 6.283185307179586,
    "nominal_duration": 40.0,
}


def compute_reference() -> dict[str, float]:
    """Re-run the reference integration and return its final error metrics."""
    from .sim import paper_config, run

    traj = run(paper_config(integrator="rk4", dt=REFERENCE_DT))
    return {
        "attitude_err": float(traj.attitude_err[-1]),
        "pos_err": float(traj.pos_err[-1]),
        "vel_err": float(traj.vel_err[-1]),
    }
