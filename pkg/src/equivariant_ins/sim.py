"""Deterministic coupled simulation of the INS system and observer."""

from __future__ import annotations

import copy
import dataclasses
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, NamedTuple

import numpy as np

from . import kernels
from .analysis import (
    ErrorMetrics,
    SpectralData,
    free_error_translation,
    lyapunov_batch,
    observer_error_batch,
    rotation_angle_batch,
    spectral_data,
)
from .constants import BLOWUP_NORM, GRAVITY
from .dynamics import Gains, ImuInput, ObserverState, SystemState
from .errors import NumericalBlowupError
from .group_se23 import ExtendedPose
from .lie_core import is_rotation, project_to_so3, so3_exp

log = logging.getLogger(__name__)

INTEGRATORS = {"euler": kernels.EULER, "rk4": kernels.RK4}


@dataclass(frozen=True)
class InputProfile:
    """Named IMU input generator.

    ``"paper"``
        ``omega`` constant and ``accel = forward - R^T (spring p + g)``.
        Params: ``omega`` (3), ``forward`` (3), ``spring``.
    ``"sinusoid"``
        Each of the six channels (omega xyz, accel xyz) is
        ``bias + sum_j amp_j sin(freq_j t + phase_j)``. Params: ``bias`` (6),
        ``amp``, ``freq``, ``phase`` (each 6 x m).
    """

    name: str = "paper"
    params: dict = field(default_factory=dict)

    def packed(self) -> tuple[int, np.ndarray]:
        if self.name == "paper":
            p = {"omega": [0.0, 0.0, 1.0], "forward": [2.0, 0.0, 0.0], "spring": 0.75}
            p.update(self.params)
            arr = np.concatenate([np.asarray(p["omega"], float), np.asarray(p["forward"], float),
                                  [float(p["spring"])]])
            if arr.shape != (7,):
                raise ValueError("paper profile needs omega[3], forward[3], spring")
            return kernels.PROFILE_PAPER, arr
        if self.name == "sinusoid":
            bias = np.asarray(self.params.get("bias", np.zeros(6)), float).reshape(6)
            amp = np.asarray(self.params.get("amp", np.zeros((6, 0))), float)
            amp = amp.reshape(6, -1)
            m = amp.shape[1]
            freq = np.asarray(self.params.get("freq", np.zeros((6, m))), float).reshape(6, m)
            phase = np.asarray(self.params.get("phase", np.zeros((6, m))), float).reshape(6, m)
            chunks = [[float(m)]]
            for ch in range(6):
                chunks.append([bias[ch]])
                chunks.append(np.stack([amp[ch], freq[ch], phase[ch]], axis=1).ravel())
            return kernels.PROFILE_SINUSOID, np.concatenate(chunks)
        raise ValueError(f"unknown input profile {self.name!r}")


def random_sinusoid_profile(seed: int, n_terms: int = 3) -> InputProfile:
    """Smooth pseudo-random excitation with ``n_terms`` harmonics per channel."""
    rng = np.random.default_rng(seed)
    bias = np.concatenate([rng.normal(0.0, 0.3, 3), rng.normal(0.0, 1.0, 3)])
    amp = np.vstack([rng.uniform(0.1, 1.0, (3, n_terms)), rng.uniform(0.5, 3.0, (3, n_terms))])
    freq = rng.uniform(0.2, 3.0, (6, n_terms))
    phase = rng.uniform(0.0, 2 * np.pi, (6, n_terms))
    return InputProfile(
        "sinusoid",
        {"bias": bias.tolist(), "amp": amp.tolist(), "freq": freq.tolist(), "phase": phase.tolist()},
    )


@dataclass(frozen=True, eq=False)
class SimConfig:
    duration: float
    dt: float
    integrator: str
    gains: Gains
    initial_system: SystemState
    initial_observer: ObserverState
    gravity: np.ndarray = field(default_factory=lambda: GRAVITY.copy())
    input_profile: InputProfile = field(default_factory=InputProfile)
    measurement_decimation: int = 1
    noise_std: float | None = None
    seed: int = 0
    corrections: bool = True

    def __post_init__(self):
        if not (self.duration > 0 and self.dt > 0 and self.dt <= self.duration):
            raise ValueError(f"need 0 < dt <= duration (dt={self.dt}, duration={self.duration})")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {sorted(INTEGRATORS)}")
        if int(self.measurement_decimation) != self.measurement_decimation or self.measurement_decimation < 1:
            raise ValueError("measurement_decimation must be a positive integer")
        if self.noise_std is not None and not self.noise_std >= 0:
            raise ValueError("noise_std must be nonnegative")
        g = np.array(self.gravity, dtype=float)
        if g.shape != (3,):
            raise ValueError("gravity must be a 3-vector")
        g.setflags(write=False)
        object.__setattr__(self, "gravity", g)

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    @property
    def held_measurement(self) -> bool:
        """True when the measurement is sampled and held instead of read per stage."""
        return self.measurement_decimation > 1 or bool(self.noise_std)

    def replace(self, **changes) -> SimConfig:
        return dataclasses.replace(self, **changes)


PAPER_GAINS = Gains(c=4.0, l_v=24.0, l_p=20.0)


def paper_config(**changes) -> SimConfig:
    """The published experiment: projected Euler at 100 Hz for 40 s."""
    cfg = SimConfig(
        duration=40.0,
        dt=0.01,
        integrator="euler",
        gains=PAPER_GAINS,
        initial_system=SystemState(np.eye(3), np.zeros(3), np.zeros(3)),
        initial_observer=ObserverState.from_parts(
            so3_exp([0.99 * np.pi, 0.0, 0.0]),
            [0.2, 0.4, -1.1],
            [3.0, -2.0, 2.0],
            np.zeros(3),
            np.zeros(3),
        ),
    )
    return cfg.replace(**changes) if changes else cfg


def paper_input_profile(t: float, s: SystemState, g=GRAVITY) -> ImuInput:
    """``Omega = e3`` rad/s, ``a = 2 e1 - R^T (0.75 p + g)``."""
    g = np.asarray(g, dtype=float)
    return ImuInput(np.array([0.0, 0.0, 1.0]), np.array([2.0, 0.0, 0.0]) - s.r.T @ (0.75 * s.p + g))


# --- flat state packing ----------------------------------------------------


def pack_state(s: SystemState, obs: ObserverState) -> np.ndarray:
    return np.concatenate([
        s.r.ravel(), s.v, s.p,
        obs.xhat.r.ravel(), obs.xhat.v, obs.xhat.p, obs.vz, obs.pz,
    ])


def unpack_state(y) -> tuple[SystemState, ObserverState]:
    y = np.asarray(y, dtype=float)
    s = SystemState(y[0:9].reshape(3, 3), y[9:12], y[12:15])
    obs = ObserverState.from_parts(y[15:24].reshape(3, 3), y[24:27], y[27:30], y[30:33], y[33:36])
    return s, obs


def _kernel_args(cfg: SimConfig):
    profile, pp = cfg.input_profile.packed()
    gains = np.array([cfg.gains.c, cfg.gains.l_v, cfg.gains.l_p])
    return gains, np.ascontiguousarray(cfg.gravity), bool(cfg.corrections), profile, pp


def step(cfg: SimConfig, s: SystemState, obs: ObserverState, t: float):
    """Advance system and observer by one ``cfg.dt``.

    The single-step form always feeds the exact current position to the
    observer; decimation and noise only apply inside :func:`run`.
    """
    gains, g, corr_on, profile, pp = _kernel_args(cfg)
    y = kernels.step_state(
        float(t), pack_state(s, obs), float(cfg.dt), INTEGRATORS[cfg.integrator],
        np.zeros(3), False, gains, g, corr_on, profile, pp,
    )
    if not np.all(np.abs(y) <= BLOWUP_NORM):
        raise NumericalBlowupError(0)
    return unpack_state(y)


# --- trajectories ----------------------------------------------------------


class Record(NamedTuple):
    t: float
    system: SystemState
    observer: ObserverState
    imu: ImuInput
    measurement: np.ndarray
    metrics: ErrorMetrics


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled run output.

    ``states`` uses the flat layout of :mod:`.kernels`; ``inputs`` holds
    ``(omega, accel)`` evaluated at each recorded state.
    """

    t: np.ndarray
    states: np.ndarray
    inputs: np.ndarray
    measurements: np.ndarray
    config: SimConfig

    def __len__(self) -> int:
        return len(self.t)

    def record(self, k: int) -> Record:
        s, obs = unpack_state(self.states[k])
        m = ErrorMetrics(
            float(self.attitude_err[k]), float(self.pos_err[k]),
            float(self.vel_err[k]), float(self.lyapunov[k]),
        )
        return Record(float(self.t[k]), s, obs, ImuInput(self.inputs[k, :3], self.inputs[k, 3:]),
                      self.measurements[k].copy(), m)

    # views into the state array
    @property
    def r(self):
        return self.states[:, 0:9].reshape(-1, 3, 3)

    @property
    def v(self):
        return self.states[:, 9:12]

    @property
    def p(self):
        return self.states[:, 12:15]

    @property
    def rhat(self):
        return self.states[:, 15:24].reshape(-1, 3, 3)

    @property
    def vhat(self):
        return self.states[:, 24:27]

    @property
    def phat(self):
        return self.states[:, 27:30]

    @property
    def vz(self):
        return self.states[:, 30:33]

    @property
    def pz(self):
        return self.states[:, 33:36]

    @property
    def w(self):
        return np.stack([self.v, self.p], axis=-1)

    @property
    def what(self):
        return np.stack([self.vhat, self.phat], axis=-1)

    @property
    def wz(self):
        return np.stack([self.vz, self.pz], axis=-1)

    @cached_property
    def spectral(self) -> SpectralData:
        return spectral_data(self.config.gains)

    @cached_property
    def error(self) -> tuple[np.ndarray, np.ndarray]:
        """Stacked synchronous error ``(R_E, W_E)``."""
        return observer_error_batch(self.r, self.w, self.rhat, self.what, self.wz)

    @cached_property
    def free_error(self) -> tuple[np.ndarray, np.ndarray]:
        """``(R_E, W_E)`` measured against the auxiliary state with ``Gamma = 0``.

        See :func:`~equivariant_ins.analysis.free_error_translation`. Constant
        along runs with ``corrections=False``.
        """
        r_e, w_e = self.error
        return r_e, free_error_translation(w_e, self.t)

    @cached_property
    def attitude_err(self) -> np.ndarray:
        return rotation_angle_batch(self.r @ np.swapaxes(self.rhat, -1, -2))

    @cached_property
    def pos_err(self) -> np.ndarray:
        return np.linalg.norm(self.p - self.phat, axis=1)

    @cached_property
    def vel_err(self) -> np.ndarray:
        return np.linalg.norm(self.v - self.vhat, axis=1)

    @cached_property
    def lyapunov(self) -> np.ndarray:
        return lyapunov_batch(*self.error, self.spectral)

    def inertial_accel(self) -> np.ndarray:
        """Specific acceleration rotated into the inertial frame, ``R a``."""
        return np.einsum("nij,nj->ni", self.r, self.inputs[:, 3:])

    def final_error(self) -> ExtendedPose:
        r_e, w_e = self.error
        return ExtendedPose(r_e[-1], w_e[-1])


def run(cfg: SimConfig) -> Trajectory:
    """Integrate ``cfg`` and record every step.

    Raises
    ------
    NumericalBlowupError
        With ``.step`` set to the first step whose state magnitude exceeded
        the blow-up bound.
    """
    n = cfg.n_steps
    gains, g, corr_on, profile, pp = _kernel_args(cfg)
    noise = np.zeros((n + 1, 3))
    if cfg.noise_std:
        noise = np.random.default_rng(cfg.seed).normal(0.0, cfg.noise_std, (n + 1, 3))
    states = np.empty((n + 1, kernels.STATE_SIZE))
    inputs = np.empty((n + 1, 6))
    meas = np.empty((n + 1, 3))
    log.debug("integrating %d %s steps of %g s", n, cfg.integrator, cfg.dt)
    status = kernels.integrate(
        pack_state(cfg.initial_system, cfg.initial_observer), 0.0, float(cfg.dt), n,
        INTEGRATORS[cfg.integrator], gains, g, corr_on, profile, pp, noise,
        int(cfg.measurement_decimation), cfg.held_measurement, states, inputs, meas,
    )
    if status != kernels.OK:
        raise NumericalBlowupError(int(status))
    t = np.arange(n + 1) * float(cfg.dt)
    return Trajectory(t, states, inputs, meas, cfg)


# --- JSON config -------------------------------------------------------------


def _vec(a) -> list[float]:
    return [float(x) for x in np.asarray(a, dtype=float).ravel()]


def default_checks() -> dict[str, Any]:
    from .reference import DEFAULT_CHECKS

    return copy.deepcopy(DEFAULT_CHECKS)


def config_to_dict(cfg: SimConfig, checks: dict | None = None) -> dict[str, Any]:
    """JSON-ready mapping; attitudes are stored as full matrices."""
    s, o = cfg.initial_system, cfg.initial_observer
    d = {
        "duration": float(cfg.duration),
        "dt": float(cfg.dt),
        "integrator": cfg.integrator,
        "gains": {"c": cfg.gains.c, "l_v": cfg.gains.l_v, "l_p": cfg.gains.l_p},
        "gravity": _vec(cfg.gravity),
        "initial_system": {"attitude": s.r.tolist(), "v": _vec(s.v), "p": _vec(s.p)},
        "initial_observer": {
            "attitude": o.xhat.r.tolist(), "v": _vec(o.xhat.v), "p": _vec(o.xhat.p),
            "vz": _vec(o.vz), "pz": _vec(o.pz),
        },
        "input_profile": {"name": cfg.input_profile.name, "params": copy.deepcopy(cfg.input_profile.params)},
        "measurement_decimation": int(cfg.measurement_decimation),
        "noise_std": cfg.noise_std,
        "seed": int(cfg.seed),
        "corrections": bool(cfg.corrections),
    }
    d["checks"] = copy.deepcopy(checks) if checks is not None else default_checks()
    return d


def _attitude(block: dict) -> np.ndarray:
    if "attitude" in block:
        a = np.asarray(block["attitude"], dtype=float)
        if a.shape == (3,):
            return so3_exp(a)
        if a.shape != (3, 3):
            raise ValueError("attitude must be a rotation vector or a 3x3 matrix")
        # keep exact rotations bit-for-bit so configs round-trip through JSON
        return a if is_rotation(a) else project_to_so3(a)
    return np.eye(3)


def config_from_dict(d: dict) -> SimConfig:
    """Build a :class:`SimConfig`; missing keys fall back to the paper setup.

    ``attitude`` may be a rotation vector (3 numbers) or a 3x3 matrix.
    """
    base = config_to_dict(paper_config())
    merged = _deep_merge(base, d)
    si, so = merged["initial_system"], merged["initial_observer"]
    ip = merged["input_profile"]
    return SimConfig(
        duration=float(merged["duration"]),
        dt=float(merged["dt"]),
        integrator=str(merged["integrator"]).lower(),
        gains=Gains(**{k: float(v) for k, v in merged["gains"].items()}),
        gravity=np.asarray(merged["gravity"], dtype=float),
        initial_system=SystemState(_attitude(si), si["v"], si["p"]),
        initial_observer=ObserverState.from_parts(_attitude(so), so["v"], so["p"], so["vz"], so["pz"]),
        input_profile=InputProfile(ip["name"], dict(ip.get("params") or {})),
        measurement_decimation=int(merged["measurement_decimation"]),
        noise_std=None if merged["noise_std"] is None else float(merged["noise_std"]),
        seed=int(merged["seed"]),
        corrections=bool(merged["corrections"]),
    )


def _deep_merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "params":
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def apply_override(d: dict, assignment: str) -> None:
    """Apply ``"a.b.c=value"`` in place; the dotted key must already exist.

    The value is parsed as JSON when possible and kept as a string otherwise.
    """
    if "=" not in assignment:
        raise KeyError(f"override {assignment!r} is not of the form KEY=VALUE")
    key, raw = assignment.split("=", 1)
    parts = key.strip().split(".")
    node = d
    for part in parts[:-1]:
        if not isinstance(node, dict) or part not in node:
            raise KeyError(f"unknown config key {key!r}")
        node = node[part]
    if not isinstance(node, dict) or parts[-1] not in node:
        raise KeyError(f"unknown config key {key!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    if isinstance(node[parts[-1]], dict) and not isinstance(value, dict):
        raise KeyError(f"config key {key!r} is a section, not a value")
    node[parts[-1]] = value
