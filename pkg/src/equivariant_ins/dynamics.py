"""Continuous-time vector fields of the INS system and the equivariant observer.

Everything here is a pure function of value types. The simulation loop in
:mod:`equivariant_ins.kernels` re-implements the same fields on flat arrays;
the test suite keeps the two in agreement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .constants import C_VEC, GRAVITY, S_D
from .errors import GainDomainError
from .group_se23 import ExtendedPose, _frozen
from .lie_core import hat


@dataclass(frozen=True, eq=False)
class SystemState:
    r: np.ndarray
    v: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r", _frozen(self.r, (3, 3)))
        object.__setattr__(self, "v", _frozen(self.v, (3,)))
        object.__setattr__(self, "p", _frozen(self.p, (3,)))

    def pose(self) -> ExtendedPose:
        return ExtendedPose.from_rvp(self.r, self.v, self.p)


@dataclass(frozen=True, eq=False)
class ImuInput:
    """Body-frame angular velocity (rad/s) and specific acceleration (m/s^2)."""

    omega: np.ndarray
    accel: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omega", _frozen(self.omega, (3,)))
        object.__setattr__(self, "accel", _frozen(self.accel, (3,)))


@dataclass(frozen=True)
class Gains:
    """Observer gains ``c`` and ``L = (l_v l_p)``.

    Admissible gains satisfy ``c > 0``, ``l_p > 0`` and ``0 < l_v < l_p**2 / 4``.
    The boundary ``l_v == l_p**2 / 4`` (repeated root) is rejected.
    """

    c: float
    l_v: float
    l_p: float

    def __post_init__(self):
        problems = admissibility_problems(self.c, self.l_v, self.l_p)
        if problems:
            raise GainDomainError("; ".join(problems))

    @property
    def row(self) -> np.ndarray:
        """``L`` as a 1x2 array."""
        return np.array([[self.l_v, self.l_p]])

    def error_matrix(self) -> np.ndarray:
        """``C L - S_D``, the generator of the linear translation-error flow."""
        return C_VEC @ self.row - S_D


def admissibility_problems(c: float, l_v: float, l_p: float) -> list[str]:
    """Human-readable reasons the gains are inadmissible (empty if fine)."""
    problems = []
    vals = dict(c=c, l_v=l_v, l_p=l_p)
    for name, val in vals.items():
        if not np.isfinite(val):
            problems.append(f"{name} must be finite")
    if problems:
        return problems
    if not c > 0:
        problems.append(f"c must be > 0 (got {c})")
    if not l_p > 0:
        problems.append(f"l_p must be > 0 (got {l_p})")
    if not l_v > 0:
        problems.append(f"l_v must be > 0 (got {l_v})")
    if not l_v < l_p**2 / 4:
        problems.append(f"l_v must be < l_p^2/4 = {l_p**2 / 4:g} (got {l_v})")
    return problems


@dataclass(frozen=True, eq=False)
class ObserverState:
    """Estimate ``Xhat`` plus the auxiliary translation block ``W_Z = (v_Z p_Z)``."""

    xhat: ExtendedPose
    wz: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "wz", _frozen(self.wz, (3, 2)))

    @classmethod
    def from_parts(cls, rhat, vhat, phat, vz, pz) -> ObserverState:
        return cls(ExtendedPose.from_rvp(rhat, vhat, phat), np.column_stack([vz, pz]))

    @property
    def vz(self) -> np.ndarray:
        return self.wz[:, 0]

    @property
    def pz(self) -> np.ndarray:
        return self.wz[:, 1]


@dataclass(frozen=True, eq=False)
class Corrections:
    omega_d: np.ndarray
    w_d: np.ndarray
    w_g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omega_d", _frozen(self.omega_d, (3,)))
        object.__setattr__(self, "w_d", _frozen(self.w_d, (3, 2)))
        object.__setattr__(self, "w_g", _frozen(self.w_g, (3, 2)))

    @classmethod
    def zero(cls) -> Corrections:
        return cls(np.zeros(3), np.zeros((3, 2)), np.zeros((3, 2)))


class SystemTangent(NamedTuple):
    r_dot: np.ndarray
    v_dot: np.ndarray
    p_dot: np.ndarray


class ObserverTangent(NamedTuple):
    rhat_dot: np.ndarray
    vhat_dot: np.ndarray
    phat_dot: np.ndarray
    vz_dot: np.ndarray
    pz_dot: np.ndarray


class ErrorTangent(NamedTuple):
    r_dot: np.ndarray
    w_dot: np.ndarray


def system_derivative(s: SystemState, u: ImuInput, g=GRAVITY) -> SystemTangent:
    """Strapdown kinematics ``(R hat(Omega), R a + g, v)``."""
    g = np.asarray(g, dtype=float)
    return SystemTangent(s.r @ hat(u.omega), s.r @ u.accel + g, s.v.copy())


def measure(s: SystemState) -> np.ndarray:
    """GNSS position output."""
    return s.p.copy()


def correction_terms(y, obs: ObserverState, k: Gains) -> Corrections:
    """Innovation terms driven by the measured position `y`."""
    y = np.asarray(y, dtype=float)
    phat = obs.xhat.p
    pz = obs.pz
    L = k.row
    omega_d = k.c * np.cross(phat - pz, y - pz)
    w_d = (y - phat)[:, None] @ L
    w_g = (y - pz)[:, None] @ L
    return Corrections(omega_d, w_d, w_g)


def observer_derivative(
    obs: ObserverState, u: ImuInput, corr: Corrections, g=GRAVITY
) -> ObserverTangent:
    g = np.asarray(g, dtype=float)
    rhat = obs.xhat.r
    vhat, phat = obs.xhat.v, obs.xhat.p
    vz, pz = obs.vz, obs.pz
    od = corr.omega_d
    return ObserverTangent(
        rhat @ hat(u.omega) + hat(od) @ rhat,
        rhat @ u.accel + g + corr.w_d[:, 0] + np.cross(od, vhat - vz),
        vhat + corr.w_d[:, 1] + np.cross(od, phat - pz),
        g + corr.w_g[:, 0],
        vz + corr.w_g[:, 1],
    )


def error_derivative(ebar: ExtendedPose, corr: Corrections) -> ErrorTangent:
    """Expanded ``d/dt Ebar = -Ebar Delta - [Gamma, Ebar]``."""
    r_dot = -ebar.r @ hat(corr.omega_d)
    w_dot = ebar.w @ S_D + ebar.r @ (corr.w_g - corr.w_d) - corr.w_g
    return ErrorTangent(r_dot, w_dot)
