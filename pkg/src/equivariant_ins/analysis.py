"""Lyapunov, spectral and persistence-of-excitation diagnostics.

Single-sample functions take the value types from :mod:`.group_se23` and
:mod:`.dynamics`. The ``*_batch`` variants operate on stacked arrays from a
simulation trajectory.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .constants import CLASSIFY_TOL, S_D
from .dynamics import Gains, ObserverState, SystemState
from .errors import GainDomainError, WindowTooLongError
from .group_se23 import ExtendedPose, observer_error
from .lie_core import hat, rotation_angle


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Eigen-structure of ``M = C L - S_D`` used by the Lyapunov function.

    Attributes
    ----------
    s1, s2 : float
        Eigenvalues of ``M`` with ``s1 >= s2 > 0``.
    p_mat : ndarray, shape (2, 2)
        Columns are unit-norm right eigenvectors, ``M @ p_mat = p_mat @ diag(s1, s2)``,
        each with its first nonzero entry positive.
    m_p : float
        Square root of the smallest eigenvalue of ``p_mat @ p_mat.T``.
    alpha : float
        Weight of the translation term, ``c / (2 s2)``.
    """

    s1: float
    s2: float
    p_mat: np.ndarray
    m_p: float
    alpha: float

    @property
    def weight(self) -> float:
        """Coefficient ``alpha / (2 m_p^2)`` of ``|W P|^2``."""
        return self.alpha / (2.0 * self.m_p**2)


@dataclass(frozen=True)
class ErrorMetrics:
    attitude_err: float
    pos_err: float
    vel_err: float
    lyapunov: float


class LimitSet(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    NEITHER = "neither"


def characteristic_roots(k: Gains) -> tuple[float, float]:
    """Roots of ``s^2 + l_p s + l_v``, larger (less negative) first."""
    disc = np.sqrt(k.l_p**2 - 4.0 * k.l_v)
    return (-k.l_p + disc) / 2.0, (-k.l_p - disc) / 2.0


def spectral_data(k: Gains) -> SpectralData:
    r_small, r_big = characteristic_roots(k)
    s1, s2 = -r_big, -r_small
    cols = []
    for s in (s1, s2):
        # (M - s I) v = 0  with  M = [[0, -1], [l_v, l_p]]  gives  v = (1, -s).
        vec = np.array([1.0, -s])
        cols.append(vec / np.linalg.norm(vec))
    p_mat = np.column_stack(cols)
    m_p = float(np.sqrt(np.min(np.linalg.eigvalsh(p_mat @ p_mat.T))))
    alpha = k.c / (2.0 * s2)
    p_mat.setflags(write=False)
    return SpectralData(float(s1), float(s2), p_mat, m_p, float(alpha))


def lyapunov_value(ebar: ExtendedPose, sd: SpectralData) -> float:
    """``tr(I - R) + alpha / (2 m_p^2) |W P|_F^2``."""
    wp = ebar.w @ sd.p_mat
    return float(3.0 - np.trace(ebar.r) + sd.weight * np.sum(wp * wp))


def trace_pairing_check(r, x, y) -> tuple[float, float]:
    """Both sides of ``tr(R (x*y)^) = -1/2 <(I-R^2) x, (I-R^2) R^T y>``."""
    r = np.asarray(r, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lhs = float(np.trace(r @ hat(np.cross(x, y))))
    a = np.eye(3) - r @ r
    rhs = float(-0.5 * np.dot(a @ x, a @ r.T @ y))
    return lhs, rhs


def pe_gram_windows(samples, dt: float, window_T: float) -> np.ndarray:
    """Trapezoidal ``int (|y|^2 I - y y^T)`` over every sliding window.

    Windows span ``round(window_T / dt)`` sample intervals and slide by one
    sample. Returns an array of shape ``(n_windows, 3, 3)``.
    """
    y = np.asarray(samples, dtype=float)
    if y.ndim != 2 or y.shape[1] != 3:
        raise ValueError("samples must have shape (n, 3)")
    if not (dt > 0 and window_T > 0):
        raise ValueError("dt and window_T must be positive")
    m = int(round(window_T / dt))
    if m < 1 or m > len(y) - 1:
        raise WindowTooLongError(
            f"window {window_T} s needs {m} intervals, series has {max(len(y) - 1, 0)}"
        )
    g = np.einsum("ni,ni->n", y, y)[:, None, None] * np.eye(3) - y[:, :, None] * y[:, None, :]
    cum = np.zeros_like(g)
    cum[1:] = np.cumsum(0.5 * dt * (g[1:] + g[:-1]), axis=0)
    return cum[m:] - cum[:-m]


def pe_metric(samples, dt: float, window_T: float) -> float:
    """Worst-case windowed excitation ``min_t min_|b|=1 int |b x y|^2``."""
    grams = pe_gram_windows(samples, dt, window_T)
    return float(np.min(np.linalg.eigvalsh(grams)[:, 0]))


def cascade_gain(l1: float, l2: float) -> float:
    """Smaller root of ``k^2 - l1 k + l2 = 0``.

    This is the rate for which ``z = -k x1 + x2`` obeys ``z' = -k z + a``
    exactly along ``x1' = -l1 x1 + x2``, ``x2' = -l2 x1 + a``.
    """
    if not (np.isfinite(l1) and np.isfinite(l2) and l1 > 0 and 0 < l2 < l1**2 / 4):
        raise GainDomainError(f"need l1 > 0 and 0 < l2 < l1^2/4 (got l1={l1}, l2={l2})")
    return float((l1 - np.sqrt(l1**2 - 4.0 * l2)) / 2.0)


def pe_cascade_state(x1, x2, l1: float, l2: float) -> tuple[np.ndarray, float]:
    """Decoupled cascade state ``z = -k x1 + x2`` and its rate ``k``."""
    k = cascade_gain(l1, l2)
    return -k * np.asarray(x1, dtype=float) + np.asarray(x2, dtype=float), k


def classify_limit(ebar: ExtendedPose, tol: float = CLASSIFY_TOL) -> LimitSet:
    if not tol > 0:
        raise ValueError("tol must be positive")
    if np.linalg.norm(ebar.w) <= tol:
        if rotation_angle(ebar.r) <= tol:
            return LimitSet.STABLE
        if abs(np.trace(ebar.r) + 1.0) <= tol:
            return LimitSet.UNSTABLE
    return LimitSet.NEITHER


def error_metrics(x: SystemState, obs: ObserverState, sd: SpectralData) -> ErrorMetrics:
    ebar = observer_error(x.pose(), obs.xhat, obs.wz)
    return ErrorMetrics(
        attitude_err=rotation_angle(ebar.r),
        pos_err=float(np.linalg.norm(x.p - obs.xhat.p)),
        vel_err=float(np.linalg.norm(x.v - obs.xhat.v)),
        lyapunov=lyapunov_value(ebar, sd),
    )


# --- batched forms over (n, ...) stacks ------------------------------------


def observer_error_batch(r, w, rhat, what, wz) -> tuple[np.ndarray, np.ndarray]:
    """Stacked ``(R_E, W_E)`` for arrays of shape ``(n,3,3)`` and ``(n,3,2)``."""
    r_e = r @ np.swapaxes(rhat, -1, -2)
    w_e = (w - r_e @ what) - (wz - r_e @ wz)
    return r_e, w_e


def free_error_translation(w_e, t) -> np.ndarray:
    """Translation error against the auxiliary state of the uncorrected architecture.

    The observer carries ``Z = (I, W_Z, I)`` because the scale part of the
    correction ``Gamma`` is pinned to ``S_D``. Switching ``Gamma`` off entirely
    instead gives ``Z_free(t) = Z(t) (I, 0, exp(-t S_D))``, and conjugating by
    that pure scale maps ``W_E`` to ``W_E exp(-t S_D)``; the attitude block is
    unchanged. With every correction zero this quantity is constant in time.
    Since ``S_D`` is nilpotent, ``exp(-t S_D) = I - t S_D`` exactly.
    """
    w_e = np.asarray(w_e, dtype=float)
    t = np.asarray(t, dtype=float)
    scale = np.eye(2) - t[..., None, None] * S_D
    return w_e @ scale


def rotation_angle_batch(r) -> np.ndarray:
    cos_t = 0.5 * (np.trace(r, axis1=-2, axis2=-1) - 1.0)
    a = r - np.swapaxes(r, -1, -2)
    sin_t = 0.5 * np.sqrt(a[..., 2, 1] ** 2 + a[..., 0, 2] ** 2 + a[..., 1, 0] ** 2)
    return np.arctan2(sin_t, np.clip(cos_t, -1.0, 1.0))


def lyapunov_batch(r_e, w_e, sd: SpectralData) -> np.ndarray:
    wp = w_e @ sd.p_mat
    return 3.0 - np.trace(r_e, axis1=-2, axis2=-1) + sd.weight * np.sum(wp * wp, axis=(-2, -1))
