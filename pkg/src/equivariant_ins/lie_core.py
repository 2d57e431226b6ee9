"""SO(3) primitives on plain ``numpy`` arrays.

Vectors are shape ``(3,)`` and matrices ``(3, 3)``. Nothing here allocates
wrapper objects; rotations are ordinary arrays that satisfy ``R^T R = I``.
"""

from __future__ import annotations

import numpy as np

from .constants import SMALL_ANGLE, TOL_DEGENERATE, TOL_ORTH, TOL_SKEW
from .errors import DegenerateMatrixError, NotSkewError


def hat(w) -> np.ndarray:
    """Skew matrix with ``hat(w) @ u == np.cross(w, u)``."""
    w = np.asarray(w, dtype=float)
    return np.array(
        [
            [0.0, -w[2], w[1]],
            [w[2], 0.0, -w[0]],
            [-w[1], w[0], 0.0],
        ]
    )


def vee(m, tol: float = TOL_SKEW) -> np.ndarray:
    """Inverse of :func:`hat`.

    Raises
    ------
    NotSkewError
        If ``m + m.T`` has an entry larger than `tol`.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise NotSkewError(f"expected a 3x3 matrix, got shape {m.shape}")
    defect = np.max(np.abs(m + m.T))
    if not defect <= tol:
        raise NotSkewError(f"matrix is not skew-symmetric (defect {defect:.3e})")
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def so3_exp(w) -> np.ndarray:
    """Rotation matrix ``exp(hat(w))`` via the Rodrigues formula."""
    w = np.asarray(w, dtype=float)
    theta = float(np.linalg.norm(w))
    W = hat(w)
    W2 = W @ W
    if theta < SMALL_ANGLE:
        return np.eye(3) + W + 0.5 * W2
    return (
        np.eye(3)
        + (np.sin(theta) / theta) * W
        + ((1.0 - np.cos(theta)) / theta**2) * W2
    )


def rotation_angle(r) -> float:
    """Angle of rotation in ``[0, pi]``.

    Evaluated as ``atan2(sin, cos)`` rather than ``arccos`` of the trace, which
    agrees for proper rotations but keeps full precision near ``0`` and ``pi``.
    """
    r = np.asarray(r, dtype=float)
    cos_t = 0.5 * (np.trace(r) - 1.0)
    a = r - r.T
    sin_t = 0.5 * np.sqrt(a[2, 1] ** 2 + a[0, 2] ** 2 + a[1, 0] ** 2)
    return float(np.arctan2(sin_t, np.clip(cos_t, -1.0, 1.0)))


def orthogonality_defect(r) -> float:
    """Frobenius norm of ``R^T R - I``."""
    r = np.asarray(r, dtype=float)
    return float(np.linalg.norm(r.T @ r - np.eye(3)))


def is_rotation(r, tol: float = TOL_ORTH) -> bool:
    r = np.asarray(r, dtype=float)
    return (
        r.shape == (3, 3)
        and bool(np.all(np.isfinite(r)))
        and orthogonality_defect(r) <= tol
        and np.linalg.det(r) > 0.0
    )


def project_to_so3(m) -> np.ndarray:
    """Nearest rotation to `m` in the Frobenius norm (orthogonal polar factor).

    Raises
    ------
    DegenerateMatrixError
        If `m` is non-finite or numerically rank deficient.
    """
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise DegenerateMatrixError("matrix has non-finite entries")
    u, s, vt = np.linalg.svd(m)
    if s[-1] <= TOL_DEGENERATE * max(s[0], 1.0):
        raise DegenerateMatrixError(f"matrix is singular (sigma_min={s[-1]:.3e})")
    if np.linalg.det(u @ vt) < 0.0:
        u[:, 2] = -u[:, 2]
    return u @ vt


def euler_zyx(r) -> np.ndarray:
    """Roll, pitch, yaw (rad) for ``R = Rz(yaw) Ry(pitch) Rx(roll)``.

    Accepts a single ``(3, 3)`` matrix or a stack ``(n, 3, 3)``.
    """
    r = np.asarray(r, dtype=float)
    roll = np.arctan2(r[..., 2, 1], r[..., 2, 2])
    pitch = -np.arcsin(np.clip(r[..., 2, 0], -1.0, 1.0))
    yaw = np.arctan2(r[..., 1, 0], r[..., 0, 0])
    return np.stack([roll, pitch, yaw], axis=-1)
