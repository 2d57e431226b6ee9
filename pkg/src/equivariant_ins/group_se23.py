"""SE_2(3), its automorphism group SIM_2(3), and the synchronous observer error.

Elements are stored component-wise. ``matrix()`` gives the 5x5 embedding and
exists mainly so tests can check the closed forms against plain matrix
products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import TOL_ORTH, TOL_SINGULAR_SCALE
from .errors import SingularScaleError
from .lie_core import hat, is_rotation, vee


def _frozen(a, shape) -> np.ndarray:
    a = np.array(a, dtype=float)
    if a.shape != shape:
        raise ValueError(f"expected shape {shape}, got {a.shape}")
    a.setflags(write=False)
    return a


def mat2_inv(a) -> np.ndarray:
    """Inverse of a 2x2 matrix from its adjugate."""
    a = np.asarray(a, dtype=float)
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if not abs(det) > TOL_SINGULAR_SCALE:
        raise SingularScaleError(f"scale block is singular (det={det:.3e})")
    return np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]]) / det


@dataclass(frozen=True, eq=False)
class ExtendedPose:
    """Element ``(R, W)`` of SE_2(3) with ``W = (v p)``."""

    r: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r", _frozen(self.r, (3, 3)))
        object.__setattr__(self, "w", _frozen(self.w, (3, 2)))

    @classmethod
    def identity(cls) -> ExtendedPose:
        return cls(np.eye(3), np.zeros((3, 2)))

    @classmethod
    def from_rvp(cls, r, v, p) -> ExtendedPose:
        return cls(r, np.column_stack([v, p]))

    @classmethod
    def from_matrix(cls, m, tol: float = TOL_ORTH) -> ExtendedPose:
        """Checked inverse of :meth:`matrix`."""
        m = np.asarray(m, dtype=float)
        if m.shape != (5, 5):
            raise ValueError(f"expected a 5x5 matrix, got {m.shape}")
        bottom = np.hstack([np.zeros((2, 3)), np.eye(2)])
        if np.max(np.abs(m[3:] - bottom)) > tol:
            raise ValueError("bottom block is not (0 I_2)")
        if not is_rotation(m[:3, :3], tol):
            raise ValueError("upper-left block is not a rotation")
        return cls(m[:3, :3], m[:3, 3:])

    @property
    def v(self) -> np.ndarray:
        return self.w[:, 0]

    @property
    def p(self) -> np.ndarray:
        return self.w[:, 1]

    def matrix(self) -> np.ndarray:
        m = np.eye(5)
        m[:3, :3] = self.r
        m[:3, 3:] = self.w
        return m

    def is_valid(self, tol: float = TOL_ORTH) -> bool:
        return is_rotation(self.r, tol) and bool(np.all(np.isfinite(self.w)))

    def __matmul__(self, other: ExtendedPose) -> ExtendedPose:
        return se23_compose(self, other)


@dataclass(frozen=True, eq=False)
class Se23Tangent:
    """Lie algebra element ``(omega, W)`` of se_2(3)."""

    omega: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omega", _frozen(self.omega, (3,)))
        object.__setattr__(self, "w", _frozen(self.w, (3, 2)))

    def matrix(self) -> np.ndarray:
        m = np.zeros((5, 5))
        m[:3, :3] = hat(self.omega)
        m[:3, 3:] = self.w
        return m


@dataclass(frozen=True, eq=False)
class SimGroupElement:
    """Element ``(R, W, A)`` of SIM_2(3)."""

    r: np.ndarray
    w: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r", _frozen(self.r, (3, 3)))
        object.__setattr__(self, "w", _frozen(self.w, (3, 2)))
        object.__setattr__(self, "a", _frozen(self.a, (2, 2)))
        if not abs(np.linalg.det(self.a)) > TOL_SINGULAR_SCALE:
            raise SingularScaleError("scale block is singular")

    @classmethod
    def identity(cls) -> SimGroupElement:
        return cls(np.eye(3), np.zeros((3, 2)), np.eye(2))

    @classmethod
    def from_translation(cls, wz) -> SimGroupElement:
        """Reduced auxiliary element ``(I_3, W_Z, I_2)``."""
        return cls(np.eye(3), wz, np.eye(2))

    def matrix(self) -> np.ndarray:
        m = np.zeros((5, 5))
        m[:3, :3] = self.r
        m[:3, 3:] = self.w
        m[3:, 3:] = self.a
        return m


@dataclass(frozen=True, eq=False)
class SimTangent:
    """Lie algebra element ``(omega, W, S)`` of sim_2(3)."""

    omega: np.ndarray
    w: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omega", _frozen(self.omega, (3,)))
        object.__setattr__(self, "w", _frozen(self.w, (3, 2)))
        object.__setattr__(self, "s", _frozen(self.s, (2, 2)))

    def matrix(self) -> np.ndarray:
        m = np.zeros((5, 5))
        m[:3, :3] = hat(self.omega)
        m[:3, 3:] = self.w
        m[3:, 3:] = self.s
        return m


def se23_compose(x: ExtendedPose, y: ExtendedPose) -> ExtendedPose:
    return ExtendedPose(x.r @ y.r, x.r @ y.w + x.w)


def se23_inverse(x: ExtendedPose) -> ExtendedPose:
    rt = x.r.T
    return ExtendedPose(rt, -rt @ x.w)


def sim23_compose(z1: SimGroupElement, z2: SimGroupElement) -> SimGroupElement:
    return SimGroupElement(z1.r @ z2.r, z1.r @ z2.w + z1.w @ z2.a, z1.a @ z2.a)


def sim23_inverse(z: SimGroupElement) -> SimGroupElement:
    a_inv = mat2_inv(z.a)
    rt = z.r.T
    return SimGroupElement(rt, -rt @ z.w @ a_inv, a_inv)


def conjugate(z: SimGroupElement, x: ExtendedPose) -> ExtendedPose:
    """Automorphism ``sigma_Z(X) = Z X Z^{-1}`` in closed form."""
    a_inv = mat2_inv(z.a)
    r = z.r @ x.r @ z.r.T
    w = z.r @ x.w @ a_inv + (np.eye(3) - r) @ z.w @ a_inv
    return ExtendedPose(r, w)


def conjugate_inverse(z: SimGroupElement, x: ExtendedPose) -> ExtendedPose:
    """``sigma_Z^{-1}(X) = Z^{-1} X Z``."""
    return conjugate(sim23_inverse(z), x)


def bracket_sim_se23(g: SimTangent, x: ExtendedPose) -> np.ndarray:
    """Commutator ``Gamma X - X Gamma`` as a 5x5 matrix.

    The result is tangent to SE_2(3) at `x`: its bottom two rows vanish.
    """
    gm = g.matrix()
    xm = x.matrix()
    return gm @ xm - xm @ gm


def observer_error(x: ExtendedPose, xhat: ExtendedPose, wz) -> ExtendedPose:
    """Synchronous error ``Z^{-1} X Xhat^{-1} Z`` for ``Z = (I_3, W_Z, I_2)``."""
    wz = np.asarray(wz, dtype=float)
    r_e = x.r @ xhat.r.T
    w_e = (x.w - r_e @ xhat.w) - (np.eye(3) - r_e) @ wz
    return ExtendedPose(r_e, w_e)


def tangent_vee(m) -> Se23Tangent:
    """Read a 5x5 se_2(3) matrix back into components."""
    m = np.asarray(m, dtype=float)
    return Se23Tangent(vee(m[:3, :3]), m[:3, 3:])
