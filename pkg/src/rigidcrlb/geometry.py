"""Rigid-body representation: Euler rotations, poses and vec/Kronecker helpers.

Conventions
-----------
* Rotations are built as ``Rz(gamma) @ Ry(beta) @ Rx(alpha)``.
* ``vec`` stacks columns, so that ``vec(Q @ c) == kron_landmark(c).T @ vec(Q)``.
* Conformations are ``3 x N`` arrays whose columns are landmark positions.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NotRotation

SO3_TOL = 1e-9
GIMBAL_TOL = 1e-12


class GimbalLockWarning(RuntimeWarning):
    pass


def _wrap(angle: float) -> float:
    """Map an angle to the canonical range (-pi, pi]."""
    a = math.remainder(angle, 2.0 * math.pi)
    return math.pi if a <= -math.pi else a


@dataclass(frozen=True)
class EulerAngles:
    """Roll ``alpha`` (about x), pitch ``beta`` (about y), yaw ``gamma`` (about z), radians."""

    alpha: float
    beta: float
    gamma: float
    gimbal_lock: bool = field(default=False, compare=False)

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.gamma)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"Euler angles must be finite, got {vals}")

    @classmethod
    def from_degrees(cls, alpha, beta, gamma) -> "EulerAngles":
        return cls(math.radians(alpha), math.radians(beta), math.radians(gamma))

    def degrees(self) -> tuple[float, float, float]:
        return (math.degrees(self.alpha), math.degrees(self.beta), math.degrees(self.gamma))

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma])


def rot_x(alpha: float) -> np.ndarray:
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(beta: float) -> np.ndarray:
    c, s = math.cos(beta), math.sin(beta)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(gamma: float) -> np.ndarray:
    c, s = math.cos(gamma), math.sin(gamma)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_from_euler(angles: EulerAngles) -> np.ndarray:
    """Rotation matrix ``Rz(gamma) Ry(beta) Rx(alpha)`` written out entry by entry."""
    ca, sa = math.cos(angles.alpha), math.sin(angles.alpha)
    cb, sb = math.cos(angles.beta), math.sin(angles.beta)
    cg, sg = math.cos(angles.gamma), math.sin(angles.gamma)
    return np.array(
        [
            [cb * cg, sa * sb * cg - ca * sg, ca * sb * cg + sa * sg],
            [cb * sg, sa * sb * sg + ca * cg, ca * sb * sg - sa * cg],
            [-sb, sa * cb, ca * cb],
        ]
    )


def euler_from_rotation(Q: np.ndarray) -> EulerAngles:
    """Invert :func:`rotation_from_euler`.

    At gimbal lock (``|q31| >= 1 - 1e-12``) roll is fixed to zero, the
    returned angles carry ``gimbal_lock=True`` and a
    :class:`GimbalLockWarning` is emitted.
    """
    Q = as_rotation(Q)
    q31 = Q[2, 0]
    if abs(q31) >= 1.0 - GIMBAL_TOL:
        beta = math.copysign(math.pi / 2.0, -q31)
        gamma = math.atan2(-Q[0, 1], Q[1, 1])
        warnings.warn("gimbal lock: roll fixed to 0", GimbalLockWarning, stacklevel=2)
        return EulerAngles(0.0, beta, _wrap(gamma), gimbal_lock=True)
    alpha = math.atan2(Q[2, 1], Q[2, 2])
    beta = math.atan2(-q31, math.hypot(Q[0, 0], Q[1, 0]))
    gamma = math.atan2(Q[1, 0], Q[0, 0])
    return EulerAngles(_wrap(alpha), beta, _wrap(gamma))


def is_so3(Q, tol: float = SO3_TOL) -> bool:
    """True iff ``||Q^T Q - I||_F <= tol`` and ``|det Q - 1| <= tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (3, 3) or not np.all(np.isfinite(Q)):
        return False
    ortho = np.linalg.norm(Q.T @ Q - np.eye(3))
    return bool(ortho <= tol and abs(np.linalg.det(Q) - 1.0) <= tol)


def as_rotation(Q, tol: float = SO3_TOL) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    if not is_so3(Q, tol):
        raise NotRotation(f"matrix is not in SO(3) within {tol:g}")
    return Q


def as_conformation(C) -> np.ndarray:
    C = np.asarray(C, dtype=float)
    if C.ndim == 1 and C.shape[0] == 3:
        C = C.reshape(3, 1)
    if C.ndim != 2 or C.shape[0] != 3 or C.shape[1] < 1:
        raise ValueError(f"conformation must be 3 x N with N >= 1, got shape {C.shape}")
    if not np.all(np.isfinite(C)):
        raise ValueError("conformation has non-finite entries")
    return C


@dataclass(frozen=True)
class Pose:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = as_rotation(self.rotation).copy()
        t = np.asarray(self.translation, dtype=float).reshape(3).copy()
        rot.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", t)

    @classmethod
    def from_euler(cls, angles: EulerAngles, translation) -> "Pose":
        return cls(rotation_from_euler(angles), translation)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.eye(3), np.zeros(3))


def apply_pose(pose: Pose, C) -> np.ndarray:
    """Transformed landmarks ``Q @ C + t 1^T``."""
    C = as_conformation(C)
    return pose.rotation @ C + pose.translation[:, None]


def vec(A: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(A).reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int = 3) -> np.ndarray:
    return np.asarray(v).reshape(rows, -1, order="F")


def kron_landmark(c) -> np.ndarray:
    """``c (x) I_3`` as a 9 x 3 matrix.

    Maps a gradient with respect to a landmark position onto a gradient with
    respect to ``vec(Q)``; its transpose maps ``vec(Q)`` to ``Q @ c``.
    """
    c = np.asarray(c, dtype=float).reshape(3, 1)
    if not np.all(np.isfinite(c)):
        raise ValueError("landmark must be finite")
    return np.kron(c, np.eye(3))


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform rotation via QR of a Gaussian matrix."""
    A = rng.standard_normal((3, 3))
    q, r = np.linalg.qr(A)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
