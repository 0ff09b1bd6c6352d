"""Dissimilarity functions g(theta_n | theta_a) and their information gradients.

Four measurement kinds are supported:

========================  =====================================================
``Kind.DISTANCE``         ``||theta_n - theta_a||``
``Kind.SQUARED_DISTANCE`` ``||theta_n - theta_a||^2``
``Kind.AOA``              ``acos(<u, b> / ||P u||)`` with ``P = I - a a^T``
``Kind.ADOA``             angle at anchor ``a`` between target ``n`` and node ``k``
========================  =====================================================

Gradients are taken with respect to the target coordinates, the translation
``t`` and ``vec(Q)``, where the target is ``theta_n = Q c_n + t``. Since
``d theta_n / d t = I``, the translation gradient equals the coordinate
gradient and the rotation gradient is ``kron_landmark(c_n) @ grad_t``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import AngleSingularity, ArgOutOfRange, DegenerateGeometry
from .geometry import Pose, kron_landmark


@dataclass(frozen=True)
class Tolerances:
    geometry: float = 1e-12
    angle: float = 1e-9
    acos_slack: float = 1e-12


DEFAULT_TOL = Tolerances()


class Kind(enum.Enum):
    DISTANCE = "distance"
    SQUARED_DISTANCE = "squared_distance"
    AOA = "aoa"
    ADOA = "adoa"


@dataclass(frozen=True)
class AoAFrame:
    """Reference frame anchored at the anchor: plane normal ``a``, in-plane reference ``b``."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(3).copy()
        b = np.asarray(self.b, dtype=float).reshape(3).copy()
        if abs(np.linalg.norm(a) - 1.0) > 1e-12 or abs(np.linalg.norm(b) - 1.0) > 1e-12:
            raise ValueError("AoA frame vectors must have unit norm")
        if abs(a @ b) > 1e-12:
            raise ValueError("AoA frame vectors must be orthogonal")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def projector(self) -> np.ndarray:
        return np.eye(3) - np.outer(self.a, self.a)


AZIMUTH = AoAFrame(a=[0.0, 0.0, 1.0], b=[1.0, 0.0, 0.0])
ELEVATION = AoAFrame(a=[0.0, 1.0, 0.0], b=[0.0, 0.0, 1.0])


@dataclass(frozen=True)
class DissimilaritySpec:
    kind: Kind
    frame: AoAFrame | None = None
    third: int | None = None

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is Kind.AOA and self.frame is None:
            raise ValueError("AoA dissimilarity needs a reference frame")
        if kind is Kind.ADOA and self.third is None:
            raise ValueError("ADoA dissimilarity needs a third node")
        if kind is not Kind.AOA and self.frame is not None:
            raise ValueError(f"{kind.value} takes no AoA frame")
        if kind is not Kind.ADOA and self.third is not None:
            raise ValueError(f"{kind.value} takes no third node")

    @property
    def is_angle(self) -> bool:
        return self.kind in (Kind.AOA, Kind.ADOA)

    @classmethod
    def distance(cls):
        return cls(Kind.DISTANCE)

    @classmethod
    def squared_distance(cls):
        return cls(Kind.SQUARED_DISTANCE)

    @classmethod
    def aoa(cls, frame: AoAFrame = AZIMUTH):
        return cls(Kind.AOA, frame=frame)

    @classmethod
    def adoa(cls, third: int):
        return cls(Kind.ADOA, third=int(third))


def _vec3(x, name):
    x = np.asarray(x, dtype=float).reshape(3)
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} must be finite")
    return x


def _checked_acos_arg(x: float, tol: Tolerances) -> float:
    if abs(x) > 1.0 + tol.acos_slack:
        raise ArgOutOfRange(f"arccos argument {x!r} outside [-1, 1]")
    return min(1.0, max(-1.0, x))


def _norm(v, what, tol):
    n = float(np.linalg.norm(v))
    if n < tol.geometry:
        raise DegenerateGeometry(f"{what} is below {tol.geometry:g}")
    return n


def _aoa_parts(spec, u, tol):
    P = spec.frame.projector
    Pu = P @ u
    npu = _norm(Pu, "projection of d_na onto the AoA plane", tol)
    x = _checked_acos_arg(float(u @ spec.frame.b) / npu, tol)
    return x, Pu, npu


def _adoa_parts(theta_n, theta_a, theta_k, tol):
    if theta_k is None:
        raise ValueError("ADoA needs the third node position")
    u = theta_n - theta_a
    v = theta_n - theta_k
    d_na = _norm(u, "d_na", tol)
    d_nk = _norm(v, "d_nk", tol)
    d_ka = _norm(theta_k - theta_a, "d_ka", tol)
    # law of cosines at the anchor
    x = (d_na**2 + d_ka**2 - d_nk**2) / (2.0 * d_na * d_ka)
    return _checked_acos_arg(x, tol), u, v, d_na, d_ka


def eval_g(spec: DissimilaritySpec, theta_n, theta_a, theta_k=None, tol: Tolerances = DEFAULT_TOL) -> float:
    """Evaluate the noise-free dissimilarity between a target and an anchor."""
    theta_n = _vec3(theta_n, "theta_n")
    theta_a = _vec3(theta_a, "theta_a")
    u = theta_n - theta_a
    kind = spec.kind
    if kind is Kind.DISTANCE:
        return _norm(u, "d_na", tol)
    if kind is Kind.SQUARED_DISTANCE:
        return _norm(u, "d_na", tol) ** 2
    if kind is Kind.AOA:
        _norm(u, "d_na", tol)
        x, _, _ = _aoa_parts(spec, u, tol)
        return math.acos(x)
    x, *_ = _adoa_parts(theta_n, theta_a, None if theta_k is None else _vec3(theta_k, "theta_k"), tol)
    return math.acos(x)


def _arccos_factor(x, tol):
    if abs(x) >= 1.0 - tol.angle:
        raise AngleSingularity(f"|x| = {abs(x):.17g} within {tol.angle:g} of 1; arccos derivative unbounded")
    return -1.0 / math.sqrt(1.0 - x * x)


def grad_coords(spec: DissimilaritySpec, theta_n, theta_a, theta_k=None, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Gradient of ``g`` with respect to the target position ``theta_n``."""
    theta_n = _vec3(theta_n, "theta_n")
    theta_a = _vec3(theta_a, "theta_a")
    u = theta_n - theta_a
    kind = spec.kind
    if kind is Kind.DISTANCE:
        return u / _norm(u, "d_na", tol)
    if kind is Kind.SQUARED_DISTANCE:
        _norm(u, "d_na", tol)
        return 2.0 * u
    if kind is Kind.AOA:
        _norm(u, "d_na", tol)
        x, Pu, npu = _aoa_parts(spec, u, tol)
        b = spec.frame.b
        w = (npu**2 * b - (u @ b) * Pu) / npu**3
        return _arccos_factor(x, tol) * w

    theta_k = None if theta_k is None else _vec3(theta_k, "theta_k")
    x, u, v, d_na, d = _adoa_parts(theta_n, theta_a, theta_k, tol)
    if np.linalg.norm(np.cross(v, u)) <= tol.geometry:
        raise DegenerateGeometry("ADoA triple is collinear")
    factor = _arccos_factor(x, tol)
    w = (
        u / (2.0 * d_na * d)
        - u * d / (2.0 * d_na**3)
        + (v @ v) * u / (2.0 * d_na**3 * d)
        - v / (d_na * d)
    )
    return factor * w


def grad_translation(spec, pose: Pose, c_n, theta_a, theta_k=None, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Gradient of ``g(Q c_n + t | theta_a)`` with respect to ``t``."""
    theta_n = pose.rotation @ _vec3(c_n, "c_n") + pose.translation
    return grad_coords(spec, theta_n, theta_a, theta_k, tol)


def grad_rotation(spec, pose: Pose, c_n, theta_a, theta_k=None, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Gradient of ``g(Q c_n + t | theta_a)`` with respect to ``vec(Q)`` (length 9)."""
    return kron_landmark(c_n) @ grad_translation(spec, pose, c_n, theta_a, theta_k, tol)
