"""Cramer-Rao bounds for translation and rotation, exact, approximate and constrained.

Scalar bounds are per-entry averages: ``tr(F^-1) / dim``. The inversion-free
approximation ``dim / tr(F)`` follows from the AM-HM inequality on the
eigenvalues of ``F`` and is never larger than the exact value.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import SingularFIM, SingularProjectedFIM, ZeroTrace
from .fim import FisherMatrix
from .geometry import as_rotation

log = logging.getLogger(__name__)

COND_LIMIT = 1e12
CCRB_DIVISOR = 9


class RankDeficientWarning(RuntimeWarning):
    pass


def _matrix(F) -> np.ndarray:
    F = F.matrix if isinstance(F, FisherMatrix) else np.asarray(F, dtype=float)
    if F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {F.shape}")
    return 0.5 * (F + F.T)


def condition_number(F) -> float:
    w = np.linalg.eigvalsh(_matrix(F))
    if w[-1] <= 0:
        return np.inf
    return float(w[-1] / w[0]) if w[0] > 0 else np.inf


@dataclass(frozen=True)
class InverseTrace:
    trace: float
    rank: int
    cond: float
    pseudo: bool


def inverse_trace(F, min_rank: int | None = None) -> InverseTrace:
    """``tr(F^-1)`` via Cholesky; pseudo-inverse when ``min_rank <= rank < dim``.

    Eigenvalues below ``lambda_max / 1e12`` count as zero. Raises
    :class:`SingularFIM` (with the null-space basis) when the rank is below
    ``min_rank`` (default: full rank required).
    """
    F = _matrix(F)
    n = F.shape[0]
    min_rank = n if min_rank is None else min_rank
    w, V = np.linalg.eigh(F)
    top = w[-1]
    keep = w > top / COND_LIMIT if top > 0 else np.zeros(n, dtype=bool)
    rank = int(keep.sum())
    cond = float(top / w[0]) if rank == n else np.inf
    if rank == n:
        c = cho_factor(F, lower=True)
        tr = float(np.trace(cho_solve(c, np.eye(n))))
        log.debug("inverted %dx%d FIM, cond=%.3g", n, n, cond)
        return InverseTrace(tr, rank, cond, False)
    if rank < min_rank:
        raise SingularFIM(f"FIM has rank {rank} < {min_rank}", null_space=V[:, ~keep])
    warnings.warn(f"FIM rank {rank} < {n}; bound restricted to the observable subspace",
                  RankDeficientWarning, stacklevel=3)
    return InverseTrace(float(np.sum(1.0 / w[keep])), rank, cond, True)


def crlb_translation(F_t) -> float:
    """Average translation bound ``tr(F_t^-1) / 3`` (m^2 per coordinate)."""
    F = _matrix(F_t)
    return inverse_trace(F).trace / F.shape[0]


def _approx(F) -> float:
    F = _matrix(F)
    tr = float(np.trace(F))
    if tr <= 0:
        raise ZeroTrace("FIM trace is not positive")
    return F.shape[0] / tr


def crlb_translation_approx(F_t) -> float:
    """Inversion-free estimate ``3 / tr(F_t)``; a lower estimate of :func:`crlb_translation`."""
    return _approx(F_t)


def crlb_rotation(F_Q) -> float:
    """Average rotation bound ``tr(F_Q^-1) / 9``.

    Falls back to the pseudo-inverse (with a :class:`RankDeficientWarning`)
    when ``3 <= rank < 9``.
    """
    F = _matrix(F_Q)
    return inverse_trace(F, min_rank=3).trace / F.shape[0]


def crlb_rotation_approx(F_Q) -> float:
    return _approx(F_Q)


def constraint_vector(Q) -> np.ndarray:
    """Orthonormality violations of the columns ``q1, q2, q3`` of ``Q``."""
    Q = np.asarray(Q, dtype=float)
    q1, q2, q3 = Q[:, 0], Q[:, 1], Q[:, 2]
    return np.array([q1 @ q1 - 1.0, q2 @ q1, q3 @ q1, q2 @ q2 - 1.0, q2 @ q3, q3 @ q3 - 1.0])


def constraint_jacobian(Q) -> np.ndarray:
    """6 x 9 Jacobian of :func:`constraint_vector` with respect to ``vec(Q)``."""
    Q = np.asarray(Q, dtype=float)
    q1, q2, q3 = Q[:, 0], Q[:, 1], Q[:, 2]
    z = np.zeros(3)
    return np.array(
        [
            np.concatenate([2 * q1, z, z]),
            np.concatenate([q2, q1, z]),
            np.concatenate([q3, z, q1]),
            np.concatenate([z, 2 * q2, z]),
            np.concatenate([z, q3, q2]),
            np.concatenate([z, z, 2 * q3]),
        ]
    )


def constraint_matrix(Q) -> np.ndarray:
    """9 x 3 basis of the tangent space of SO(3) at ``Q`` in ``vec`` coordinates."""
    Q = as_rotation(Q)
    q1, q2, q3 = Q[:, 0], Q[:, 1], Q[:, 2]
    z = np.zeros(3)
    return np.block(
        [
            [-q3[:, None], z[:, None], q2[:, None]],
            [z[:, None], -q3[:, None], -q1[:, None]],
            [q1[:, None], q2[:, None], z[:, None]],
        ]
    )


def constrained_crlb_rotation(F_Q, Q) -> tuple[np.ndarray, float]:
    """Constrained bound ``M (M^T F_Q M)^-1 M^T`` and its trace divided by 9."""
    F = _matrix(F_Q)
    M = constraint_matrix(Q)
    P = M.T @ F @ M
    P = 0.5 * (P + P.T)
    w = np.linalg.eigvalsh(P)
    if w[-1] <= 0 or w[0] <= w[-1] / COND_LIMIT:
        raise SingularProjectedFIM("no information along some tangent direction of SO(3)")
    bound = M @ cho_solve(cho_factor(P, lower=True), M.T)
    bound = 0.5 * (bound + bound.T)
    return bound, float(np.trace(bound)) / CCRB_DIVISOR


@dataclass
class BoundReport:
    crlb_t: float
    crlb_t_approx: float
    crlb_Q: float
    crlb_Q_approx: float
    ccrb_Q: float
    cond_Ft: float
    cond_FQ: float
    rank_FQ: int = 9
    ccrb_divisor: int = CCRB_DIVISOR
    flags: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "crlb_t": self.crlb_t,
            "crlb_t_approx": self.crlb_t_approx,
            "crlb_Q": self.crlb_Q,
            "crlb_Q_approx": self.crlb_Q_approx,
            "ccrb_Q": self.ccrb_Q,
            "cond_Ft": self.cond_Ft,
            "cond_FQ": self.cond_FQ,
            "rank_FQ": self.rank_FQ,
            "ccrb_divisor": self.ccrb_divisor,
            "flags": list(self.flags),
        }


def bound_report(F_t, F_Q, Q) -> BoundReport:
    """All scalar bounds for one scenario; problems are recorded as flags, not raised."""
    F_t, F_Q = _matrix(F_t), _matrix(F_Q)
    flags = []
    nan = float("nan")

    try:
        t_inv = inverse_trace(F_t)
        crlb_t, cond_t = t_inv.trace / 3, t_inv.cond
    except SingularFIM:
        crlb_t, cond_t = nan, np.inf
        flags.append("singular_Ft")
    try:
        crlb_t_approx = _approx(F_t)
    except ZeroTrace:
        crlb_t_approx = nan
        flags.append("zero_trace_Ft")

    rank_q = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficientWarning)
        try:
            q_inv = inverse_trace(F_Q, min_rank=3)
            crlb_q, cond_q, rank_q = q_inv.trace / 9, q_inv.cond, q_inv.rank
            if q_inv.pseudo:
                flags.append(f"pinv_FQ_rank{q_inv.rank}")
        except SingularFIM:
            crlb_q, cond_q = nan, np.inf
            flags.append("singular_FQ")
    try:
        crlb_q_approx = _approx(F_Q)
    except ZeroTrace:
        crlb_q_approx = nan
        flags.append("zero_trace_FQ")
    try:
        _, ccrb = constrained_crlb_rotation(F_Q, Q)
    except SingularProjectedFIM:
        ccrb = nan
        flags.append("singular_MtFM")
    return BoundReport(crlb_t, crlb_t_approx, crlb_q, crlb_q_approx, ccrb, cond_t, cond_q, rank_q, flags=flags)
