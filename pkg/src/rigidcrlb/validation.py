"""Numerical self-checks: finite-difference gradients, FIM oracle, intensity MC.

These are the building blocks of ``rigidcrlb validate`` and of the test
suite. Each check returns a small record with the worst observed error so
callers can decide how to report it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dissimilarity import AZIMUTH, ELEVATION, DissimilaritySpec, Kind, eval_g, grad_coords
from .fim import Parameter, assemble, mc_fim_oracle
from .geometry import Pose, kron_landmark, random_rotation, unvec, vec
from .intensity import mc_fisher

FD_STEP = 1e-6
FD_RTOL = 1e-5


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}  (worst {self.worst:.3g}{'; ' + self.detail if self.detail else ''})"


# ---------------------------------------------------------------------------
# gradients

def random_configuration(kind: Kind, rng: np.random.Generator, box: float = 10.0):
    """A random non-degenerate ``(spec, pose, c_n, theta_a, theta_k)`` for one measurement kind.

    Configurations closer than 0.5 m, or with an arccos argument beyond
    0.95 in magnitude, are rejected and redrawn.
    """
    kind = Kind(kind)
    while True:
        pose = Pose(random_rotation(rng), rng.uniform(-box, box, 3))
        c_n = rng.uniform(-1.0, 1.0, 3)
        theta_a = rng.uniform(-box, box, 3)
        theta_k = rng.uniform(-box, box, 3) if kind is Kind.ADOA else None
        theta_n = pose.rotation @ c_n + pose.translation
        if np.linalg.norm(theta_n - theta_a) < 0.5:
            continue
        if kind is Kind.AOA:
            spec = DissimilaritySpec.aoa(AZIMUTH if rng.random() < 0.5 else ELEVATION)
        elif kind is Kind.ADOA:
            if min(np.linalg.norm(theta_n - theta_k), np.linalg.norm(theta_k - theta_a)) < 0.5:
                continue
            spec = DissimilaritySpec.adoa(1)
        else:
            spec = DissimilaritySpec(kind)
        if spec.is_angle:
            g = eval_g(spec, theta_n, theta_a, theta_k)
            if abs(math.cos(g)) > 0.95:
                continue
        return spec, pose, c_n, theta_a, theta_k


def _g_of(spec, Q, t, c_n, theta_a, theta_k):
    return eval_g(spec, Q @ c_n + t, theta_a, theta_k)


def fd_gradients(spec, pose: Pose, c_n, theta_a, theta_k=None, step: float = FD_STEP):
    """Central-difference gradients with respect to ``t`` (3) and ``vec(Q)`` (9)."""
    Q, t = pose.rotation, pose.translation
    gt = np.empty(3)
    for j in range(3):
        e = np.zeros(3)
        e[j] = step
        gt[j] = (_g_of(spec, Q, t + e, c_n, theta_a, theta_k) - _g_of(spec, Q, t - e, c_n, theta_a, theta_k)) / (2 * step)
    q = vec(Q)
    gq = np.empty(9)
    for j in range(9):
        e = np.zeros(9)
        e[j] = step
        gq[j] = (_g_of(spec, unvec(q + e), t, c_n, theta_a, theta_k)
                 - _g_of(spec, unvec(q - e), t, c_n, theta_a, theta_k)) / (2 * step)
    return gt, gq


def _rel(a, b) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def gradient_suite(kind: Kind, n: int, rng: np.random.Generator, rtol: float = FD_RTOL) -> tuple[CheckResult, CheckResult]:
    """Compare analytic translation and rotation gradients with finite differences on ``n`` configurations."""
    kind = Kind(kind)
    worst_t = worst_q = 0.0
    for _ in range(n):
        spec, pose, c_n, theta_a, theta_k = random_configuration(kind, rng)
        grad = grad_coords(spec, pose.rotation @ c_n + pose.translation, theta_a, theta_k)
        fd_t, fd_q = fd_gradients(spec, pose, c_n, theta_a, theta_k)
        worst_t = max(worst_t, _rel(grad, fd_t))
        worst_q = max(worst_q, _rel(kron_landmark(c_n) @ grad, fd_q))
    return (
        CheckResult(f"gradient {kind.value} / t ({n} configs)", worst_t <= rtol, worst_t),
        CheckResult(f"gradient {kind.value} / vec(Q) ({n} configs)", worst_q <= rtol, worst_q),
    )


# ---------------------------------------------------------------------------
# FIM

def fim_oracle_check(scenario, parameter: Parameter, n_trials: int = 10**5, seed: int = 0,
                     n_se: float = 3.0, workers: int = 1) -> CheckResult:
    """Information-centric FIM against the score-outer-product Monte Carlo estimate.

    ``worst`` is the largest ``|F_analytic - F_mc| / SE`` over the upper triangle.
    """
    parameter = Parameter(parameter)
    F = assemble(scenario, parameter).matrix
    est = mc_fim_oracle(scenario, parameter, n_trials=n_trials, seed=seed, workers=workers)
    iu = np.triu_indices(F.shape[0])
    diff = np.abs(F - est.mean)[iu]
    se = est.stderr[iu]
    # entries that are structurally zero have zero spread; allow round-off there
    z = np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff < 1e-9 * max(1.0, np.abs(F).max()), 0.0, np.inf))
    worst = float(z.max())
    return CheckResult(f"FIM {parameter.value} vs Monte Carlo ({n_trials} trials)", worst <= n_se, worst, f"limit {n_se} SE")


# ---------------------------------------------------------------------------
# intensities

def intensity_check(model, g: float, n_samples: int = 10**6, seed: int = 0, n_se: float = 3.0,
                    expected: float | None = None) -> CheckResult:
    """Monte Carlo Fisher information against ``expected`` (default: ``model.fisher(g)``)."""
    rng = np.random.default_rng(seed)
    est = mc_fisher(model, g, n_samples=n_samples, rng=rng)
    target = float(model.fisher(g)) if expected is None else float(expected)
    z = abs(est.value - target) / est.stderr
    return CheckResult(
        f"intensity {model!r} at g={g:g}", z <= n_se, z,
        f"MC {est.value:.6g} +- {est.stderr:.2g}, expected {target:.6g}",
    )

