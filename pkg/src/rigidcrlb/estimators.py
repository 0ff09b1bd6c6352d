"""Reference pose estimators and the Monte Carlo harness that measures their MSE.

Estimator chains
----------------
``procrustes``  classical MDS on the completed distance matrix, then an
                SO(3)-constrained Procrustes fit of the target conformation
``ls``          the same MDS positions, then an unconstrained affine
                least-squares fit (the rotation estimate is a general matrix)
``nls``         Gauss-Newton on the pose manifold using every edge, started
                from the true pose perturbed at the noise scale; works on
                incomplete graphs and any measurement kind (idealized)

Reported errors are normalized like the bounds: ``mse_t`` is the mean of
``||t_hat - t||^2 / 3`` and ``mse_Q`` the mean of ``||Q_hat - Q||_F^2 / 9``.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .bounds import BoundReport, bound_report
from .dissimilarity import Kind, eval_g, grad_coords
from .errors import AngleSingularity, DegenerateConformation, DegenerateGeometry, RankDeficient, RigidBoundError
from .fim import chunk_rng, edge_weights, fim_rotation, fim_translation, seed_of
from .geometry import Pose
from .scenario import Scenario

log = logging.getLogger(__name__)

ESTIMATORS = ("procrustes", "ls", "nls")
MC_CHUNK = 256


def true_dissimilarities(scenario: Scenario) -> np.ndarray:
    return np.array([eval_g(e.spec, *scenario.edge_nodes(e), tol=scenario.tol) for e in scenario.edges])


def simulate_measurements(scenario: Scenario, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw independent measurements for every edge (shape ``(E,)`` or ``(size, E)``)."""
    g = true_dissimilarities(scenario)
    shape = (len(g),) if size is None else (size, len(g))
    r = np.empty(shape)
    for i, e in enumerate(scenario.edges):
        r[..., i] = e.noise.sample(g[i], rng, size=size)
    return r


def _pairwise(X: np.ndarray) -> np.ndarray:
    diff = X[:, :, None] - X[:, None, :]
    return np.sqrt(np.einsum("kij,kij->ij", diff, diff))


def distance_matrix(scenario: Scenario, r: np.ndarray) -> np.ndarray:
    """Completed ``N x N`` distance matrix, targets first then anchors.

    Target-anchor entries come from the range measurements (averaged when a
    pair is measured more than once); the target block is the known body
    shape and the anchor block the known anchor layout.
    """
    n_t, n_a = scenario.n_targets, scenario.n_anchors
    total = np.zeros((n_t, n_a))
    count = np.zeros((n_t, n_a))
    for e, val in zip(scenario.edges, r):
        if e.spec.kind is Kind.DISTANCE:
            total[e.target, e.anchor] += val
        elif e.spec.kind is Kind.SQUARED_DISTANCE:
            total[e.target, e.anchor] += math.sqrt(max(val, 0.0))
        else:
            continue
        count[e.target, e.anchor] += 1
    if np.any(count == 0):
        raise RankDeficient("MDS needs a range measurement for every target-anchor pair")
    D = np.empty((n_t + n_a, n_t + n_a))
    D[:n_t, :n_t] = _pairwise(scenario.target_conformation)
    D[n_t:, n_t:] = _pairwise(scenario.anchors)
    D[:n_t, n_t:] = total / count
    D[n_t:, :n_t] = D[:n_t, n_t:].T
    return D


def classical_mds(D: np.ndarray, dim: int = 3) -> np.ndarray:
    """Coordinates (``dim x N``) from a distance matrix by double centering."""
    n = D.shape[0]
    J = np.eye(n) - 1.0 / n
    B = -0.5 * J @ (D * D) @ J
    w, V = np.linalg.eigh(B)
    w, V = w[::-1][:dim], V[:, ::-1][:, :dim]
    return (V * np.sqrt(np.maximum(w, 0.0))).T


def mds_positions(D, anchors) -> np.ndarray:
    """Target coordinates in the anchor frame from a completed distance matrix.

    ``D`` lists targets first and the ``n_A`` anchors last. The MDS
    configuration is mapped onto the known anchors by an orthogonal
    (reflection-allowing) Procrustes alignment plus translation.
    """
    D = np.asarray(D, dtype=float)
    anchors = np.asarray(anchors, dtype=float)
    n_a = anchors.shape[1]
    centered = anchors - anchors.mean(axis=1, keepdims=True)
    if n_a < 4 or np.linalg.matrix_rank(centered, tol=1e-9 * max(1.0, np.abs(centered).max())) < 3:
        raise RankDeficient("MDS alignment needs at least 4 non-coplanar anchors")
    Y = classical_mds(D)
    Y_t, Y_a = Y[:, :-n_a], Y[:, -n_a:]
    mu_y = Y_a.mean(axis=1, keepdims=True)
    mu_a = anchors.mean(axis=1, keepdims=True)
    U, _, Vt = np.linalg.svd(centered @ (Y_a - mu_y).T)
    R = U @ Vt
    return R @ (Y_t - mu_y) + mu_a


def procrustes_fit(theta_hat, C) -> Pose:
    """Rigid pose minimizing ``||theta_hat - Q C - t 1^T||_F`` over SO(3)."""
    theta_hat = np.asarray(theta_hat, dtype=float)
    C = np.asarray(C, dtype=float)
    mu_x, mu_c = theta_hat.mean(axis=1), C.mean(axis=1)
    Cc = C - mu_c[:, None]
    sv = np.linalg.svd(Cc, compute_uv=False)
    if C.shape[1] < 3 or sv[1] <= 1e-12 * max(sv[0], 1.0):
        raise DegenerateConformation("landmarks are collinear; rotation about their line is unobservable")
    U, _, Vt = np.linalg.svd((theta_hat - mu_x[:, None]) @ Cc.T)
    d = np.sign(np.linalg.det(U @ Vt))
    Q = U @ np.diag([1.0, 1.0, d]) @ Vt
    return Pose(Q, mu_x - Q @ mu_c)


def unconstrained_ls_fit(theta_hat, C) -> tuple[np.ndarray, np.ndarray]:
    """Affine fit ``theta_hat ~ A C + t 1^T`` without any constraint on ``A``."""
    theta_hat = np.asarray(theta_hat, dtype=float)
    C = np.asarray(C, dtype=float)
    mu_x, mu_c = theta_hat.mean(axis=1), C.mean(axis=1)
    Cc = C - mu_c[:, None]
    if C.shape[1] < 4 or np.linalg.matrix_rank(Cc) < 3:
        raise RankDeficient("unconstrained fit needs >= 4 landmarks spanning 3-D")
    A = np.linalg.solve(Cc @ Cc.T, Cc @ (theta_hat - mu_x[:, None]).T).T
    return A, mu_x - A @ mu_c


def _wrap(x):
    return (x + np.pi) % (2.0 * np.pi) - np.pi


def _aoa_batch(u, B, P, tol):
    """Vectorized AoA values and coordinate gradients (rows of ``u`` are ``theta_n - theta_a``)."""
    Pu = np.einsum("eij,ej->ei", P, u)
    npu = np.linalg.norm(Pu, axis=1)
    if np.any(npu < tol.geometry):
        raise DegenerateGeometry("projection of d_na onto the AoA plane vanished")
    ub = np.einsum("ei,ei->e", u, B)
    x = ub / npu
    if np.any(np.abs(x) >= 1.0 - tol.angle):
        raise AngleSingularity("AoA argument too close to +-1 during the fit")
    w = (npu[:, None] ** 2 * B - ub[:, None] * Pu) / npu[:, None] ** 3
    return np.arccos(x), -w / np.sqrt(1.0 - x * x)[:, None]


def nls_fit(scenario: Scenario, r: np.ndarray, init: Pose, max_iter: int = 30, xtol: float = 1e-9,
            weights: np.ndarray | None = None) -> Pose:
    """Weighted Gauss-Newton over ``(rotation increment, t)`` using every edge.

    Residuals are ``sqrt(lambda_e) (r_e - g_e)`` with angle residuals wrapped
    to (-pi, pi]. Rotations are updated on the left, ``Q <- exp([d]x) Q``.
    ``weights`` (the per-edge ``lambda``) may be passed to skip recomputing them.
    """
    edges = scenario.edges
    sw = np.sqrt(edge_weights(scenario) if weights is None else weights)
    kinds = np.array([e.spec.kind.value for e in edges])
    angle = np.array([e.spec.is_angle for e in edges])
    dist = kinds == Kind.DISTANCE.value
    sqd = kinds == Kind.SQUARED_DISTANCE.value
    aoa = kinds == Kind.AOA.value
    rng_idx = np.flatnonzero(dist | sqd)
    aoa_idx = np.flatnonzero(aoa)
    other = np.flatnonzero(~(dist | sqd | aoa))
    B = np.array([edges[i].spec.frame.b for i in aoa_idx]).reshape(-1, 3)
    Pr = np.array([edges[i].spec.frame.projector for i in aoa_idx]).reshape(-1, 3, 3)
    tgt = np.array([e.target for e in edges], dtype=int)
    anc = np.array([e.anchor for e in edges], dtype=int)
    C = scenario.target_conformation
    Q, t = init.rotation.copy(), init.translation.copy()
    G = np.empty((len(edges), 3))
    g = np.empty(len(edges))
    for _ in range(max_iter):
        theta = Q @ C + t[:, None]
        # range edges in one shot
        u = theta[:, tgt[rng_idx]].T - scenario.anchors[:, anc[rng_idx]].T
        d = np.linalg.norm(u, axis=1)
        is_sq = sqd[rng_idx]
        g[rng_idx] = np.where(is_sq, d * d, d)
        G[rng_idx] = np.where(is_sq[:, None], 2.0 * u, u / d[:, None])
        if aoa_idx.size:
            g[aoa_idx], G[aoa_idx] = _aoa_batch(theta[:, tgt[aoa_idx]].T - scenario.anchors[:, anc[aoa_idx]].T,
                                                B, Pr, scenario.tol)
        for i in other:
            nodes = scenario.edge_nodes(edges[i], theta)
            g[i] = eval_g(edges[i].spec, *nodes, tol=scenario.tol)
            G[i] = grad_coords(edges[i].spec, *nodes, tol=scenario.tol)
        res = r - g
        res[angle] = _wrap(res[angle])
        P = (Q @ C[:, tgt]).T
        J = np.hstack([np.cross(P, G), G])
        step, *_ = np.linalg.lstsq(J * sw[:, None], res * sw, rcond=None)
        Q = Rotation.from_rotvec(step[:3]).as_matrix() @ Q
        t = t + step[3:]
        if np.linalg.norm(step) < xtol:
            break
    else:
        log.debug("nls_fit hit max_iter")
    # re-orthonormalize accumulated rounding
    U, _, Vt = np.linalg.svd(Q)
    return Pose(U @ Vt, t)


def _range_scale(scenario: Scenario, lam: np.ndarray) -> float:
    rng_edges = [i for i, e in enumerate(scenario.edges) if e.spec.kind is Kind.DISTANCE]
    if rng_edges:
        return float(np.median(1.0 / np.sqrt(lam[rng_edges])))
    # angle-only: radians times a typical anchor distance
    d = np.median(np.linalg.norm(scenario.targets.mean(axis=1)[:, None] - scenario.anchors, axis=0))
    return float(np.median(1.0 / np.sqrt(lam))) * float(d)


@dataclass
class TrialResult:
    estimator: str
    rotation: np.ndarray | None
    translation: np.ndarray | None
    sq_err_t: float
    sq_err_Q: float
    landmark_err: np.ndarray | None
    ok: bool


@dataclass(frozen=True)
class _NlsSetup:
    weights: np.ndarray
    scale: float
    radius: float

    @classmethod
    def of(cls, scenario: Scenario) -> "_NlsSetup":
        lam = edge_weights(scenario)
        radius = float(np.sqrt(np.mean(np.sum(scenario.target_conformation**2, axis=0))))
        return cls(lam, _range_scale(scenario, lam), max(radius, 1e-12))


def run_trial(scenario: Scenario, r: np.ndarray, estimators, rng: np.random.Generator,
              setup: _NlsSetup | None = None) -> list[TrialResult]:
    """Apply each estimator chain to one measurement vector."""
    pose = scenario.pose
    if "nls" in estimators and setup is None:
        setup = _NlsSetup.of(scenario)
    out = []
    theta_hat, mds_error = None, None
    if {"procrustes", "ls"} & set(estimators):
        try:
            theta_hat = mds_positions(distance_matrix(scenario, r), scenario.anchors)
        except (RigidBoundError, np.linalg.LinAlgError) as exc:
            mds_error = exc
    for name in estimators:
        try:
            if name in ("procrustes", "ls"):
                if mds_error is not None:
                    raise mds_error
                if name == "procrustes":
                    est = procrustes_fit(theta_hat, scenario.target_conformation)
                    Q_hat, t_hat = est.rotation, est.translation
                else:
                    Q_hat, t_hat = unconstrained_ls_fit(theta_hat, scenario.target_conformation)
                lm = np.linalg.norm(theta_hat - scenario.targets, axis=0)
            elif name == "nls":
                s = setup.scale
                init = Pose(
                    Rotation.from_rotvec(rng.normal(0.0, s / setup.radius, 3)).as_matrix() @ pose.rotation,
                    pose.translation + rng.normal(0.0, s, 3),
                )
                est = nls_fit(scenario, r, init, weights=setup.weights)
                Q_hat, t_hat = est.rotation, est.translation
                lm = np.linalg.norm(Q_hat @ scenario.target_conformation + t_hat[:, None] - scenario.targets, axis=0)
            else:
                raise ValueError(f"unknown estimator {name!r}")
        except (RigidBoundError, np.linalg.LinAlgError) as exc:
            log.debug("trial failed for %s: %s", name, exc)
            out.append(TrialResult(name, None, None, math.nan, math.nan, None, False))
            continue
        err_t = float(np.sum((t_hat - pose.translation) ** 2))
        err_q = float(np.sum((Q_hat - pose.rotation) ** 2))
        ok = math.isfinite(err_t) and math.isfinite(err_q)
        out.append(TrialResult(name, Q_hat, t_hat, err_t, err_q, lm, ok))
    return out


@dataclass
class EstimatorStats:
    mse_t: float
    se_t: float
    mse_Q: float
    se_Q: float
    fail_rate: float
    sq_err_t: np.ndarray = field(repr=False)
    sq_err_Q: np.ndarray = field(repr=False)


@dataclass
class MonteCarloSummary:
    n_trials: int
    seed: int
    estimators: dict[str, EstimatorStats]
    bounds: BoundReport


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    n = len(x)
    if n == 0:
        return math.nan, math.nan
    mean = math.fsum(x) / n
    if n == 1:
        return mean, math.nan
    var = math.fsum((x - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


def run_monte_carlo(scenario: Scenario, estimators=("procrustes", "ls"), n_trials: int = 1000, seed=0,
                    workers: int = 1, chunk_size: int = MC_CHUNK) -> MonteCarloSummary:
    """MSE of each estimator chain over ``n_trials`` seeded trials, with the matching bounds.

    Trials are grouped in fixed-size chunks, each with its own stream derived
    from ``(seed, chunk index)``, so results do not depend on ``workers``.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    estimators = tuple(estimators)
    seed = seed_of(seed)
    setup = _NlsSetup.of(scenario) if "nls" in estimators else None

    def run_chunk(c: int):
        n = min(chunk_size, n_trials - c * chunk_size)
        rng = chunk_rng(seed, c)
        r = simulate_measurements(scenario, rng, size=n)
        return [run_trial(scenario, r[k], estimators, rng, setup) for k in range(n)]

    n_chunks = math.ceil(n_trials / chunk_size)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run_chunk, range(n_chunks)))
    else:
        chunks = [run_chunk(c) for c in range(n_chunks)]
    trials = [t for chunk in chunks for t in chunk]

    stats = {}
    for j, name in enumerate(estimators):
        rows = [trial[j] for trial in trials]
        ok = np.array([t.ok for t in rows])
        et = np.array([t.sq_err_t for t in rows])[ok] / 3.0
        eq = np.array([t.sq_err_Q for t in rows])[ok] / 9.0
        mt, st = _mean_se(et)
        mq, sq = _mean_se(eq)
        stats[name] = EstimatorStats(mt, st, mq, sq, float(1.0 - ok.mean()), et, eq)

    report = bound_report(fim_translation(scenario), fim_rotation(scenario), scenario.pose.rotation)
    return MonteCarloSummary(n_trials, seed, stats, report)
