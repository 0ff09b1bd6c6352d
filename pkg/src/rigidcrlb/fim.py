"""Fisher information assembly for landmarks, translation and vec(Q).

The information-centric form sums one rank-one term per measurement,
``F = sum_e lambda_e v_e v_e^T``, where ``lambda_e`` is the scalar Fisher
information of the edge's noise model at the true dissimilarity and ``v_e``
the gradient of the dissimilarity with respect to the parameter.

:func:`mc_fim_oracle` builds the same matrix the long way, as the sample
average of outer products of the full log-likelihood score. It never touches
the analytic gradients or closed-form intensities, so the two can be checked
against each other.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dissimilarity import DegenerateGeometry, eval_g, grad_coords
from .geometry import kron_landmark, unvec, vec
from .scenario import Scenario


class Parameter(enum.Enum):
    TRANSLATION = "translation"
    ROTATION = "rotation"
    LANDMARKS = "landmarks"


@dataclass(frozen=True)
class FisherMatrix:
    matrix: np.ndarray
    target: Parameter
    info_vectors: np.ndarray  # one row u_e = sqrt(lambda_e) v_e per edge

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def edge_count(self) -> int:
        return self.info_vectors.shape[0]

    def contribution(self, i: int) -> np.ndarray:
        u = self.info_vectors[i]
        return np.outer(u, u)


def param_dim(scenario: Scenario, parameter: Parameter) -> int:
    return {Parameter.TRANSLATION: 3, Parameter.ROTATION: 9}.get(parameter, 3 * scenario.n_targets)


def edge_weights(scenario: Scenario) -> np.ndarray:
    """Per-edge ``lambda_e`` evaluated at the true geometry."""
    lam = np.empty(len(scenario.edges))
    for i, e in enumerate(scenario.edges):
        g = _edge_g(scenario, i, e)
        lam[i] = float(e.noise.fisher(g))
    return lam


def _edge_g(scenario, i, e, targets=None):
    try:
        return eval_g(e.spec, *scenario.edge_nodes(e, targets), tol=scenario.tol)
    except DegenerateGeometry as exc:
        raise type(exc)(str(exc), edge=i) from exc


def information_gradients(scenario: Scenario, parameter: Parameter) -> np.ndarray:
    """Rows ``v_e``: gradient of each edge's dissimilarity w.r.t. ``parameter``."""
    parameter = Parameter(parameter)
    dim = param_dim(scenario, parameter)
    V = np.zeros((len(scenario.edges), dim))
    C = scenario.target_conformation
    for i, e in enumerate(scenario.edges):
        try:
            grad = grad_coords(e.spec, *scenario.edge_nodes(e), tol=scenario.tol)
        except DegenerateGeometry as exc:
            raise type(exc)(str(exc), edge=i) from exc
        if parameter is Parameter.TRANSLATION:
            V[i] = grad
        elif parameter is Parameter.ROTATION:
            V[i] = kron_landmark(C[:, e.target]) @ grad
        else:
            V[i, 3 * e.target: 3 * e.target + 3] = grad
    return V


def assemble(scenario: Scenario, parameter: Parameter) -> FisherMatrix:
    parameter = Parameter(parameter)
    V = information_gradients(scenario, parameter)
    U = np.sqrt(edge_weights(scenario))[:, None] * V
    F = U.T @ U
    F = 0.5 * (F + F.T)
    return FisherMatrix(F, parameter, U)


def fim_landmarks(scenario: Scenario) -> FisherMatrix:
    return assemble(scenario, Parameter.LANDMARKS)


def fim_translation(scenario: Scenario) -> FisherMatrix:
    return assemble(scenario, Parameter.TRANSLATION)


def fim_rotation(scenario: Scenario) -> FisherMatrix:
    return assemble(scenario, Parameter.ROTATION)


# ---------------------------------------------------------------------------
# element-centric oracle

class OracleEstimate(NamedTuple):
    mean: np.ndarray
    stderr: np.ndarray
    n_trials: int


ORACLE_STEP = 1e-5
ORACLE_CHUNK = 10_000


def _perturbed_targets(scenario: Scenario, parameter: Parameter, j: int, delta: float) -> np.ndarray:
    C = scenario.target_conformation
    Q, t = scenario.pose.rotation, scenario.pose.translation
    if parameter is Parameter.TRANSLATION:
        t = t.copy()
        t[j] += delta
        return Q @ C + t[:, None]
    if parameter is Parameter.ROTATION:
        q = vec(Q).copy()
        q[j] += delta
        return unvec(q) @ C + t[:, None]
    theta = vec(scenario.targets).copy()
    theta[j] += delta
    return unvec(theta)


def _group_by_noise(edges):
    groups: dict = {}
    for i, e in enumerate(edges):
        groups.setdefault(e.noise, []).append(i)
    return [(model, np.array(idx)) for model, idx in groups.items()]


def seed_of(rng_or_seed) -> int:
    if isinstance(rng_or_seed, np.random.Generator):
        return int(rng_or_seed.integers(2**63))
    return int(rng_or_seed)


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    """Independent stream for one chunk; depends only on ``(seed, chunk)``."""
    return np.random.default_rng(np.random.SeedSequence([seed, chunk]))


def mc_fim_oracle(scenario: Scenario, parameter: Parameter, n_trials: int = 10**5, seed=0,
                  step: float = ORACLE_STEP, chunk_size: int = ORACLE_CHUNK, workers: int = 1) -> OracleEstimate:
    """Element-centric FIM estimate ``E[grad ln L grad ln L^T]`` with per-entry standard errors.

    Each trial draws a full measurement vector at the true geometry; the
    score is a central difference of the total log-likelihood in each
    parameter coordinate. Chunks use independent seeded streams, so the
    result does not depend on ``workers``.
    """
    parameter = Parameter(parameter)
    if n_trials < 10**4:
        raise ValueError("mc_fim_oracle needs at least 1e4 trials")
    dim = param_dim(scenario, parameter)
    edges = scenario.edges
    if not edges:
        z = np.zeros((dim, dim))
        return OracleEstimate(z, z.copy(), n_trials)

    g_true = np.array([_edge_g(scenario, i, e) for i, e in enumerate(edges)])
    g_shift = np.empty((dim, 2, len(edges)))
    for j in range(dim):
        for s, sign in enumerate((1.0, -1.0)):
            theta = _perturbed_targets(scenario, parameter, j, sign * step)
            g_shift[j, s] = [_edge_g(scenario, i, e, theta) for i, e in enumerate(edges)]
    groups = _group_by_noise(edges)

    def run_chunk(c: int):
        n = min(chunk_size, n_trials - c * chunk_size)
        rng = chunk_rng(seed, c)
        r = np.empty((n, len(edges)))
        for i, e in enumerate(edges):
            r[:, i] = e.noise.sample(g_true[i], rng, size=n)
        score = np.zeros((n, dim))
        for model, idx in groups:
            rk = r[:, idx]
            for j in range(dim):
                up = model.log_pdf(rk, g_shift[j, 0, idx]).sum(axis=1)
                dn = model.log_pdf(rk, g_shift[j, 1, idx]).sum(axis=1)
                score[:, j] += (up - dn) / (2.0 * step)
        sq = score * score
        return score.T @ score, sq.T @ sq

    n_chunks = math.ceil(n_trials / chunk_size)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_chunk, range(n_chunks)))
    else:
        parts = [run_chunk(c) for c in range(n_chunks)]

    s1 = np.zeros((dim, dim))
    s2 = np.zeros((dim, dim))
    for a, b in parts:  # fixed chunk order
        s1 += a
        s2 += b
    mean = s1 / n_trials
    var = np.maximum(s2 / n_trials - mean**2, 0.0) * n_trials / (n_trials - 1)
    return OracleEstimate(mean, np.sqrt(var / n_trials), n_trials)
