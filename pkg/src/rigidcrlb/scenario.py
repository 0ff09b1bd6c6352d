"""Localization scenarios: target body, anchors, true pose and measurement edges."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .dissimilarity import AZIMUTH, DEFAULT_TOL, ELEVATION, AoAFrame, DissimilaritySpec, Kind, Tolerances
from .geometry import EulerAngles, Pose, apply_pose, as_conformation
from .intensity import NoiseModel

# Simulation parameters of the reference experiment: a unit cube of landmarks
# localized by the eight corners of a 20 m cube of anchors.
TABLE3_TARGET = np.array(
    [
        [-0.5, 0.5, 0.5, -0.5, -0.5, 0.5, -0.5, 0.5],
        [-0.5, -0.5, 0.5, 0.5, -0.5, -0.5, 0.5, 0.5],
        [-0.5, -0.5, -0.5, -0.5, 0.5, 0.5, 0.5, 0.5],
    ]
)
TABLE3_ANCHORS = 20.0 * TABLE3_TARGET
TABLE3_TRANSLATION = np.array([-3.0, 0.5, 7.0])
TABLE3_ANGLES_DEG = (10.0, 20.0, 45.0)


@dataclass(frozen=True)
class MeasurementEdge:
    target: int
    anchor: int
    spec: DissimilaritySpec
    noise: NoiseModel


@dataclass(frozen=True)
class Scenario:
    target_conformation: np.ndarray
    anchors: np.ndarray
    pose: Pose
    edges: tuple[MeasurementEdge, ...] = ()
    tol: Tolerances = DEFAULT_TOL
    targets: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        C = as_conformation(self.target_conformation).copy()
        A = as_conformation(self.anchors).copy()
        C.setflags(write=False)
        A.setflags(write=False)
        object.__setattr__(self, "target_conformation", C)
        object.__setattr__(self, "anchors", A)
        object.__setattr__(self, "edges", tuple(self.edges))
        theta = apply_pose(self.pose, C)
        theta.setflags(write=False)
        object.__setattr__(self, "targets", theta)
        n_t, n_a = C.shape[1], A.shape[1]
        for i, e in enumerate(self.edges):
            if not (0 <= e.target < n_t and 0 <= e.anchor < n_a):
                raise IndexError(f"edge {i} references node outside the scenario")
            if e.spec.kind is Kind.ADOA:
                if not 0 <= e.spec.third < n_a:
                    raise IndexError(f"edge {i}: ADoA third node out of range")
                if e.spec.third == e.anchor:
                    raise ValueError(f"edge {i}: ADoA third node equals the anchor")

    @property
    def n_targets(self) -> int:
        return self.target_conformation.shape[1]

    @property
    def n_anchors(self) -> int:
        return self.anchors.shape[1]

    def edge_nodes(self, edge: MeasurementEdge, targets: np.ndarray | None = None):
        """``(theta_n, theta_a, theta_k)`` of an edge; ``targets`` overrides the true positions."""
        theta = self.targets if targets is None else targets
        theta_k = self.anchors[:, edge.spec.third] if edge.spec.kind is Kind.ADOA else None
        return theta[:, edge.target], self.anchors[:, edge.anchor], theta_k

    def with_edges(self, edges: Sequence[MeasurementEdge]) -> "Scenario":
        return replace(self, edges=tuple(edges))

    def with_pose(self, pose: Pose) -> "Scenario":
        return replace(self, pose=pose)

    def subset(self, fraction: float, rng: np.random.Generator) -> "Scenario":
        """Keep ``round(fraction * E)`` edges drawn uniformly without replacement."""
        return self.with_edges(subset_edges(self.edges, fraction, rng))


def subset_edges(edges, fraction: float, rng: np.random.Generator) -> list[MeasurementEdge]:
    if not 0.0 < fraction <= 1.0:
        raise ValueError("connectivity fraction must lie in (0, 1]")
    edges = list(edges)
    if fraction == 1.0:
        return edges
    keep = int(round(fraction * len(edges)))
    idx = np.sort(rng.choice(len(edges), size=keep, replace=False))
    return [edges[i] for i in idx]


def complete_edges(n_targets: int, n_anchors: int, spec: DissimilaritySpec | Sequence[DissimilaritySpec],
                   noise: NoiseModel) -> list[MeasurementEdge]:
    """One edge per (target, anchor, spec) triple, target-major order."""
    specs = [spec] if isinstance(spec, DissimilaritySpec) else list(spec)
    return [
        MeasurementEdge(n, a, s, noise)
        for n in range(n_targets)
        for a in range(n_anchors)
        for s in specs
    ]


def adoa_edges(n_targets: int, n_anchors: int, noise: NoiseModel) -> list[MeasurementEdge]:
    """ADoA edges pairing every anchor with the next anchor (cyclically) as third node."""
    return [
        MeasurementEdge(n, a, DissimilaritySpec.adoa((a + 1) % n_anchors), noise)
        for n in range(n_targets)
        for a in range(n_anchors)
    ]


DEFAULT_AOA_FRAMES: tuple[AoAFrame, ...] = (AZIMUTH, ELEVATION)


def table3_scenario(edges: str | Sequence[MeasurementEdge] = (), noise: NoiseModel | None = None,
                    angle_noise: NoiseModel | None = None,
                    frames: Sequence[AoAFrame] = DEFAULT_AOA_FRAMES) -> Scenario:
    """Reference scenario with optional prebuilt edge sets.

    ``edges`` may be a list of edges, or one of the shorthands ``"distance"``,
    ``"aoa"``, ``"distance+aoa"``, ``"adoa"`` (complete graphs using ``noise``
    for ranges and ``angle_noise`` for angles).
    """
    pose = Pose.from_euler(EulerAngles.from_degrees(*TABLE3_ANGLES_DEG), TABLE3_TRANSLATION)
    n_t, n_a = TABLE3_TARGET.shape[1], TABLE3_ANCHORS.shape[1]
    if isinstance(edges, str):
        built: list[MeasurementEdge] = []
        for part in edges.split("+"):
            if part == "distance":
                built += complete_edges(n_t, n_a, DissimilaritySpec.distance(), noise)
            elif part == "squared_distance":
                built += complete_edges(n_t, n_a, DissimilaritySpec.squared_distance(), noise)
            elif part == "aoa":
                built += complete_edges(n_t, n_a, [DissimilaritySpec.aoa(f) for f in frames], angle_noise)
            elif part == "adoa":
                built += adoa_edges(n_t, n_a, angle_noise)
            else:
                raise ValueError(f"unknown edge shorthand {part!r}")
        edges = built
    return Scenario(TABLE3_TARGET, TABLE3_ANCHORS, pose, tuple(edges))
