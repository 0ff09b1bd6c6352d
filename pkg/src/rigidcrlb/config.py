"""Scenario configuration files.

A config is a YAML tree. Conformations are written as three rows (x, y, z)
with one column per node; angles are in degrees. Example::

    target:              # 3 x n_T landmark coordinates in the body frame
      - [-0.5, 0.5, ...]
      - [...]
      - [...]
    anchors: [[...], [...], [...]]
    pose:
      angles_deg: [10, 20, 45]      # alpha (x), beta (y), gamma (z)
      translation: [-3, 0.5, 7]
    edges:                          # one entry per measurement class
      - name: range
        kind: distance              # distance | squared_distance | aoa | adoa
        noise: {model: normal, sigma: 0.1}
      - name: bearing
        kind: aoa
        frames: [azimuth, elevation]   # or explicit {a: [...], b: [...]}
        noise: {model: von_mises, omega: 100}
    connectivity: {fraction: 1.0, seed: 0}
    sweep:
      parameter: sigma
      classes: [range]              # default: every class whose model has the parameter
      values: [0.01, 0.1, 1.0]      # or logspace: {start: 0.01, stop: 1, num: 10}
    estimators: [procrustes, ls]
    trials: 1000
    seed: 0
    tolerances: {geometry: 1.0e-12, angle: 1.0e-9}

Every class forms a complete bipartite graph between landmarks and anchors
(ADoA pairs each anchor with the next one as third node). ``connectivity``
then keeps a seeded uniform subset of all edges; the subset is drawn once
and shared by every sweep point, bound and simulation.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .dissimilarity import AZIMUTH, DEFAULT_TOL, ELEVATION, AoAFrame, DissimilaritySpec, Kind, Tolerances
from .errors import InvalidParameter, ParseError, ValidationError
from .estimators import ESTIMATORS
from .geometry import EulerAngles, Pose
from .intensity import Gamma, Nakagami, Normal, NormalPathloss, VonMises
from .scenario import MeasurementEdge, Scenario, adoa_edges, complete_edges, subset_edges

DEFAULT_FRACTION = 1.0
DEFAULT_TRIALS = 1000
DEFAULT_ESTIMATORS = ("procrustes", "ls")

NOISE_MODELS = {
    "normal": (Normal, ("sigma",)),
    "normal_pathloss": (NormalPathloss, ("alpha", "beta")),
    "von_mises": (VonMises, ("omega",)),
    "nakagami": (Nakagami, ("m",)),
    "gamma": (Gamma, ("kappa",)),
}
NAMED_FRAMES = {"azimuth": AZIMUTH, "elevation": ELEVATION}


@dataclass(frozen=True)
class NoiseSpec:
    model: str
    params: dict[str, float]
    source: str | None = None

    def build(self, **override) -> Any:
        cls, _ = NOISE_MODELS[self.model]
        kwargs = {**self.params, **override}
        if self.source is not None:
            kwargs["source"] = self.source
        return cls(**kwargs)


@dataclass(frozen=True)
class EdgeClass:
    name: str
    kind: Kind
    noise: NoiseSpec
    frames: tuple[AoAFrame, ...] = ()


@dataclass(frozen=True)
class Sweep:
    parameter: str
    values: tuple[float, ...]
    classes: tuple[str, ...]


@dataclass(frozen=True)
class ScenarioConfig:
    target: np.ndarray
    anchors: np.ndarray
    angles_deg: tuple[float, float, float]
    translation: np.ndarray
    edge_classes: tuple[EdgeClass, ...]
    fraction: float = DEFAULT_FRACTION
    subset_seed: int = 0
    sweep: Sweep | None = None
    estimators: tuple[str, ...] = DEFAULT_ESTIMATORS
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    tolerances: Tolerances = DEFAULT_TOL
    source: str = field(default="<string>", compare=False)

    @property
    def pose(self) -> Pose:
        return Pose.from_euler(EulerAngles.from_degrees(*self.angles_deg), self.translation)

    def sweep_points(self) -> list[float | None]:
        return [None] if self.sweep is None else list(self.sweep.values)

    def edges(self, sweep_value: float | None = None) -> list[MeasurementEdge]:
        """Full edge list (before the connectivity subset) at one sweep point."""
        n_t, n_a = self.target.shape[1], self.anchors.shape[1]
        edges: list[MeasurementEdge] = []
        for cls in self.edge_classes:
            override = {}
            if self.sweep is not None and cls.name in self.sweep.classes:
                override[self.sweep.parameter] = sweep_value
            noise = cls.noise.build(**override)
            if cls.kind is Kind.AOA:
                edges += complete_edges(n_t, n_a, [DissimilaritySpec.aoa(f) for f in cls.frames], noise)
            elif cls.kind is Kind.ADOA:
                edges += adoa_edges(n_t, n_a, noise)
            else:
                edges += complete_edges(n_t, n_a, DissimilaritySpec(cls.kind), noise)
        return edges

    def subset_indices(self) -> np.ndarray:
        """Indices of the kept edges; identical for every sweep point."""
        n = len(self.edges(self.sweep.values[0] if self.sweep else None))
        kept = subset_edges(range(n), self.fraction, np.random.default_rng(self.subset_seed))
        return np.asarray(kept, dtype=int)

    def scenario(self, sweep_value: float | None = None) -> Scenario:
        edges = self.edges(sweep_value)
        keep = self.subset_indices()
        return Scenario(self.target, self.anchors, self.pose, tuple(edges[i] for i in keep), self.tolerances)

    def with_overrides(self, **kw) -> "ScenarioConfig":
        return dataclasses.replace(self, **kw)


# ---------------------------------------------------------------------------
# parsing

def _matrix(node, name) -> np.ndarray:
    if node is None:
        raise ValidationError(name, "missing")
    try:
        M = np.array(node, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(name, "must be a numeric 3 x N array") from None
    if M.ndim != 2 or M.shape[0] != 3 or M.shape[1] == 0:
        raise ValidationError(name, f"must be a non-empty 3 x N array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValidationError(name, "entries must be finite")
    return M


def _vector(node, name, n) -> np.ndarray:
    try:
        v = np.array(node, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise ValidationError(name, f"must be {n} numbers") from None
    if v.shape != (n,) or not np.all(np.isfinite(v)):
        raise ValidationError(name, f"must be {n} finite numbers")
    return v


def _frame(node, name) -> AoAFrame:
    if isinstance(node, str):
        if node not in NAMED_FRAMES:
            raise ValidationError(name, f"unknown frame {node!r}; use {sorted(NAMED_FRAMES)} or {{a:, b:}}")
        return NAMED_FRAMES[node]
    if not isinstance(node, dict) or set(node) != {"a", "b"}:
        raise ValidationError(name, "frame must be a name or a mapping with keys a and b")
    try:
        return AoAFrame(a=_vector(node["a"], f"{name}.a", 3), b=_vector(node["b"], f"{name}.b", 3))
    except (InvalidParameter, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(name, str(exc)) from None


def _noise(node, name) -> NoiseSpec:
    if not isinstance(node, dict) or "model" not in node:
        raise ValidationError(name, "needs a mapping with a 'model' key")
    node = dict(node)
    model = node.pop("model")
    if model not in NOISE_MODELS:
        raise ValidationError(f"{name}.model", f"unknown noise model {model!r}; choose from {sorted(NOISE_MODELS)}")
    source = node.pop("source", None)
    params = {}
    for key, value in node.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValidationError(f"{name}.{key}", "must be a number")
        params[key] = float(value)
    return NoiseSpec(model, params, source)


def _edge_class(node, i) -> EdgeClass:
    name = f"edges[{i}]"
    if not isinstance(node, dict):
        raise ValidationError(name, "must be a mapping")
    label = str(node.get("name", f"class{i}"))
    try:
        kind = Kind(node.get("kind"))
    except ValueError:
        raise ValidationError(f"{name}.kind", f"must be one of {[k.value for k in Kind]}") from None
    noise = _noise(node.get("noise"), f"{name}.noise")
    frames: tuple[AoAFrame, ...] = ()
    if kind is Kind.AOA:
        raw = node.get("frames", ["azimuth", "elevation"])
        if not isinstance(raw, list) or not raw:
            raise ValidationError(f"{name}.frames", "must be a non-empty list")
        frames = tuple(_frame(f, f"{name}.frames[{j}]") for j, f in enumerate(raw))
    elif "frames" in node:
        raise ValidationError(f"{name}.frames", "only AoA classes take frames")
    return EdgeClass(label, kind, noise, frames)


def _sweep(node, classes) -> Sweep | None:
    if node is None:
        return None
    if not isinstance(node, dict) or "parameter" not in node:
        raise ValidationError("sweep", "needs a 'parameter' key")
    param = str(node["parameter"])
    if "values" in node:
        try:
            values = np.array(node["values"], dtype=float).reshape(-1)
        except (TypeError, ValueError):
            raise ValidationError("sweep values", "must be numbers") from None
    elif "logspace" in node:
        ls = node["logspace"]
        try:
            values = np.geomspace(float(ls["start"]), float(ls["stop"]), int(ls["num"]))
        except (KeyError, TypeError, ValueError):
            raise ValidationError("sweep logspace", "needs positive start, stop and an integer num") from None
    else:
        raise ValidationError("sweep values", "missing (give 'values' or 'logspace')")
    if values.size == 0 or not np.all(np.isfinite(values)):
        raise ValidationError("sweep values", "must be a non-empty list of finite numbers")
    if np.any(np.diff(values) <= 0):
        raise ValidationError("sweep grid", "values must be strictly increasing")
    takes = [c.name for c in classes if param in NOISE_MODELS[c.noise.model][1]]
    names = node.get("classes", takes)
    names = [names] if isinstance(names, str) else list(names)
    for n in names:
        if n not in takes:
            raise ValidationError("sweep classes", f"class {n!r} has no noise parameter {param!r}")
    if not names:
        raise ValidationError("sweep parameter", f"no edge class has a noise parameter {param!r}")
    return Sweep(param, tuple(float(v) for v in values), tuple(names))


def _int(node, name, minimum=None) -> int:
    if isinstance(node, bool) or not isinstance(node, int):
        raise ValidationError(name, "must be an integer")
    if minimum is not None and node < minimum:
        raise ValidationError(name, f"must be >= {minimum}")
    return node


KNOWN_KEYS = {"target", "anchors", "pose", "edges", "connectivity", "sweep", "estimators", "trials", "seed",
              "tolerances"}


def config_from_tree(tree, source: str = "<string>") -> ScenarioConfig:
    """Validate a parsed YAML tree and build a :class:`ScenarioConfig`."""
    if not isinstance(tree, dict):
        raise ValidationError("config", "top level must be a mapping")
    unknown = set(tree) - KNOWN_KEYS
    if unknown:
        raise ValidationError(sorted(unknown)[0], "unknown key")
    target = _matrix(tree.get("target"), "target")
    anchors = _matrix(tree.get("anchors"), "anchors")
    pose = tree.get("pose") or {}
    angles = tuple(_vector(pose.get("angles_deg", [0, 0, 0]), "pose.angles_deg", 3))
    translation = _vector(pose.get("translation", [0, 0, 0]), "pose.translation", 3)

    raw_edges = tree.get("edges")
    if not isinstance(raw_edges, list) or not raw_edges:
        raise ValidationError("edges", "needs at least one measurement class")
    classes = tuple(_edge_class(node, i) for i, node in enumerate(raw_edges))
    if len({c.name for c in classes}) != len(classes):
        raise ValidationError("edges", "class names must be unique")

    conn = tree.get("connectivity") or {}
    fraction = conn.get("fraction", DEFAULT_FRACTION)
    if isinstance(fraction, bool) or not isinstance(fraction, (int, float)) or not 0.0 < fraction <= 1.0:
        raise ValidationError("connectivity fraction", f"must lie in (0, 1], got {fraction!r}")
    subset_seed = _int(conn.get("seed", 0), "connectivity seed", 0)

    sweep = _sweep(tree.get("sweep"), classes)

    estimators = tree.get("estimators", list(DEFAULT_ESTIMATORS))
    estimators = [estimators] if isinstance(estimators, str) else list(estimators)
    for e in estimators:
        if e not in ESTIMATORS:
            raise ValidationError("estimators", f"unknown estimator {e!r}; choose from {list(ESTIMATORS)}")
    trials = _int(tree.get("trials", DEFAULT_TRIALS), "trials", 1)
    seed = _int(tree.get("seed", 0), "seed", 0)

    tol_node = tree.get("tolerances") or {}
    try:
        tolerances = dataclasses.replace(DEFAULT_TOL, **{k: float(v) for k, v in tol_node.items()})
    except (TypeError, ValueError) as exc:
        raise ValidationError("tolerances", str(exc)) from None

    cfg = ScenarioConfig(target, anchors, angles, translation, classes, float(fraction), subset_seed, sweep,
                         tuple(estimators), trials, seed, tolerances, source)
    # instantiate every noise model once so bad parameters surface here, not mid-run
    for value in cfg.sweep_points():
        try:
            cfg.edges(value)
        except (InvalidParameter, TypeError) as exc:
            raise ValidationError("noise", str(exc)) from None
    return cfg


def parse_config_text(text: str, source: str = "<string>") -> ScenarioConfig:
    try:
        tree = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        raise ParseError(f"{source}: {problem}", line=line) from None
    return config_from_tree(tree, source)


BUNDLED = ("table3.cfg",)


def bundled_config_text(name: str) -> str:
    return resources.files("rigidcrlb").joinpath("configs", name).read_text()


def parse_config(path) -> ScenarioConfig:
    """Read and validate a config file.

    A bare name of a bundled config (``table3.cfg``) that does not exist on
    disk resolves to the copy shipped with the package.
    """
    p = Path(path)
    if p.exists():
        return parse_config_text(p.read_text(), str(p))
    if p.name in BUNDLED and str(p) == p.name:
        return parse_config_text(bundled_config_text(p.name), p.name)
    raise ParseError(f"config file {str(p)!r} not found")
