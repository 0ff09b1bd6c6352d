import numpy as np
import pytest

from rigidcrlb.dissimilarity import DissimilaritySpec, Kind
from rigidcrlb.geometry import Pose
from rigidcrlb.intensity import Normal, VonMises
from rigidcrlb.scenario import (
    TABLE3_ANCHORS,
    MeasurementEdge,
    Scenario,
    adoa_edges,
    subset_edges,
    table3_scenario,
)


def test_reference_geometry():
    assert TABLE3_ANCHORS.shape == (3, 8)
    assert np.all(np.abs(TABLE3_ANCHORS) == 10.0)
    scn = table3_scenario("distance+aoa", noise=Normal(1.0), angle_noise=VonMises(1.0))
    assert len(scn.edges) == 64 * 3
    kinds = {e.spec.kind for e in scn.edges}
    assert kinds == {Kind.DISTANCE, Kind.AOA}


def test_subset_size_and_order():
    edges = list(range(64))
    sub = subset_edges(edges, 0.8, np.random.default_rng(0))
    assert len(sub) == round(0.8 * 64)
    assert sub == sorted(sub) and len(set(sub)) == len(sub)
    assert subset_edges(edges, 1.0, np.random.default_rng(0)) == edges
    with pytest.raises(ValueError):
        subset_edges(edges, 0.0, np.random.default_rng(0))


def test_subset_is_seeded():
    scn = table3_scenario("distance", noise=Normal(1.0))
    a = scn.subset(0.5, np.random.default_rng(3))
    b = scn.subset(0.5, np.random.default_rng(3))
    assert a.edges == b.edges


def test_adoa_third_node_is_next_anchor():
    edges = adoa_edges(2, 4, VonMises(1.0))
    assert [(e.anchor, e.spec.third) for e in edges[:4]] == [(0, 1), (1, 2), (2, 3), (3, 0)]


def test_index_validation():
    C = np.zeros((3, 1))
    A = np.eye(3)
    with pytest.raises(IndexError):
        Scenario(C, A, Pose.identity(), [MeasurementEdge(1, 0, DissimilaritySpec.distance(), Normal(1.0))])
    with pytest.raises(ValueError):
        Scenario(C, A, Pose.identity(), [MeasurementEdge(0, 1, DissimilaritySpec.adoa(1), Normal(1.0))])


def test_targets_follow_pose():
    scn = table3_scenario()
    np.testing.assert_allclose(scn.targets, scn.pose.rotation @ scn.target_conformation
                               + scn.pose.translation[:, None])
    assert not scn.targets.flags.writeable


def test_unknown_shorthand():
    with pytest.raises(ValueError):
        table3_scenario("tdoa", noise=Normal(1.0))
