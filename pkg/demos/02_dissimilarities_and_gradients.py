"""
Dissimilarities and their information gradients
===============================================

Each measurement observes a scalar function ``g`` of the geometry: a
range, an angle of arrival in a projection plane, or the angle subtended
at an anchor by a landmark and a second anchor. The bound only needs the
gradient of ``g`` with respect to the pose. Here the analytic gradients
are compared against central finite differences.
"""

import numpy as np

from rigidcrlb.dissimilarity import (
    AZIMUTH,
    DissimilaritySpec,
    Kind,
    eval_g,
    grad_rotation,
    grad_translation,
)
from rigidcrlb.geometry import EulerAngles, Pose
from rigidcrlb.validation import fd_gradients, gradient_suite

pose = Pose.from_euler(EulerAngles.from_degrees(10, 20, 45), [-3.0, 0.5, 7.0])
c_n = np.array([0.5, -0.5, 0.5])            # one landmark of the body
anchor = np.array([10.0, 10.0, -10.0])
other = np.array([-10.0, 10.0, 10.0])       # second anchor for the ADoA edge
theta_n = pose.rotation @ c_n + pose.translation

specs = {
    "distance": DissimilaritySpec.distance(),
    "squared distance": DissimilaritySpec.squared_distance(),
    "azimuth AoA": DissimilaritySpec.aoa(AZIMUTH),
    "ADoA": DissimilaritySpec.adoa(1),
}
for name, spec in specs.items():
    k = other if spec.kind is Kind.ADOA else None
    g = eval_g(spec, theta_n, anchor, k)
    gt = grad_translation(spec, pose, c_n, anchor, k)
    gq = grad_rotation(spec, pose, c_n, anchor, k)
    ft, fq = fd_gradients(spec, pose, c_n, anchor, k)
    print(f"{name:17s} g = {g:9.5f}   |dg/dt - FD| = {np.abs(gt - ft).max():.1e}"
          f"   |dg/dvecQ - FD| = {np.abs(gq - fq).max():.1e}")

# The same comparison over many random, well-conditioned configurations.
rng = np.random.default_rng(0)
for kind in Kind:
    for result in gradient_suite(kind, 500, rng):
        print(result.line())
