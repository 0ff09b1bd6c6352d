"""
Poses, conformations and the vec/Kronecker identity
===================================================

A rigid body is a 3 x N matrix of landmark coordinates ``C`` in its own
frame. Placing it in the world applies a rotation and a translation:
``Theta = Q C + t 1^T``. The bounds later work with ``vec(Q)``, the nine
rotation entries stacked column by column.
"""

import numpy as np

from rigidcrlb.geometry import (
    EulerAngles,
    Pose,
    apply_pose,
    euler_from_rotation,
    is_so3,
    kron_landmark,
    vec,
)
from rigidcrlb.scenario import TABLE3_TARGET

# The reference body is a unit cube centred on the origin.
C = TABLE3_TARGET
print("conformation (3 x %d):\n%s" % (C.shape[1], C))

# Roll 10 deg about x, pitch 20 deg about y, yaw 45 deg about z.
pose = Pose.from_euler(EulerAngles.from_degrees(10, 20, 45), [-3.0, 0.5, 7.0])
Q = pose.rotation
print("Q is a rotation:", is_so3(Q))
print("recovered angles (deg):", np.round(euler_from_rotation(Q).degrees(), 12))

# Every landmark moves by the same rigid transform, so pairwise distances
# inside the body do not change.
Theta = apply_pose(pose, C)
d_before = np.linalg.norm(C[:, 0] - C[:, 6])
d_after = np.linalg.norm(Theta[:, 0] - Theta[:, 6])
print(f"body diagonal before/after: {d_before:.12f} / {d_after:.12f}")

# The rotated landmark Q c can be written as a linear map of vec(Q).
# That is what turns a gradient in the landmark position into a gradient
# in the rotation entries.
c = C[:, 2]
print("Q c            :", Q @ c)
print("(c^T kron I) q :", kron_landmark(c).T @ vec(Q))
