"""
Bounds: exact, inversion-free and SO(3)-constrained
===================================================

The average translation bound is ``tr(F_t^-1) / 3``. The cheaper
``3 / tr(F_t)`` never exceeds it; the two agree only when all eigenvalues
are equal. For the rotation, the nine entries of ``Q`` are not free.
Restricting the information to the three-dimensional tangent space of
SO(3) gives the constrained bound, which is always the smaller one.
"""

import numpy as np

from rigidcrlb.bounds import bound_report, constraint_jacobian, constraint_matrix
from rigidcrlb.fim import fim_rotation, fim_translation
from rigidcrlb.intensity import Normal
from rigidcrlb.scenario import table3_scenario

scn = table3_scenario("distance", noise=Normal(0.1))
rep = bound_report(fim_translation(scn), fim_rotation(scn), scn.pose.rotation)
for key in ("crlb_t", "crlb_t_approx", "crlb_Q", "crlb_Q_approx", "ccrb_Q"):
    print(f"{key:14s} {getattr(rep, key):.4e}")

# The tangent basis M spans the directions that keep Q orthogonal.
Q = scn.pose.rotation
M = constraint_matrix(Q)
print("G(Q) M = 0     :", np.abs(constraint_jacobian(Q) @ M).max())
print("M^T M - 2 I    :", np.abs(M.T @ M - 2 * np.eye(3)).max())

# Bounds scale with sigma squared, and dropping 20 % of the ranges makes
# every bound worse.
rng = np.random.default_rng(0)
print(f"{'sigma':>6s} {'crlb_t':>11s} {'crlb_t 80%':>11s} {'ccrb_Q':>11s}")
for sigma in (0.01, 0.1, 1.0):
    full = table3_scenario("distance", noise=Normal(sigma))
    part = full.subset(0.8, np.random.default_rng(0))
    a = bound_report(fim_translation(full), fim_rotation(full), Q)
    b = bound_report(fim_translation(part), fim_rotation(part), Q)
    print(f"{sigma:6.2f} {a.crlb_t:11.3e} {b.crlb_t:11.3e} {a.ccrb_Q:11.3e}")
