"""
Assembling the Fisher information
=================================

Every measurement contributes a rank-one term ``lambda v v^T`` to the
FIM: its information intensity times the outer product of its gradient.
Summing over edges gives ``F_t`` (3 x 3) and ``F_Q`` (9 x 9). The
element-centric definition, the expected outer product of the score of the
full likelihood, gives the same matrices. That is checked here by Monte
Carlo.
"""

import numpy as np

from rigidcrlb.fim import Parameter, assemble, mc_fim_oracle
from rigidcrlb.intensity import Gamma, VonMises
from rigidcrlb.scenario import table3_scenario

# Ranges with gamma noise (mean equal to the true distance) and
# azimuth/elevation bearings with von Mises noise, between all eight
# landmarks and all eight anchors.
scn = table3_scenario("distance+aoa", noise=Gamma(100.0), angle_noise=VonMises(50.0))
print(f"{len(scn.edges)} measurement edges")

F_t = assemble(scn, Parameter.TRANSLATION)
print("F_t =\n", np.array_str(F_t.matrix, precision=2))

# The rank-one contributions add up to the matrix.
total = sum(F_t.contribution(i) for i in range(F_t.edge_count))
print("sum of contributions equals F_t:", np.allclose(total, F_t.matrix))

F_Q = assemble(scn, Parameter.ROTATION).matrix
print("F_Q eigenvalues:", np.array_str(np.linalg.eigvalsh(F_Q), precision=1))

# Monte Carlo over 20 000 simulated measurement vectors.
est = mc_fim_oracle(scn, Parameter.TRANSLATION, n_trials=20_000, seed=0)
z = np.abs(F_t.matrix - est.mean) / est.stderr
print("Monte Carlo F_t =\n", np.array_str(est.mean, precision=2))
print(f"largest deviation: {z.max():.2f} standard errors")
