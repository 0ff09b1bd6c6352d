"""
Noise models and information intensities
========================================

How much a single measurement tells us about its dissimilarity ``g`` is
its Fisher information ``F = E[(d ln p / d g)^2]``. For each noise model
the package has a closed form; a Monte Carlo estimate of the same
expectation checks it.

Two of the commonly quoted closed forms do not survive that check, and the
package keeps them only as opt-in ``source`` values:

* von Mises: the information is ``omega I1(omega) / I0(omega)``. The
  quoted ``omega**2 / 2`` is only its small-``omega`` limit.
* Nakagami with spread ``g**2``: the information is ``4 m / g**2``.
"""

import numpy as np

from rigidcrlb.intensity import Gamma, Nakagami, Normal, NormalPathloss, VonMises, mc_fisher

g = 5.0
rng = np.random.default_rng(1)
models = [
    Normal(0.2),
    NormalPathloss(alpha=2.0, beta=0.01),
    VonMises(2.0),
    VonMises(2.0, source="table"),
    Nakagami(2.0),
    Nakagami(2.0, source="table"),
    Gamma(20.0),
    Gamma(20.0, source="appendix"),
]
print(f"{'model':45s} {'closed form':>12s} {'Monte Carlo':>20s}  z")
for model in models:
    est = mc_fisher(model, g, n_samples=400_000, rng=rng)
    closed = float(model.fisher(g))
    z = (est.value - closed) / est.stderr
    print(f"{model!r:45s} {closed:12.5f} {est.value:11.5f} +- {est.stderr:.5f}  {z:+7.1f}")

# The von Mises gap grows with concentration.
for omega in (0.5, 2.0, 10.0, 50.0):
    print(f"omega={omega:5.1f}: exact {VonMises(omega).fisher(0):9.4f}   omega^2/2 {omega**2 / 2:9.4f}")
