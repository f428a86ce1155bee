"""Reconstructing a conic varifold from weighted-projection band masses.

The measurement oracle only answers "how much weighted-projection mass lies
in the slope band [s, t] of the plane span(v, xi)".  Dyadic refinement
localizes the marginal atoms, an incidence solve pins the plane measure,
and the gnomonic lift returns to the sphere.
"""

import numpy as np

from varifold_lab import (
    BandOracle,
    band_marginal,
    BandSpec,
    fourier_of_marginal,
    gnomonic_pushforward,
    hyperplane_of,
    reconstruct_conic,
)
from varifold_lab.fixtures import random_conic

rng = np.random.default_rng(42)
cone = random_conic(rng, 3, n_atoms=7)
print("true atoms:")
for z, m in zip(cone.atom_directions, cone.atom_masses):
    print("  ", np.round(z, 6), " mass", round(m, 6))

# The marginal of a band query equals the gnomonic pushforward's marginal.
v = np.array([0.0, 0.0, 1.0])
plane = hyperplane_of(v)
xi = plane.basis[0]
marg = band_marginal(cone, v, xi, [BandSpec(-50, 50)])
gamma = gnomonic_pushforward(cone, v).measure
print("marginal total:", marg.total_mass, " gnomonic total:", gamma.total_mass)
print("fourier sample at 1.3:", fourier_of_marginal(marg, 1.3))

# Full reconstruction from band data alone.
oracle = BandOracle(cone)
recon = reconstruct_conic(oracle, 3)
print(f"reconstructed {recon.n_atoms} atoms with {oracle.query_count} band queries")
worst_pos = worst_mass = 0.0
for z, m in zip(cone.atom_directions, cone.atom_masses):
    d = np.linalg.norm(recon.atom_directions - z, axis=1)
    j = int(np.argmin(d))
    worst_pos = max(worst_pos, float(d[j]))
    worst_mass = max(worst_mass, abs(float(recon.atom_masses[j]) - float(m)))
print("worst position error:", worst_pos, " worst mass error:", worst_mass)
