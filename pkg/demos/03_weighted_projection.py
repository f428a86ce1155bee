"""Weighted projections and the half-line multiplicity counterexample.

The weighted projection scales each image piece by the direction
contraction |pi_P s|, which preserves vertex balance.  On the circle the
induced half-line data does not determine a continuous density: the
degree-3 wobble is invisible to every direction.
"""

import numpy as np

from varifold_lab import (
    Subspace,
    circle_arc_mass,
    counterexample_pair,
    halfline_multiplicity,
    is_stationary,
    mapping_projection,
    weighted_projection,
)
from varifold_lab.fixtures import full_line, random_stationary_network

# The diagonal line in the plane: plain projection keeps multiplicity 1,
# the weighted projection carries the factor sqrt(2)/2.
diag = full_line([0.0, 0.0], [1.0, 1.0])
p = Subspace.span([1.0, 0.0])
print("mapping multiplicity: ", mapping_projection(diag, p).rays[0].weight)
print("weighted multiplicity:", weighted_projection(diag, p).rays[0].weight,
      "=", np.sqrt(2) / 2)

# Weighted projections of stationary networks stay stationary.
rng = np.random.default_rng(1)
net = random_stationary_network(rng, 4, n_vertices=3)
q = Subspace(4, np.linalg.qr(rng.normal(size=(4, 2)))[0].T)
print("projected network stationary:", is_stationary(weighted_projection(net, q), 1e-10))

# Two distinct conic varifolds with identical weighted projections.
v1, v2 = counterexample_pair()
angles = 2 * np.pi * np.arange(360) / 360
diffs = [
    halfline_multiplicity(v1, [np.cos(a), np.sin(a)])
    - halfline_multiplicity(v2, [np.cos(a), np.sin(a)])
    for a in angles
]
print("max half-line multiplicity difference:", max(abs(d) for d in diffs))
print("yet the arc (0, pi/3) masses differ by",
      circle_arc_mass(v1, 0, np.pi / 3) - circle_arc_mass(v2, 0, np.pi / 3))
