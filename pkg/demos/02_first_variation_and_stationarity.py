"""First variation of piecewise-linear varifolds and vertex balancing.

The tangential divergence of a test field integrates along a straight piece
to an endpoint difference, so the first variation collapses to point forces
at the vertices.  A network is stationary exactly when every vertex's
weighted direction vectors cancel.
"""

import numpy as np

from varifold_lab import (
    DiscreteVarifold,
    SegmentPiece,
    boundary_variation,
    bump_field,
    first_variation,
    first_variation_quadrature,
    is_stationary,
    vertex_residuals,
)
from varifold_lab.fixtures import full_line, y_junction

rng = np.random.default_rng(0)

# Closed form vs brute-force quadrature of div_S g along the pieces.
v = DiscreteVarifold(2, (SegmentPiece([0.0, 0.0], [1.0, 0.4], 1.3),), ())
g = bump_field([0.8, 0.1], 1.2, [0.5, -0.2])
print("closed form:", first_variation(v, g))
print("quadrature: ", first_variation_quadrature(v, g, nodes=10_001))

# The Riesz representation of the first variation is a list of vertex atoms.
lopsided = y_junction(weights=(1.0, 1.0, 2.0))
for atom in vertex_residuals(lopsided):
    print("residual atom at", atom.location, "omega", atom.omega, "mass", atom.mass)
print("balanced junction stationary:", is_stationary(y_junction(), 1e-10))
print("lopsided junction stationary:", is_stationary(lopsided, 1e-10))

# The representation identity: delta V (g) = sum of mass <g, omega>.
g2 = bump_field([0.0, 0.0], 0.7, rng.normal(size=2))
dv = first_variation(lopsided, g2)
rep = sum(a.mass * float(np.dot(g2.evaluate(a.location), a.omega))
          for a in vertex_residuals(lopsided))
print("delta V(g) =", dv, " represented =", rep)

# Cutting a line with a ball leaves two outward boundary forces.
line = full_line([0.0, 0.0], [1.0, 0.0])
for atom in boundary_variation(line, [0, 0], 1.0):
    print("boundary atom at", atom.location, "outward direction", atom.omega)
