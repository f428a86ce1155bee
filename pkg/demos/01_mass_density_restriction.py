"""Masses, densities, and exact ball clipping.

Pieces are clipped against balls by solving the quadratic in the line
parameter, so every mass below is a closed-form number, not a sample.
"""

import numpy as np

from varifold_lab import (
    DiscreteVarifold,
    SegmentPiece,
    conic_atoms,
    conic_to_discrete,
    density,
    dilate,
    mass,
    restrict,
)
from varifold_lab.fixtures import full_line, y_junction

# A unit-weight diameter of the unit disk has mass 2 inside it.
diameter = DiscreteVarifold(2, (SegmentPiece([-1, 0], [1, 0], 1.0),), ())
print("mass of a diameter in B(0,1):", mass(diameter, [0, 0], 1.0))

# A chord at distance d from the center has length 2 sqrt(r^2 - d^2).
d = 0.6
chord_carrier = DiscreteVarifold(2, (SegmentPiece([-5, d], [5, d], 1.0),), ())
print("chord mass:", mass(chord_carrier, [0, 0], 1.0),
      "(expected", 2 * np.sqrt(1 - d * d), ")")

# Densities count multiplicity: interior points of a line see 1, the tip of
# a half line sees 1/2, and a triple junction sees 3/2.
print("density of a line at an interior point:",
      density(full_line([0, 0], [1, 0]), [0.3, 0.0]).value)
print("density of a Y junction at its center:",
      density(y_junction(), [0.0, 0.0]).value)

# Restriction splits mass exactly between a ball and its complement.
inside = restrict(chord_carrier, [0, 0], 1.0, "inside")
outside = restrict(chord_carrier, [0, 0], 1.0, "outside")
probe = ([0.2, 0.5], 3.0)
print("restriction partition:",
      mass(inside, *probe) + mass(outside, *probe), "=", mass(chord_carrier, *probe))

# Dilation is 1-homogeneous on masses, and cones do not move at all.
lam = 0.25
print("mass scaling:",
      mass(dilate(chord_carrier, [0, 0], lam), [0, 0], 4.0), "=",
      mass(chord_carrier, [0, 0], lam * 4.0) / lam)

cone = conic_to_discrete(conic_atoms(2, [([1, 0], 1.0), ([0, 1], 2.0)]))
moved = dilate(cone, [0, 0], 0.125)
print("cone invariance under dilation:",
      all(np.array_equal(a.direction, b.direction) and a.weight == b.weight
          for a, b in zip(moved.rays, cone.rays)))
