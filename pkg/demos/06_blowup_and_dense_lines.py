"""Tangent cones by dilation, and the dense-lines stress family.

Piecewise-linear varifolds reach their tangent cone at a finite scale; the
battery distance registers that exactly.  The dense-lines family stays
stationary for every truncation while its radial projection mass over a
fixed cap keeps growing, which is why projections must be tamed by surgery
before being used globally.
"""

import numpy as np

from varifold_lab import (
    conic_to_discrete,
    dense_lines_fixture,
    density,
    is_stationary,
    mass,
    projection_growth_table,
    tangent_estimate,
)
from varifold_lab.fixtures import y_junction

# Tangent cone of a Y junction: the three arms, stabilization is exact.
lambdas = [2.0 ** -k for k in range(8)]
cone, diag = tangent_estimate(y_junction(), [0.0, 0.0], lambdas)
print("cone atoms:", cone.n_atoms)
print("distances:", diag.distances)
print("stabilized at index:", diag.stabilized_at)

# Mass law: the cone ball mass is (2 r) times the density at the point.
theta = density(y_junction(), [0.0, 0.0]).value
cd = conic_to_discrete(cone)
for r in (0.5, 1.0, 2.0):
    print(f"  mass(B(0,{r})) = {mass(cd, [0, 0], r)}  vs 2 r theta = {2 * r * theta}")

# Dense lines: stationary at every k, radially unbounded in the limit.
for k in (1, 4, 16):
    v = dense_lines_fixture(k, seed=0)
    print(f"k={k:3d} stationary:", is_stationary(v, 1e-12)[0])
table = projection_growth_table([1, 4, 16, 64, 256], [0, 0, 1.0], 0.6, seed=0)
print("radial cap mass growth:")
for k, m in table:
    print(f"  k={k:4d}  cap mass {m:.4f}")
