"""Cut-and-paste stationarization.

Keep a varifold inside a ball and replace everything outside by one outward
ray per boundary force atom.  Each ray continues its piece straight through
the sphere, so the result is stationary and has the same blow-ups at the
center as the original.
"""

import numpy as np

from varifold_lab import cut_and_paste, dilate, is_stationary, mass
from varifold_lab.fixtures import random_stationary_network
from varifold_lab.surgery import find_good_radius

rng = np.random.default_rng(7)
net = random_stationary_network(rng, 3, n_vertices=3)
y = 0.5 * (net.segments[0].a + net.segments[0].b)  # a point on the network
r = find_good_radius(net, y, 0.9, 1.6)
print("cutting radius:", r)

result = cut_and_paste(net, y, r)
print("boundary atoms:", len(result.boundary_atoms),
      " pasted rays:", len(result.pasted_rays))
print("combined stationary:", is_stationary(result.combined, 1e-10))

for ray in result.pasted_rays[:3]:
    radial = (ray.origin - y) / np.linalg.norm(ray.origin - y)
    print("  outward dot:", float(np.dot(ray.direction, radial)))

# Blow-ups at the center agree below the cutting scale.
lam = r / 8.0
for rad in (1.0, 3.0, 6.0):
    a = mass(dilate(net, y, lam), np.zeros(3), rad)
    b = mass(dilate(result.combined, y, lam), np.zeros(3), rad)
    print(f"  dilated masses agree on B(0,{rad}): {a:.15f} vs {b:.15f}")
