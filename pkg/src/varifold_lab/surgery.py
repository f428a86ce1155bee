"""Cut-and-paste stationarization.

Keep a varifold inside a ball, discard the rest, and paste one outward ray
per boundary force atom.  Each pasted ray continues its piece straight
through the sphere crossing, so the result balances exactly at the crossing
points and keeps the original small-scale behavior at the ball's center.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DiscreteVarifold, RayPiece, as_vector, restrict
from .variation import DegenerateGeometryError, VariationAtom, boundary_variation


@dataclass(frozen=True)
class SurgeryResult:
    """Outcome of a cut-and-paste: the clipped inside, the pasted rays,
    their superposition, and the boundary atoms that prescribed the rays."""

    inner: DiscreteVarifold
    pasted_rays: tuple[RayPiece, ...]
    combined: DiscreteVarifold
    boundary_atoms: tuple[VariationAtom, ...]


def cut_and_paste(v: DiscreteVarifold, y, r: float) -> SurgeryResult:
    """Replace everything outside B(y, r) by boundary-prescribed rays.

    The boundary force measure of the clipped varifold is purely atomic at
    the transversal sphere crossings, so the pasted part is a finite ray
    list with no discretization error.  When v is stationary in a
    neighborhood of the closed ball, the combined varifold is stationary and
    its dilations at y agree with those of v below scale r.

    Raises DegenerateGeometryError (from the boundary computation) when a
    piece is tangent to the sphere or ends on it; almost every radius works,
    so callers should perturb r (see find_good_radius).
    """
    c = as_vector(y, dim=v.ambient_dim)
    atoms = boundary_variation(v, c, r)
    inner = restrict(v, c, r, "inside")
    pasted = tuple(RayPiece(a.location, a.omega, a.mass) for a in atoms)
    combined = inner + DiscreteVarifold(v.ambient_dim, (), pasted)
    return SurgeryResult(inner, pasted, combined, tuple(atoms))


def find_good_radius(v: DiscreteVarifold, y, r_lo: float, r_hi: float,
                     candidates: int = 16) -> float:
    """First radius in a geometric scan of [r_lo, r_hi] avoiding degeneracy.

    Mirrors the fact that almost every radius admits a clean boundary force
    measure; raises DegenerateGeometryError if every candidate fails.
    """
    if not 0.0 < r_lo <= r_hi:
        raise ValueError("need 0 < r_lo <= r_hi")
    if candidates < 1:
        raise ValueError("need at least one candidate radius")
    c = as_vector(y, dim=v.ambient_dim)
    ratios = np.geomspace(r_lo, r_hi, candidates)
    for r in ratios:
        try:
            boundary_variation(v, c, float(r))
        except DegenerateGeometryError:
            continue
        return float(r)
    raise DegenerateGeometryError(
        f"no clean cutting radius among {candidates} candidates in "
        f"[{r_lo}, {r_hi}]"
    )
