"""Tomography of conic varifolds from weighted projections onto 2-planes.

The forward side measures band masses of the weighted projection of a cone
onto span(v, xi): an atom z with v-component z1 > 0 crosses the unit slab
along a ray of length 1/z1 and carries the squared in-plane contraction, so
a band [s, t] in the slope lambda = z2/z1 collects

    sum over atoms with s <= lambda <= t of  mass * (z1^2 + z2^2) / z1.

Dividing a band by (1 + lambda^2) at the atom's slope turns band masses into
the marginal of the gnomonic pushforward, and matching marginals across a
small direction battery pins the atoms: that is the reconstruction run here.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import nnls

from .core import ConicVarifold, Subspace, as_vector, conic_atoms, unit


class AmbiguousReconstruction(ValueError):
    """The incidence system does not pin a unique nonnegative atom set."""


class CoverageGap(ValueError):
    """Measured marginal mass is unaccounted for by the reconstruction."""


# ---------------------------------------------------------------------------
# Measures on hyperplanes and lines
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlaneGridDensity:
    """A gridded nonnegative density on a box in plane coordinates."""

    box_min: np.ndarray
    box_max: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        lo = np.array(self.box_min, dtype=float)
        hi = np.array(self.box_max, dtype=float)
        vals = np.array(self.values, dtype=float)
        if lo.shape != hi.shape or vals.ndim != lo.shape[0]:
            raise ValueError("box and value grid dimensions disagree")
        if np.any(hi <= lo) or np.any(vals < 0.0):
            raise ValueError("need box_min < box_max and nonnegative values")
        for a in (lo, hi, vals):
            a.setflags(write=False)
        object.__setattr__(self, "box_min", lo)
        object.__setattr__(self, "box_max", hi)
        object.__setattr__(self, "values", vals)

    @property
    def total_mass(self) -> float:
        cell = np.prod((self.box_max - self.box_min) / np.array(self.values.shape))
        return float(np.sum(self.values) * cell)


@dataclass(frozen=True)
class PlaneMeasure:
    """Atoms (plus an optional gridded density) on a hyperplane of R^n."""

    plane: Subspace
    points: np.ndarray
    masses: np.ndarray
    grid_density: PlaneGridDensity | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        ms = np.array(self.masses, dtype=float)
        if pts.size == 0:
            pts = np.zeros((0, self.plane.ambient_dim))
        if pts.ndim != 2 or pts.shape[1] != self.plane.ambient_dim:
            raise ValueError("points must have shape (k, ambient_dim)")
        if ms.shape != (pts.shape[0],):
            raise ValueError("masses must match points")
        if np.any(ms <= 0.0):
            raise ValueError("atom masses must be positive")
        if pts.shape[0]:
            drift = np.linalg.norm(pts - self.plane.project(pts), axis=1)
            scale = 1.0 + np.linalg.norm(pts, axis=1)
            if np.max(drift / scale) > 1e-12:
                raise ValueError("atom points must lie in the plane")
        pts.setflags(write=False)
        ms.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "masses", ms)

    @property
    def n_atoms(self) -> int:
        return self.points.shape[0]

    @property
    def total_mass(self) -> float:
        m = float(np.sum(self.masses))
        if self.grid_density is not None:
            m += self.grid_density.total_mass
        return m


@dataclass(frozen=True)
class LineMeasure:
    """Atoms plus a piecewise-constant density on an oriented line.

    Atom positions are scalar coordinates along the unit direction; density
    pieces are disjoint sorted intervals with constant nonnegative values.
    """

    direction: np.ndarray
    coordinates: np.ndarray
    masses: np.ndarray
    pieces: tuple[tuple[tuple[float, float], float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "direction", unit(as_vector(self.direction)))
        cs = np.array(self.coordinates, dtype=float)
        ms = np.array(self.masses, dtype=float)
        if cs.shape != ms.shape or cs.ndim != 1:
            raise ValueError("coordinates and masses must be matching vectors")
        if np.any(ms < 0.0):
            raise ValueError("atom masses must be nonnegative")
        prev_end = -math.inf
        for (a, b), val in self.pieces:
            if b <= a or val < 0.0 or a < prev_end:
                raise ValueError("density pieces must be sorted, disjoint, nonnegative")
            prev_end = b
        cs.setflags(write=False)
        ms.setflags(write=False)
        object.__setattr__(self, "coordinates", cs)
        object.__setattr__(self, "masses", ms)

    @property
    def n_atoms(self) -> int:
        return self.coordinates.shape[0]

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses)) + sum(
            (b - a) * val for (a, b), val in self.pieces
        )

    def band_mass(self, s: float, t: float) -> float:
        """Plain measure of the closed coordinate band [s, t]."""
        inside = (self.coordinates >= s) & (self.coordinates <= t)
        m = float(np.sum(self.masses[inside]))
        for (a, b), val in self.pieces:
            m += val * max(0.0, min(b, t) - max(a, s))
        return m


@dataclass(frozen=True)
class BandSpec:
    """A slope band s <= z2/z1 <= t inside the unit slab."""

    s: float
    t: float

    def __post_init__(self):
        if not self.s < self.t:
            raise ValueError("need s < t")


@dataclass(frozen=True)
class FourierSample:
    """One sample of the Fourier transform of a plane measure."""

    frequency: np.ndarray
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "frequency", as_vector(self.frequency))
        if not (math.isfinite(self.value.real) and math.isfinite(self.value.imag)):
            raise ValueError("Fourier value must be finite")


def _bands_array(bands) -> np.ndarray:
    if isinstance(bands, np.ndarray):
        arr = np.asarray(bands, dtype=float)
    else:
        arr = np.array(
            [(b.s, b.t) if isinstance(b, BandSpec) else tuple(b) for b in bands],
            dtype=float,
        )
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("bands must be an (m, 2) array of (s, t) pairs")
    return arr


# ---------------------------------------------------------------------------
# Hyperplanes and direction batteries
# ---------------------------------------------------------------------------

def hyperplane_of(v) -> Subspace:
    """The hyperplane orthogonal to v, with a deterministic orthonormal basis."""
    v = unit(as_vector(v))
    n = v.shape[0]
    sign = 1.0 if v[0] >= 0.0 else -1.0
    w = v.copy()
    w[0] += sign
    H = np.eye(n) - 2.0 * np.outer(w, w) / float(np.dot(w, w))
    return Subspace(n, H[:, 1:].T)


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def marginal_direction_battery(plane: Subspace) -> list[np.ndarray]:
    """d(d+1)/2 + 1 marginal directions: axes, pair diagonals, one generic.

    The final direction is generic relative to the others and is reserved
    for verification by the plane reconstruction.
    """
    d = plane.dim
    dirs = [plane.basis[i] for i in range(d)]
    for i in range(d):
        for j in range(i + 1, d):
            dirs.append(unit(plane.basis[i] + _GOLDEN * plane.basis[j]))
    mix = sum((plane.basis[i] / math.sqrt(i + 2.0) for i in range(d)), np.zeros(plane.ambient_dim))
    dirs.append(unit(mix + _GOLDEN * plane.basis[0]))
    return dirs


def default_normals(ambient_dim: int, extra: int = 1) -> list[np.ndarray]:
    """Signed coordinate directions plus a few deterministic generic ones."""
    normals = []
    for i in range(ambient_dim):
        e = np.zeros(ambient_dim)
        e[i] = 1.0
        normals.append(e.copy())
        normals.append(-e)
    rng = np.random.Generator(np.random.PCG64(20260810))
    for _ in range(max(0, extra)):
        normals.append(unit(rng.normal(size=ambient_dim)))
    return normals


# ---------------------------------------------------------------------------
# Forward operator
# ---------------------------------------------------------------------------

def _cone_rows(c: ConicVarifold) -> tuple[np.ndarray, np.ndarray]:
    """All (direction, mass) rows of a conic varifold, density nodes included."""
    dirs = [c.atom_directions]
    masses = [c.atom_masses]
    if c.density is not None:
        g = c.density.grid
        node_masses = g.weights * c.density.values
        keep = node_masses > 0.0
        dirs.append(g.nodes[keep])
        masses.append(node_masses[keep])
    return np.vstack(dirs), np.concatenate(masses)


class BandOracle:
    """Batched band-mass measurements of a fixed conic varifold.

    Calling oracle(v, xi, bands) returns the forward band masses of the
    weighted projection onto span(v, xi) for every (s, t) row of bands.
    Projections are cached per (v, xi) pair.
    """

    def __init__(self, cone: ConicVarifold):
        self._dirs, self._masses = _cone_rows(cone)
        self.ambient_dim = cone.ambient_dim
        self._cache: dict[bytes, tuple[np.ndarray, np.ndarray]] = {}
        self.query_count = 0

    def _slopes(self, v: np.ndarray, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        key = v.tobytes() + xi.tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        z1 = self._dirs @ v
        z2 = self._dirs @ xi
        front = z1 > 0.0
        lam = z2[front] / z1[front]
        weight = self._masses[front] * (z1[front] ** 2 + z2[front] ** 2) / z1[front]
        self._cache[key] = (lam, weight)
        return lam, weight

    def __call__(self, v, xi, bands) -> np.ndarray:
        v = as_vector(v, dim=self.ambient_dim)
        xi = as_vector(xi, dim=self.ambient_dim)
        arr = _bands_array(bands)
        lam, weight = self._slopes(v, xi)
        self.query_count += len(arr)
        inband = (lam >= arr[:, :1]) & (lam <= arr[:, 1:2])
        return inband @ weight


def band_masses(c: ConicVarifold, v, xi, bands) -> np.ndarray:
    """Forward band masses of the weighted projection onto span(v, xi)."""
    return BandOracle(c)(v, xi, bands)


def band_marginal(c: ConicVarifold, v, xi, bands, cutoff: float = 1e-6) -> LineMeasure:
    """Marginal of the gnomonic pushforward over the given slope bands.

    Band masses come from the forward projection operator; each atom's band
    contribution is divided by (1 + lambda^2) at the atom's exact slope.
    Directions with v-component at or below the cutoff are near-equatorial
    and excluded, as in gnomonic_pushforward.
    """
    v = unit(as_vector(v, dim=c.ambient_dim))
    xi = as_vector(xi, dim=c.ambient_dim)
    if abs(float(np.dot(v, xi))) > 1e-12:
        raise ValueError("xi must be orthogonal to v")
    xi = unit(xi)
    arr = _bands_array(bands)
    dirs, masses = _cone_rows(c)
    z1 = dirs @ v
    z2 = dirs @ xi
    front = z1 > cutoff
    lam = z2[front] / z1[front]
    band_weight = masses[front] * (z1[front] ** 2 + z2[front] ** 2) / z1[front]
    covered = np.zeros(lam.shape, dtype=bool)
    for s, t in arr:
        covered |= (lam >= s) & (lam <= t)
    gamma_mass = band_weight[covered] / (1.0 + lam[covered] ** 2)
    return LineMeasure(xi, lam[covered], gamma_mass)


def fourier_of_marginal(m: LineMeasure, freq: float) -> complex:
    """sum of mass * exp(-i coord freq) plus the exact piecewise integral."""
    total = complex(np.sum(m.masses * np.exp(-1j * m.coordinates * freq)))
    for (a, b), val in m.pieces:
        if freq == 0.0:
            total += val * (b - a)
        else:
            total += val * (np.exp(-1j * a * freq) - np.exp(-1j * b * freq)) / (1j * freq)
    return total


def fourier_of_plane_measure(gamma: PlaneMeasure, frequency) -> FourierSample:
    """gamma-hat(xi) = sum of mass * exp(-i <x, xi>) over the atoms."""
    f = as_vector(frequency, dim=gamma.plane.ambient_dim)
    val = complex(np.sum(gamma.masses * np.exp(-1j * (gamma.points @ f))))
    return FourierSample(f, val)


# ---------------------------------------------------------------------------
# Gnomonic transport between the sphere and a hyperplane
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GnomonicResult:
    """Pushforward measure plus the atoms excluded as near-equatorial."""

    measure: PlaneMeasure
    excluded: tuple[tuple[np.ndarray, float], ...] = ()


def gnomonic_pushforward(c: ConicVarifold, v, cutoff: float = 1e-6) -> GnomonicResult:
    """Transport the hemisphere {<z, v> > 0} of a cone to the plane v-perp.

    An atom (z, m) maps to the point pi_P(z / <z, v>) with mass m <z, v>.
    Atoms with |<z, v>| <= cutoff are excluded and reported so the caller
    can re-run with a different pole; back-hemisphere atoms are simply not
    part of this chart.
    """
    v = unit(as_vector(v, dim=c.ambient_dim))
    plane = hyperplane_of(v)
    dirs, masses = _cone_rows(c)
    points: list[np.ndarray] = []
    out_masses: list[float] = []
    excluded: list[tuple[np.ndarray, float]] = []
    for i in range(dirs.shape[0]):
        h = float(np.dot(dirs[i], v))
        if abs(h) <= cutoff:
            excluded.append((dirs[i], float(masses[i])))
            continue
        if h < 0.0:
            continue
        points.append(plane.project(dirs[i] / h))
        out_masses.append(float(masses[i]) * h)
    pts = np.array(points) if points else np.zeros((0, c.ambient_dim))
    measure = PlaneMeasure(plane, pts, np.array(out_masses))
    return GnomonicResult(measure, tuple(excluded))


def lift_to_sphere(gamma: PlaneMeasure, v) -> ConicVarifold:
    """Inverse gnomonic transport: atom (x, m) lifts to ((x+v)/|x+v|, m |x+v|)."""
    v = unit(as_vector(v, dim=gamma.plane.ambient_dim))
    atoms = []
    for i in range(gamma.n_atoms):
        shifted = gamma.points[i] + v
        norm = float(np.linalg.norm(shifted))
        atoms.append((shifted / norm, float(gamma.masses[i]) * norm))
    return conic_atoms(gamma.plane.ambient_dim, atoms)


# ---------------------------------------------------------------------------
# Atom localization by dyadic band refinement
# ---------------------------------------------------------------------------

def locate_marginal_atoms(
    oracle: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    v: np.ndarray,
    xi: np.ndarray,
    lam_max: float,
    width_target: float = 1e-10,
    mass_tol: float = 1e-9,
    max_depth: int = 80,
) -> LineMeasure:
    """Find the atoms of one marginal using only band-mass measurements.

    Bisects [-lam_max, lam_max], discarding bands whose mass stays at or
    below mass_tol, until active bands are narrower than width_target (or
    than the local floating-point resolution).  Adjacent survivors are
    merged and re-measured once, and each located band mass is divided by
    (1 + lambda^2) at the band midpoint.
    """
    intervals = [(-lam_max, lam_max)]
    for _ in range(max_depth):
        pending = []
        done = []
        for a, b in intervals:
            if (b - a) <= max(width_target, 4e-16 * max(abs(a), abs(b))):
                done.append((a, b))
            else:
                m = 0.5 * (a + b)
                pending.append((a, m))
                pending.append((m, b))
        if not pending:
            break
        masses = oracle(v, xi, np.array(pending))
        intervals = done + [iv for iv, m in zip(pending, masses) if m > mass_tol]
        if not intervals:
            return LineMeasure(xi, np.zeros(0), np.zeros(0))
    intervals.sort()
    merged: list[list[float]] = []
    for a, b in intervals:
        gap = 2.0 * max(width_target, 4e-16 * max(abs(a), abs(b)))
        if merged and a - merged[-1][1] <= gap:
            merged[-1][1] = b
        else:
            merged.append([a, b])
    bands = np.array(merged)
    totals = oracle(v, xi, bands)
    keep = totals > mass_tol
    mids = 0.5 * (bands[:, 0] + bands[:, 1])[keep]
    gamma = totals[keep] / (1.0 + mids**2)
    return LineMeasure(xi, mids, gamma)


# ---------------------------------------------------------------------------
# Incidence solve on a hyperplane
# ---------------------------------------------------------------------------

def _cluster_1d(values: np.ndarray, tol_of) -> list[tuple[float, np.ndarray]]:
    """Group sorted scalars closer than a local tolerance; (rep, indices)."""
    order = np.argsort(values)
    groups: list[list[int]] = []
    for idx in order:
        val = values[idx]
        if groups and val - values[groups[-1][-1]] <= tol_of(val):
            groups[-1].append(int(idx))
        else:
            groups.append([int(idx)])
    return [(float(np.mean(values[g])), np.array(g)) for g in groups]


def reconstruct_plane_measure(
    plane: Subspace,
    marginals: Sequence[LineMeasure],
    k_max: int = 32,
    match_tol: float = 1e-7,
    residual_tol: float = 1e-8,
) -> PlaneMeasure:
    """Recover an atomic plane measure from its one-dimensional marginals.

    Candidate positions are enumerated from an orthogonal subset of the
    marginal directions, candidates incompatible with any other marginal are
    eliminated, and the remaining nonnegative mass assignment is solved by
    least squares on the incidence system.  When more than dim + 1 marginals
    are supplied, the last one is held out and used only to verify the
    solution.  Raises AmbiguousReconstruction when the system is
    rank-deficient, inconsistent, or fails the held-out check.
    """
    d = plane.dim
    if len(marginals) < d:
        raise ValueError(f"need at least {d} marginal directions")
    held_out = None
    solving = list(marginals)
    if len(marginals) > d + 1:
        held_out = solving.pop()

    def tol_of(val: float) -> float:
        return match_tol * (1.0 + abs(val))

    # orthogonal subset used for the candidate grid
    axes: list[int] = []
    for i, m in enumerate(solving):
        if all(abs(float(np.dot(m.direction, solving[j].direction))) <= 1e-9 for j in axes):
            axes.append(i)
        if len(axes) == d:
            break
    if len(axes) < d:
        raise ValueError("marginals do not contain an orthogonal direction subset")

    axis_coord_lists = []
    for i in axes:
        reps = [rep for rep, _ in _cluster_1d(solving[i].coordinates, tol_of)]
        if not reps:
            if any(m.n_atoms for m in marginals):
                raise AmbiguousReconstruction(
                    "an axis marginal is empty while others carry mass"
                )
            return PlaneMeasure(plane, np.zeros((0, plane.ambient_dim)), np.zeros(0))
        axis_coord_lists.append(reps)
    n_candidates = int(np.prod([len(c) for c in axis_coord_lists]))
    if n_candidates > max(200_000, k_max**d):
        raise AmbiguousReconstruction(
            f"candidate grid too large ({n_candidates}); supply cleaner marginals"
        )
    grids = np.meshgrid(*axis_coord_lists, indexing="ij")
    coords = np.column_stack([g.ravel() for g in grids])
    axis_dirs = np.array([solving[i].direction for i in axes])
    candidates = coords @ axis_dirs

    # eliminate candidates incompatible with any non-axis solving marginal
    alive = np.ones(candidates.shape[0], dtype=bool)
    for i, m in enumerate(solving):
        if i in axes:
            continue
        proj = candidates @ m.direction
        ok = np.zeros_like(alive)
        for rep, _ in _cluster_1d(m.coordinates, tol_of):
            ok |= np.abs(proj - rep) <= tol_of(rep)
        alive &= ok
    candidates = candidates[alive]
    if candidates.shape[0] == 0:
        raise AmbiguousReconstruction("no candidate is compatible with all marginals")

    rows: list[np.ndarray] = []
    rhs: list[float] = []
    for m in solving:
        proj = candidates @ m.direction
        markers = np.concatenate([proj, m.coordinates])
        for rep, _ in _cluster_1d(markers, tol_of):
            members = np.abs(proj - rep) <= tol_of(rep)
            if not members.any():
                continue
            measured = float(
                np.sum(m.masses[np.abs(m.coordinates - rep) <= tol_of(rep)])
            )
            rows.append(members.astype(float))
            rhs.append(measured)
    A = np.array(rows)
    b = np.array(rhs)
    if np.linalg.matrix_rank(A) < candidates.shape[0]:
        raise AmbiguousReconstruction(
            "incidence system is rank-deficient; add a marginal direction"
        )
    w, _ = nnls(A, b)
    scale = max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)
    if float(np.max(np.abs(A @ w - b))) > residual_tol * scale:
        raise AmbiguousReconstruction("marginals are mutually inconsistent")

    keep = w > 1e-10
    candidates, w = candidates[keep], w[keep]
    if candidates.shape[0] > k_max:
        raise AmbiguousReconstruction(
            f"solution uses {candidates.shape[0]} atoms, above the budget {k_max}"
        )
    if held_out is not None and candidates.shape[0]:
        proj = candidates @ held_out.direction
        markers = np.concatenate([proj, held_out.coordinates])
        for rep, _ in _cluster_1d(markers, tol_of):
            predicted = float(np.sum(w[np.abs(proj - rep) <= tol_of(rep)]))
            measured = float(
                np.sum(held_out.masses[np.abs(held_out.coordinates - rep) <= tol_of(rep)])
            )
            if abs(predicted - measured) > residual_tol * max(1.0, measured):
                raise AmbiguousReconstruction(
                    "held-out marginal disagrees with the reconstruction"
                )
    return PlaneMeasure(plane, candidates, w)


# ---------------------------------------------------------------------------
# Full conic reconstruction
# ---------------------------------------------------------------------------

def reconstruct_conic(
    oracle: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    ambient_dim: int,
    normals: Sequence[np.ndarray] | None = None,
    k_max: int = 32,
    cutoff: float = 1e-6,
    keep_fraction: float = 0.2,
    coverage_tol: float = 1e-8,
    mass_tol: float = 1e-9,
    workers: int = 1,
) -> ConicVarifold:
    """Recover an atomic conic varifold from band-mass measurements.

    For every supplied normal the positive hemisphere is charted
    gnomonically, the marginal atoms of a direction battery are located by
    dyadic band refinement, the plane measure is solved from the incidence
    system and lifted back to the sphere.  Hemisphere results are merged,
    keeping well-conditioned recoveries (pole component above
    keep_fraction); an atom recovered twice is identified when directions
    agree within 1e-6 radians and masses within 1e-8.

    Raises AmbiguousReconstruction from the plane solve and CoverageGap when
    located marginal mass is not explained by the merged reconstruction.
    """
    if normals is None:
        normals = default_normals(ambient_dim)
    normals = [unit(as_vector(nv, dim=ambient_dim)) for nv in normals]
    keep_cut = min(keep_fraction, 0.9 / math.sqrt(ambient_dim))
    lam_max = 2.0 / cutoff

    def chart(v: np.ndarray):
        plane = hyperplane_of(v)
        battery = marginal_direction_battery(plane)
        marginals = [
            locate_marginal_atoms(oracle, v, xi, lam_max, mass_tol=mass_tol)
            for xi in battery
        ]
        return v, plane, marginals

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            charts = list(pool.map(chart, normals))
    else:
        charts = [chart(v) for v in normals]

    kept: list[tuple[np.ndarray, float, float]] = []  # (direction, mass, pole dot)
    for v, plane, marginals in charts:
        if all(m.n_atoms == 0 for m in marginals):
            continue
        gamma = reconstruct_plane_measure(plane, marginals, k_max=k_max)
        cone_v = lift_to_sphere(gamma, v)
        for i in range(cone_v.n_atoms):
            z = cone_v.atom_directions[i]
            h = float(np.dot(z, v))
            if h >= keep_cut:
                kept.append((z, float(cone_v.atom_masses[i]), h))

    final: list[tuple[np.ndarray, float, float]] = []
    for z, m, h in kept:
        for i, (zf, mf, hf) in enumerate(final):
            if float(np.linalg.norm(z - zf)) < 1e-6:
                if abs(m - mf) > 1e-8:
                    raise AmbiguousReconstruction(
                        "conflicting masses for the same recovered direction"
                    )
                if h > hf:
                    final[i] = (z, m, h)
                break
        else:
            final.append((z, m, h))

    if final:
        result = conic_atoms(ambient_dim, [(z, m) for z, m, _ in final])
    else:
        result = ConicVarifold(ambient_dim)

    # attest that every located marginal atom is explained by the result:
    # the full hemisphere mass of the reconstruction bounds what any one
    # marginal window can see, so located mass above it is unaccounted for
    for v, plane, marginals in charts:
        explained = 0.0
        for i in range(result.n_atoms):
            h = float(np.dot(result.atom_directions[i], v))
            if h > 0.0:
                explained += float(result.atom_masses[i]) * h
        for m in marginals:
            unaccounted = float(np.sum(m.masses)) - explained
            if unaccounted > coverage_tol:
                raise CoverageGap(
                    f"marginal mass {unaccounted:.3e} unaccounted for under "
                    f"normal {np.array2string(v, precision=3)}"
                )
    return result
