"""Geometric primitives for one-dimensional varifold calculus.

A discrete varifold is a finite list of weighted segments and rays in R^n.
A conic varifold is a measure on the unit sphere (atoms plus an optional
quadrature-sampled density); its cone is the superposition of rays from the
origin.  All values are immutable after construction and every operation is
a pure function, so everything here is safe to use concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

# Absolute tolerances for geometric predicates (double-precision headroom).
UNIT_TOL = 1e-12
ATOM_SEPARATION_TOL = 1e-9
VERTEX_TOL = 1e-9

# Length below which a clipped sliver is discarded instead of kept as a piece.
SLIVER_TOL = 1e-14


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a read-only float vector, optionally checking its length."""
    v = np.array(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"expected a vector of length {dim}, got {v.shape[0]}")
    v.setflags(write=False)
    return v


def unit(v: np.ndarray) -> np.ndarray:
    """v / |v|.  Single shared code path so equal inputs give equal bits."""
    n = math.sqrt(float(np.dot(v, v)))
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    u = v / n
    u.setflags(write=False)
    return u


@dataclass(frozen=True)
class Subspace:
    """A k-dimensional linear subspace of R^n given by an orthonormal basis.

    basis has shape (k, n) with orthonormal rows, 1 <= k < n.
    """

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[1] != self.ambient_dim:
            raise ValueError("basis must have shape (k, ambient_dim)")
        k = b.shape[0]
        if not 1 <= k < self.ambient_dim:
            raise ValueError("subspace dimension must satisfy 1 <= k < n")
        gram = b @ b.T
        if not np.allclose(gram, np.eye(k), rtol=0.0, atol=UNIT_TOL):
            raise ValueError("basis rows must be orthonormal within 1e-12")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @classmethod
    def span(cls, *vectors) -> "Subspace":
        """Subspace spanned by the given vectors (orthonormalized)."""
        m = np.atleast_2d(np.array(vectors, dtype=float))
        q, r = np.linalg.qr(m.T)
        keep = np.abs(np.diag(r)) > 1e-13
        b = q.T[keep]
        # fix signs so span(e1) has basis +e1, not -e1
        for i in range(b.shape[0]):
            j = int(np.argmax(np.abs(b[i])))
            if b[i, j] < 0:
                b[i] = -b[i]
        return cls(ambient_dim=m.shape[1], basis=b)

    def project(self, x: np.ndarray) -> np.ndarray:
        """Orthogonal projection onto the subspace (points or (m, n) batches)."""
        x = np.asarray(x, dtype=float)
        return (x @ self.basis.T) @ self.basis

    def coordinates(self, x: np.ndarray) -> np.ndarray:
        """Coefficients of pi(x) in the basis."""
        return np.asarray(x, dtype=float) @ self.basis.T


@dataclass(frozen=True)
class SegmentPiece:
    """A weighted straight segment [a, b] with multiplicity weight > 0."""

    a: np.ndarray
    b: np.ndarray
    weight: float

    def __post_init__(self):
        object.__setattr__(self, "a", as_vector(self.a))
        object.__setattr__(self, "b", as_vector(self.b, dim=self.a.shape[0]))
        object.__setattr__(self, "weight", float(self.weight))
        if self.weight <= 0.0:
            raise ValueError("segment weight must be positive")
        if self.length == 0.0:
            raise ValueError("segment endpoints must be distinct")

    @property
    def length(self) -> float:
        d = self.b - self.a
        return math.sqrt(float(np.dot(d, d)))

    @property
    def direction(self) -> np.ndarray:
        return unit(self.b - self.a)


@dataclass(frozen=True)
class RayPiece:
    """A weighted half line from origin along a unit direction."""

    origin: np.ndarray
    direction: np.ndarray
    weight: float

    def __post_init__(self):
        object.__setattr__(self, "origin", as_vector(self.origin))
        object.__setattr__(
            self, "direction", as_vector(self.direction, dim=self.origin.shape[0])
        )
        object.__setattr__(self, "weight", float(self.weight))
        if self.weight <= 0.0:
            raise ValueError("ray weight must be positive")
        if abs(float(np.dot(self.direction, self.direction)) - 1.0) > 1e-10:
            raise ValueError("ray direction must be a unit vector")


Piece = SegmentPiece | RayPiece


@dataclass(frozen=True)
class DiscreteVarifold:
    """A finite superposition of weighted segments and rays in R^n.

    Coincident or overlapping pieces are kept as separate entries; every
    operation sums contributions and never merges geometry.
    """

    ambient_dim: int
    segments: tuple[SegmentPiece, ...] = ()
    rays: tuple[RayPiece, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "rays", tuple(self.rays))
        for p in self.pieces():
            d = p.a.shape[0] if isinstance(p, SegmentPiece) else p.origin.shape[0]
            if d != self.ambient_dim:
                raise ValueError("piece dimension does not match ambient_dim")

    def pieces(self) -> tuple[Piece, ...]:
        return self.segments + self.rays

    @property
    def is_empty(self) -> bool:
        return not self.segments and not self.rays

    def __add__(self, other: "DiscreteVarifold") -> "DiscreteVarifold":
        if other.ambient_dim != self.ambient_dim:
            raise ValueError("ambient dimensions differ")
        return DiscreteVarifold(
            self.ambient_dim, self.segments + other.segments, self.rays + other.rays
        )


# ---------------------------------------------------------------------------
# Sphere quadrature grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SphereGrid:
    """Quadrature nodes and weights on the unit sphere, named by a descriptor.

    Descriptors: "s1:<N>" is the uniform angular grid on the circle with
    trapezoid weights 2*pi/N; "s2:<NPOLAR>x<NAZ>" is a product grid on S^2,
    midpoint in the polar angle (sin-weighted) times uniform azimuth.
    """

    descriptor: str
    nodes: np.ndarray
    weights: np.ndarray
    angles: np.ndarray | None = None  # S^1 grids keep their angles

    def __post_init__(self):
        for name in ("nodes", "weights"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.angles is not None:
            a = np.array(self.angles, dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, "angles", a)

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.nodes.shape[1]


def circle_grid(n_nodes: int = 720) -> SphereGrid:
    """Uniform angular grid on S^1 with equal weights 2*pi/N."""
    if n_nodes < 4:
        raise ValueError("need at least 4 nodes on the circle")
    theta = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    nodes = np.column_stack([np.cos(theta), np.sin(theta)])
    weights = np.full(n_nodes, 2.0 * np.pi / n_nodes)
    return SphereGrid(f"s1:{n_nodes}", nodes, weights, angles=theta)


def sphere_grid(n_polar: int = 64, n_azimuth: int = 128) -> SphereGrid:
    """Product grid on S^2: midpoint rule in polar angle, uniform azimuth."""
    if n_polar < 2 or n_azimuth < 4:
        raise ValueError("grid too coarse")
    pol = (np.arange(n_polar) + 0.5) * np.pi / n_polar
    az = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    P, A = np.meshgrid(pol, az, indexing="ij")
    nodes = np.column_stack(
        [
            (np.sin(P) * np.cos(A)).ravel(),
            (np.sin(P) * np.sin(A)).ravel(),
            np.cos(P).ravel(),
        ]
    )
    w = (np.sin(P) * (np.pi / n_polar) * (2.0 * np.pi / n_azimuth)).ravel()
    return SphereGrid(f"s2:{n_polar}x{n_azimuth}", nodes, w)


def grid_from_descriptor(descriptor: str) -> SphereGrid:
    """Rebuild a quadrature grid from its serialized descriptor string."""
    kind, _, spec = descriptor.partition(":")
    if kind == "s1":
        return circle_grid(int(spec))
    if kind == "s2":
        np_, _, na = spec.partition("x")
        return sphere_grid(int(np_), int(na))
    raise ValueError(f"unknown sphere grid descriptor {descriptor!r}")


@dataclass(frozen=True)
class SampledDensity:
    """A nonnegative density on the sphere sampled at quadrature nodes."""

    grid: SphereGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.size,):
            raise ValueError("values must match the grid size")
        if np.any(v < 0.0):
            raise ValueError("density values must be nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def total_mass(self) -> float:
        return float(np.dot(self.grid.weights, self.values))


@dataclass(frozen=True)
class ConicVarifold:
    """A conic 1-varifold: a measure mu on S^{n-1}, rays weighted by d(mu).

    atom_directions has shape (k, n) with pairwise-distinct unit rows and
    atom_masses shape (k,) positive.  density optionally adds a sampled
    continuous part.
    """

    ambient_dim: int
    atom_directions: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    atom_masses: np.ndarray = field(default_factory=lambda: np.zeros(0))
    density: SampledDensity | None = None

    def __post_init__(self):
        dirs = np.array(self.atom_directions, dtype=float)
        masses = np.array(self.atom_masses, dtype=float)
        if dirs.size == 0:
            dirs = np.zeros((0, self.ambient_dim))
        if dirs.ndim != 2 or dirs.shape[1] != self.ambient_dim:
            raise ValueError("atom_directions must have shape (k, ambient_dim)")
        if masses.shape != (dirs.shape[0],):
            raise ValueError("atom_masses must match atom_directions")
        if np.any(masses <= 0.0):
            raise ValueError("atom masses must be positive")
        norms = np.linalg.norm(dirs, axis=1)
        if dirs.shape[0] and np.max(np.abs(norms - 1.0)) > 1e-10:
            raise ValueError("atom directions must be unit vectors")
        if dirs.shape[0] > 1:
            # pairwise distinct within the angular separation tolerance
            d2 = np.linalg.norm(dirs[:, None, :] - dirs[None, :, :], axis=2)
            np.fill_diagonal(d2, np.inf)
            if np.min(d2) <= ATOM_SEPARATION_TOL:
                raise ValueError("atom directions must be pairwise distinct")
        if self.density is not None and self.density.grid.ambient_dim != self.ambient_dim:
            raise ValueError("density grid dimension does not match ambient_dim")
        dirs.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "atom_directions", dirs)
        object.__setattr__(self, "atom_masses", masses)

    @property
    def n_atoms(self) -> int:
        return self.atom_directions.shape[0]

    @property
    def is_empty(self) -> bool:
        return self.n_atoms == 0 and self.density is None

    @property
    def total_mass(self) -> float:
        m = float(np.sum(self.atom_masses))
        if self.density is not None:
            m += self.density.total_mass
        return m


def conic_atoms(ambient_dim: int, atoms: Iterable[tuple[Sequence[float], float]],
                density: SampledDensity | None = None) -> ConicVarifold:
    """Build a ConicVarifold from (direction, mass) pairs, merging duplicates.

    Directions already unit to within rounding are kept bit for bit, so a
    cone assembled from existing ray directions realizes exactly those rays.
    """
    dirs: list[np.ndarray] = []
    masses: list[float] = []
    for d, m in atoms:
        z = np.array(d, dtype=float)
        if abs(float(np.dot(z, z)) - 1.0) > 1e-13:
            z = unit(z)
        z.setflags(write=False)
        for i, existing in enumerate(dirs):
            if np.linalg.norm(existing - z) <= ATOM_SEPARATION_TOL:
                masses[i] += float(m)
                break
        else:
            dirs.append(z)
            masses.append(float(m))
    arr = np.array(dirs) if dirs else np.zeros((0, ambient_dim))
    return ConicVarifold(ambient_dim, arr, np.array(masses), density)


@dataclass(frozen=True)
class DensityValue:
    """Lower and upper one-dimensional density at a point; value when equal."""

    lower: float
    upper: float
    value: float | None = None

    def __post_init__(self):
        if self.lower < 0.0 or self.upper < self.lower:
            raise ValueError("need 0 <= lower <= upper")
        if self.value is not None and abs(self.value - self.lower) > UNIT_TOL:
            raise ValueError("value must equal lower when present")


# ---------------------------------------------------------------------------
# Line / ball clipping
# ---------------------------------------------------------------------------

def _piece_frame(piece: Piece) -> tuple[np.ndarray, np.ndarray, float]:
    """Return (base, unit direction, parameter upper bound) for a piece."""
    if isinstance(piece, SegmentPiece):
        return piece.a, piece.direction, piece.length
    return piece.origin, piece.direction, math.inf


def ball_interval(base: np.ndarray, direction: np.ndarray, center: np.ndarray,
                  radius: float) -> tuple[float, float] | None:
    """Parameter interval where base + t*direction lies in the open ball.

    direction must be a unit vector; returns None when the line misses.
    """
    d = base - center
    bh = float(np.dot(d, direction))
    q = float(np.dot(d, d)) - radius * radius
    disc = bh * bh - q
    if disc <= 0.0:
        return None
    s = math.sqrt(disc)
    return (-bh - s, -bh + s)


def mass(v: DiscreteVarifold, center, radius: float) -> float:
    """Total weighted length of v inside the open ball B(center, radius)."""
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    c = as_vector(center, dim=v.ambient_dim)
    total = 0.0
    for piece in v.pieces():
        base, u, hi = _piece_frame(piece)
        iv = ball_interval(base, u, c, radius)
        if iv is None:
            continue
        lo = max(iv[0], 0.0)
        hi_t = min(iv[1], hi)
        if hi_t > lo:
            total += piece.weight * (hi_t - lo)
    return total


def density(v: DiscreteVarifold, x) -> DensityValue:
    """One-dimensional density of v at x (exact for piecewise-linear v).

    A piece whose relative interior contains x contributes its weight; a
    piece with an endpoint at x contributes half.  Lower and upper densities
    coincide because finite piece lists make the mass ratio eventually
    constant in the radius.
    """
    p = as_vector(x, dim=v.ambient_dim)
    total = 0.0
    for piece in v.pieces():
        base, u, hi = _piece_frame(piece)
        d = p - base
        t = float(np.dot(d, u))
        perp2 = float(np.dot(d, d)) - t * t
        if perp2 > VERTEX_TOL * VERTEX_TOL:
            continue
        at_start = abs(t) <= VERTEX_TOL and float(np.linalg.norm(d)) <= VERTEX_TOL
        at_end = math.isfinite(hi) and abs(t - hi) <= VERTEX_TOL
        if at_start or at_end:
            total += 0.5 * piece.weight
        elif 0.0 < t < hi:
            total += piece.weight
    return DensityValue(lower=total, upper=total, value=total)


def dilate(v: DiscreteVarifold, x, lam: float) -> DiscreteVarifold:
    """Image of v under y -> (y - x) / lam; weights unchanged."""
    if lam <= 0.0:
        raise ValueError("dilation factor must be positive")
    c = as_vector(x, dim=v.ambient_dim)
    segs = tuple(
        SegmentPiece((s.a - c) / lam, (s.b - c) / lam, s.weight) for s in v.segments
    )
    rays = tuple(
        RayPiece((r.origin - c) / lam, r.direction, r.weight) for r in v.rays
    )
    return DiscreteVarifold(v.ambient_dim, segs, rays)


def restrict(v: DiscreteVarifold, center, radius: float,
             keep: Literal["inside", "outside"] = "inside") -> DiscreteVarifold:
    """Clip every piece to the open ball B(center, radius) or its complement."""
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    if keep not in ("inside", "outside"):
        raise ValueError("keep must be 'inside' or 'outside'")
    c = as_vector(center, dim=v.ambient_dim)
    segs: list[SegmentPiece] = []
    rays: list[RayPiece] = []

    def emit_segment(base, u, lo, hi, w):
        if hi - lo > SLIVER_TOL:
            segs.append(SegmentPiece(base + lo * u, base + hi * u, w))

    for piece in v.pieces():
        base, u, hi = _piece_frame(piece)
        iv = ball_interval(base, u, c, radius)
        inside = None
        if iv is not None:
            lo_t, hi_t = max(iv[0], 0.0), min(iv[1], hi)
            if hi_t > lo_t:
                inside = (lo_t, hi_t)
        if keep == "inside":
            if inside is not None:
                emit_segment(base, u, inside[0], inside[1], piece.weight)
            continue
        # complement: the piece minus the inside interval
        if inside is None:
            if isinstance(piece, SegmentPiece):
                segs.append(piece)
            else:
                rays.append(piece)
            continue
        lo_t, hi_t = inside
        emit_segment(base, u, 0.0, lo_t, piece.weight)
        if math.isfinite(hi):
            emit_segment(base, u, hi_t, hi, piece.weight)
        elif hi_t < math.inf:
            rays.append(RayPiece(base + hi_t * u, u, piece.weight))
    return DiscreteVarifold(v.ambient_dim, tuple(segs), tuple(rays))


def conic_to_discrete(c: ConicVarifold, r_max: float = 1.0) -> DiscreteVarifold:
    """Realize the cone of a conic varifold as rays from the origin.

    Atoms become rays with their own masses; density nodes become rays with
    quadrature-weighted masses.  r_max only matters to downstream sampling,
    the emitted rays are genuine half lines.
    """
    if r_max <= 0.0:
        raise ValueError("r_max must be positive")
    if c.is_empty:
        raise ValueError("conic varifold has neither atoms nor density")
    rays = [
        RayPiece(np.zeros(c.ambient_dim), c.atom_directions[i], c.atom_masses[i])
        for i in range(c.n_atoms)
    ]
    if c.density is not None:
        g = c.density.grid
        for i in range(g.size):
            w = g.weights[i] * c.density.values[i]
            if w > 0.0:
                rays.append(RayPiece(np.zeros(c.ambient_dim), g.nodes[i], w))
    return DiscreteVarifold(c.ambient_dim, (), tuple(rays))


# ---------------------------------------------------------------------------
# Mode-exact integrals of sampled circle densities
# ---------------------------------------------------------------------------

def _circle_modes(values: np.ndarray) -> np.ndarray:
    """Fourier coefficients a_k (k = 0..N//2) of the trigonometric interpolant."""
    return np.fft.rfft(np.asarray(values, dtype=float)) / len(values)


def _integrate_modes(coeffs: np.ndarray, kernel_hat: np.ndarray, n_nodes: int) -> float:
    """Real integral sum over modes; kernel_hat[k] = int e^{ik theta} K(theta)."""
    vals = coeffs * kernel_hat
    total = vals[0].real
    if n_nodes % 2 == 0:
        total += 2.0 * float(np.sum(vals[1:-1]).real) + vals[-1].real
    else:
        total += 2.0 * float(np.sum(vals[1:]).real)
    return total


def circle_arc_mass(c: ConicVarifold, lo: float, hi: float) -> float:
    """mu of the angular arc (lo, hi) for a conic varifold on S^1.

    Atoms count when their angle falls in the arc modulo 2*pi; the sampled
    density is integrated mode-exactly as a trigonometric interpolant.
    """
    if c.ambient_dim != 2:
        raise ValueError("arc masses are defined on the circle only")
    if hi <= lo:
        raise ValueError("need lo < hi")
    total = 0.0
    for i in range(c.n_atoms):
        ang = math.atan2(c.atom_directions[i, 1], c.atom_directions[i, 0])
        if (ang - lo) % (2.0 * np.pi) < hi - lo:
            total += float(c.atom_masses[i])
    if c.density is not None:
        n = c.density.grid.size
        coeffs = _circle_modes(c.density.values)
        ks = np.arange(len(coeffs))
        kernel = np.empty(len(coeffs), dtype=complex)
        kernel[0] = hi - lo
        kk = ks[1:]
        kernel[1:] = (np.exp(1j * kk * hi) - np.exp(1j * kk * lo)) / (1j * kk)
        total += _integrate_modes(coeffs, kernel, n)
    return total


def sphere_total_mass(c: ConicVarifold) -> float:
    """mu(S^{n-1}): atom masses plus the quadrature mass of the density."""
    return c.total_mass


# ---------------------------------------------------------------------------
# Vertex bookkeeping shared by the variation and blow-up machinery
# ---------------------------------------------------------------------------

def split_at_point(v: DiscreteVarifold, x) -> DiscreteVarifold:
    """Split every piece whose relative interior contains x at x exactly.

    Endpoints within the vertex tolerance of x are snapped onto x, and every
    piece touching x is re-anchored to start there, so that dilations about
    x keep the anchor at the exact origin.
    """
    p = as_vector(x, dim=v.ambient_dim)
    segs: list[SegmentPiece] = []
    rays: list[RayPiece] = []
    for s in v.segments:
        a, b = s.a, s.b
        if np.linalg.norm(a - p) <= VERTEX_TOL:
            a = p
        if np.linalg.norm(b - p) <= VERTEX_TOL and a is not p:
            b = p
        if b is p and a is not p:
            a, b = b, a
        d = p - a
        u = unit(b - a)
        t = float(np.dot(d, u))
        perp2 = float(np.dot(d, d)) - t * t
        L = float(np.linalg.norm(b - a))
        if perp2 <= VERTEX_TOL * VERTEX_TOL and VERTEX_TOL < t < L - VERTEX_TOL:
            segs.append(SegmentPiece(p, a, s.weight))
            segs.append(SegmentPiece(p, b, s.weight))
        else:
            segs.append(SegmentPiece(a, b, s.weight))
    for r in v.rays:
        o = r.origin
        if np.linalg.norm(o - p) <= VERTEX_TOL:
            o = p
        d = p - o
        t = float(np.dot(d, r.direction))
        perp2 = float(np.dot(d, d)) - t * t
        if perp2 <= VERTEX_TOL * VERTEX_TOL and t > VERTEX_TOL:
            segs.append(SegmentPiece(p, o, r.weight))
            rays.append(RayPiece(p, r.direction, r.weight))
        else:
            rays.append(RayPiece(o, r.direction, r.weight))
    return DiscreteVarifold(v.ambient_dim, tuple(segs), tuple(rays))


def incident_rays(v: DiscreteVarifold, x) -> list[tuple[np.ndarray, float]]:
    """(away-direction, weight) for every piece end lying at x.

    Both endpoints of a segment can be at distinct vertices; only the ends
    within the vertex tolerance of x contribute here.
    """
    p = as_vector(x, dim=v.ambient_dim)
    out: list[tuple[np.ndarray, float]] = []
    for s in v.segments:
        if np.linalg.norm(s.a - p) <= VERTEX_TOL:
            out.append((unit(s.b - s.a), s.weight))
        if np.linalg.norm(s.b - p) <= VERTEX_TOL:
            out.append((unit(s.a - s.b), s.weight))
    for r in v.rays:
        if np.linalg.norm(r.origin - p) <= VERTEX_TOL:
            out.append((r.direction, r.weight))
    return out


def cluster_points(points: Sequence[np.ndarray], tol: float = VERTEX_TOL) -> list[np.ndarray]:
    """Greedy clustering of near-coincident points; returns representatives."""
    reps: list[np.ndarray] = []
    for q in points:
        for rep in reps:
            if np.linalg.norm(rep - q) <= tol:
                break
        else:
            reps.append(q)
    return reps
