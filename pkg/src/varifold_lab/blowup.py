"""Tangent-cone estimation by dilation, with a computable weak-* surrogate.

Piecewise-linear varifolds reach their tangent cone at a finite scale: once
the dilation factor drops below the distance to all non-incident pieces,
the rescaled varifold restricted to the test ball literally equals the cone
spanned by the incident pieces.  The battery distance below is built so
that this equality registers as an exact floating-point zero: pieces are
split at the blow-up point, quadrature cells are anchored to the piece's
closest approach to the origin, and pairings are summed in sorted order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import (
    ATOM_SEPARATION_TOL,
    ConicVarifold,
    DiscreteVarifold,
    RayPiece,
    Subspace,
    _piece_frame,
    as_vector,
    ball_interval,
    conic_atoms,
    conic_to_discrete,
    density,
    dilate,
    incident_rays,
    split_at_point,
    unit,
)
from .variation import _plateau, _plateau_prime


class ZeroDensityError(ValueError):
    """Blow-up requested at a point where the varifold has zero density."""


class PreconditionViolated(ValueError):
    """A hypothesis of the projected-density bounds does not hold."""


class DensityBoundViolation(AssertionError):
    """The projected cone density left its certified interval."""


# ---------------------------------------------------------------------------
# Test batteries and pairings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BatteryFunction:
    """A bounded test function f(point, direction), even in the direction."""

    label: str
    value: Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TestBattery:
    """Lipschitz test functions supported in the ball of a common radius."""

    ambient_dim: int
    radius: float
    functions: tuple[BatteryFunction, ...]

    def validate(self, rng: np.random.Generator, samples: int = 64) -> None:
        """Sampled checks: support vanishing and Lipschitz constant <= 1 (5%)."""
        n = self.ambient_dim
        for f in self.functions:
            for _ in range(samples):
                x = unit(rng.normal(size=n)) * self.radius * rng.uniform(1.0, 2.0)
                s = unit(rng.normal(size=n))
                if float(f.value(x[None, :], s)[0]) != 0.0:
                    raise ValueError(f"{f.label} does not vanish outside the ball")
            for _ in range(samples):
                x1 = rng.normal(size=n) * self.radius * 0.5
                x2 = rng.normal(size=n) * self.radius * 0.5
                s1 = unit(rng.normal(size=n))
                s2 = unit(rng.normal(size=n))
                lhs = abs(float(f.value(x1[None, :], s1)[0] - f.value(x2[None, :], s2)[0]))
                gap = float(np.linalg.norm(x1 - x2)) + min(
                    float(np.linalg.norm(s1 - s2)), float(np.linalg.norm(s1 + s2))
                )
                if lhs > 1.05 * gap:
                    raise ValueError(f"{f.label} exceeds Lipschitz constant 1")


_PLATEAU_SLOPE = float(
    np.max(np.abs(_plateau_prime(np.linspace(-1.0, 1.0, 20_001))))
)


def _direction_moment(u: np.ndarray) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    def moment(points: np.ndarray, s: np.ndarray) -> np.ndarray:
        d = float(np.dot(s, u)) ** 2
        return np.full(points.shape[0], d)

    return moment


def default_battery(
    ambient_dim: int,
    radius: float = 1.0,
    n_scales: int = 8,
    n_directions: int = 8,
    seed: int = 7,
) -> TestBattery:
    """Products of radial lumps at n_scales scales with squared direction
    moments for n_directions quasi-random axes; normalized to Lipschitz 1.

    Squaring the direction moment makes every function even in s, as
    unoriented pieces require.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    axes = [unit(rng.normal(size=ambient_dim)) for _ in range(n_directions)]
    fns = []
    for j in range(n_scales):
        rj = radius * (j + 1) / n_scales
        amp = 1.0 / (_PLATEAU_SLOPE / rj + 2.0)
        for k, u in enumerate(axes):
            moment = _direction_moment(u)

            def value(points, s, rj=rj, amp=amp, moment=moment):
                rad = np.linalg.norm(points, axis=1)
                return amp * _plateau(rad / rj) * moment(points, s)

            fns.append(BatteryFunction(f"lump{j}-axis{k}", value))
    return TestBattery(ambient_dim, radius, tuple(fns))


def cutoff_constant(radius: float) -> BatteryFunction:
    """A smoothly cut constant: 1 on the half-radius ball, 0 outside."""

    def value(points, s):
        rad = np.linalg.norm(points, axis=1)
        return _plateau(rad / radius)

    return BatteryFunction("cutoff-constant", value)


def _piece_samples(
    v: DiscreteVarifold, radius: float, cells: int
) -> list[tuple[np.ndarray, np.ndarray, np.ndarray, float]]:
    """Midpoint cells of every piece clipped to B(0, radius).

    Cells sit on an absolute grid anchored at the piece line's closest
    approach to the origin, so subdividing a piece (or swapping a long
    segment for the ray it stabilizes to) reproduces the same cells bit for
    bit.
    """
    h = radius / cells
    out = []
    for piece in v.pieces():
        base, u, hi = _piece_frame(piece)
        iv = ball_interval(base, u, np.zeros(v.ambient_dim), radius)
        if iv is None:
            continue
        lo_t = max(iv[0], 0.0)
        hi_t = min(iv[1], hi)
        if hi_t <= lo_t:
            continue
        foot = -float(np.dot(base, u))
        k_lo = math.floor((lo_t - foot) / h)
        k_hi = math.ceil((hi_t - foot) / h)
        edges = np.clip(foot + np.arange(k_lo, k_hi + 1) * h, lo_t, hi_t)
        lens = np.diff(edges)
        mids = 0.5 * (edges[:-1] + edges[1:])
        keep = lens > 0.0
        points = base + mids[keep, None] * u
        out.append((points, u, lens[keep], piece.weight))
    return out


def pair_with(
    v: DiscreteVarifold,
    f: BatteryFunction,
    radius: float,
    cells: int = 256,
) -> float:
    """Integral of f(x, direction) over v inside B(0, radius).

    Midpoint quadrature on the canonical cell grid; per-piece contributions
    are summed in sorted order so equal piece multisets pair identically.
    """
    contribs = [
        w * float(np.dot(lens, f.value(points, u)))
        for points, u, lens, w in _piece_samples(v, radius, cells)
    ]
    return float(np.sum(np.sort(np.array(contribs)))) if contribs else 0.0


def _pair_all(samples, battery: TestBattery) -> np.ndarray:
    vals = np.empty(len(battery.functions))
    for i, f in enumerate(battery.functions):
        contribs = [
            w * float(np.dot(lens, f.value(points, u)))
            for points, u, lens, w in samples
        ]
        vals[i] = float(np.sum(np.sort(np.array(contribs)))) if contribs else 0.0
    return vals


def weak_star_distance(
    v1: DiscreteVarifold,
    v2: DiscreteVarifold,
    battery: TestBattery,
    cells: int = 256,
) -> float:
    """Max pairing difference over the battery; zero for equal piece multisets."""
    if v1.ambient_dim != v2.ambient_dim:
        raise ValueError("ambient dimensions differ")
    s1 = _piece_samples(v1, battery.radius, cells)
    s2 = _piece_samples(v2, battery.radius, cells)
    return float(np.max(np.abs(_pair_all(s1, battery) - _pair_all(s2, battery))))


# ---------------------------------------------------------------------------
# Tangent estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TangentDiagnostics:
    """Distances of the dilation sequence to the estimated cone."""

    lambdas: tuple[float, ...]
    distances: tuple[float, ...]

    @property
    def stabilized_at(self) -> int | None:
        """First index from which the distance is exactly zero onward."""
        idx = None
        for i, d in enumerate(self.distances):
            if d == 0.0:
                if idx is None:
                    idx = i
            else:
                idx = None
        return idx


def tangent_estimate(
    v: DiscreteVarifold,
    x,
    lambdas: Sequence[float],
    battery: TestBattery | None = None,
    cells: int = 256,
) -> tuple[ConicVarifold, TangentDiagnostics]:
    """Tangent cone of v at x with stabilization diagnostics.

    The cone is spanned by the pieces incident to x (exact once the dilation
    factor beats the distance to every non-incident piece).  Diagnostics
    report the battery distance between each dilation and the cone; with
    power-of-two dilation factors the sequence hits exactly 0 at the
    stabilization scale.  Raises ZeroDensityError off the support.
    """
    lams = [float(l) for l in lambdas]
    if any(l <= 0.0 for l in lams):
        raise ValueError("dilation factors must be positive")
    if any(b >= a for a, b in zip(lams, lams[1:])):
        raise ValueError("dilation factors must be strictly decreasing")
    p = as_vector(x, dim=v.ambient_dim)
    if density(v, p).value == 0.0:
        raise ZeroDensityError("point carries no density; every blow-up is empty")
    vs = split_at_point(v, p)
    cone = conic_atoms(v.ambient_dim, incident_rays(vs, p))
    cone_discrete = conic_to_discrete(cone)
    if battery is None:
        battery = default_battery(v.ambient_dim)
    dists = tuple(
        weak_star_distance(dilate(vs, p, l), cone_discrete, battery, cells=cells)
        for l in lams
    )
    return cone, TangentDiagnostics(tuple(lams), dists)


# ---------------------------------------------------------------------------
# Projected density bounds for localized cones
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityBoundReport:
    """Certified interval check for the projected localized-cone density."""

    lower: float
    upper: float
    lower_bound: float
    upper_bound: float
    pole_distance: float
    atom_mass: float
    epsilon: float
    radius: float


def _projected_localized_density(
    c: ConicVarifold, y: np.ndarray, p: Subspace, r: float
) -> float:
    """Density at pi_P(y) of the weighted projection of the cone cut to B(y, r).

    Computed atom by atom: the ball chord of the ray through z projects to a
    segment along pi_P(z), whose direction is known exactly, so no clipped
    endpoints enter the arithmetic.  A chord contributes its image weight
    when the target point is interior, half at an image endpoint.
    """
    dirs, masses = _sphere_ball_masses_rows(c)
    q = p.project(y)
    total = 0.0
    for z, m in zip(dirs, masses):
        bh = float(np.dot(z, y))
        disc = bh * bh - 1.0 + r * r
        if disc <= 0.0:
            continue
        s = math.sqrt(disc)
        t_lo, t_hi = bh - s, bh + s
        if t_hi <= 0.0:
            continue
        t_lo = max(t_lo, 0.0)
        img = p.project(z)
        contraction = float(np.linalg.norm(img))
        if contraction <= 1e-12:
            continue
        t_at_q = float(np.dot(q, img)) / (contraction * contraction)
        perp = float(np.linalg.norm(q - t_at_q * img))
        if perp > 1e-12 * max(1.0, float(np.linalg.norm(q))):
            continue
        end_tol = 1e-12 / contraction
        if abs(t_at_q - t_lo) <= end_tol or abs(t_at_q - t_hi) <= end_tol:
            total += 0.5 * m * contraction
        elif t_lo < t_at_q < t_hi:
            total += m * contraction
    return total


def _sphere_ball_masses_rows(c: ConicVarifold) -> tuple[np.ndarray, np.ndarray]:
    dirs = [c.atom_directions]
    masses = [c.atom_masses]
    if c.density is not None:
        g = c.density.grid
        node_masses = g.weights * c.density.values
        keep = node_masses > 0.0
        dirs.append(g.nodes[keep])
        masses.append(node_masses[keep])
    return np.vstack(dirs), np.concatenate(masses)


def _sphere_ball_masses(c: ConicVarifold, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distances from y and masses of every spherical atom / density node."""
    dirs, masses = _sphere_ball_masses_rows(c)
    return np.linalg.norm(dirs - y, axis=1), masses


def admissible_radius(c: ConicVarifold, y, epsilon: float) -> float:
    """Largest r0 <= 1e-5 with mu(B(y, r0) on the sphere) < phi(y) + epsilon."""
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    y = unit(as_vector(y, dim=c.ambient_dim))
    dists, masses = _sphere_ball_masses(c, y)
    others = dists > ATOM_SEPARATION_TOL
    d, m = dists[others], masses[others]
    order = np.argsort(d)
    cum = np.cumsum(m[order])
    breach = np.nonzero(cum >= epsilon)[0]
    r0 = 1e-5 if breach.size == 0 else min(1e-5, float(d[order][breach[0]]))
    return r0


def density_bound_check(
    c: ConicVarifold, y, p: Subspace, r: float, epsilon: float
) -> DensityBoundReport:
    """Check the projected density interval of a cone localized near y.

    Restricts the cone to B(y, r), projects with weights onto the hyperplane
    p, and evaluates the exact density at pi_P(y).  The value is certified
    to lie in [ d*phi, 1.5*epsilon + d*phi ] with d = |pi_P(y)|, provided
    |pi_P(y)| > 10 r and the sphere ball B(y, r) carries mass below
    phi + epsilon.  Violated hypotheses raise PreconditionViolated; a bound
    failure raises DensityBoundViolation.
    """
    y = unit(as_vector(y, dim=c.ambient_dim))
    if p.dim != c.ambient_dim - 1:
        raise ValueError("p must be a hyperplane")
    sep = np.linalg.norm(c.atom_directions - y, axis=1)
    hits = np.nonzero(sep <= ATOM_SEPARATION_TOL)[0]
    if hits.size != 1:
        raise ValueError("y must carry exactly one spherical atom")
    phi = float(c.atom_masses[hits[0]])
    pole = float(np.linalg.norm(p.project(y)))
    if r <= 0.0 or r >= 1e-5:
        raise PreconditionViolated("need 0 < r < 1e-5")
    if pole <= 10.0 * r:
        raise PreconditionViolated("bound needs |pi_P(y)| > 10 r")
    dists, masses = _sphere_ball_masses(c, y)
    ball = float(np.sum(masses[dists < r]))
    if ball >= phi + epsilon:
        raise PreconditionViolated("sphere ball mass reaches phi + epsilon")
    value = _projected_localized_density(c, y, p, r)
    lower_bound = pole * phi
    upper_bound = 1.5 * epsilon + pole * phi
    report = DensityBoundReport(
        lower=value,
        upper=value,
        lower_bound=lower_bound,
        upper_bound=upper_bound,
        pole_distance=pole,
        atom_mass=phi,
        epsilon=epsilon,
        radius=r,
    )
    if value < lower_bound - 1e-12 or value > upper_bound + 1e-12:
        raise DensityBoundViolation(f"projected density left its interval: {report}")
    return report


# ---------------------------------------------------------------------------
# Dense-lines stress fixture and radial projection growth
# ---------------------------------------------------------------------------

_PLASTIC = 1.324717957244746
_ALPHA = 1.0 / _PLASTIC
_BETA = 1.0 / _PLASTIC**2


def _quasi_direction(i: int, seed: int, ambient_dim: int) -> np.ndarray:
    s1 = math.modf(seed * 0.618033988749895 + 0.1234567)[0]
    s2 = math.modf(seed * 0.414213562373095 + 0.7654321)[0]
    if ambient_dim == 2:
        ang = 2.0 * math.pi * math.modf(i * _ALPHA + s1)[0]
        return np.array([math.cos(ang), math.sin(ang)])
    if ambient_dim == 3:
        z = 1.0 - 2.0 * math.modf(i * _ALPHA + s1)[0]
        ang = 2.0 * math.pi * math.modf(i * _BETA + s2)[0]
        rho = math.sqrt(max(0.0, 1.0 - z * z))
        return np.array([rho * math.cos(ang), rho * math.sin(ang), z])
    rng = np.random.Generator(np.random.PCG64(hash((seed, i)) & 0x7FFFFFFF))
    return unit(rng.normal(size=ambient_dim))


def _lattice_points(count: int, ambient_dim: int) -> list[np.ndarray]:
    """First nonzero integer points ordered by (squared norm, lex)."""
    points: list[tuple[float, tuple, np.ndarray]] = []
    shell = 0
    while len(points) < count:
        shell += 1
        rng = range(-shell, shell + 1)
        for idx in np.ndindex(*([2 * shell + 1] * ambient_dim)):
            z = np.array([rng[i] for i in idx], dtype=float)
            if np.max(np.abs(z)) != shell:
                continue
            points.append((float(np.dot(z, z)), tuple(z), z))
        points.sort(key=lambda row: (row[0], row[1]))
    return [z for _, _, z in points[:count]]


def dense_lines_fixture(k: int, seed: int = 0, ambient_dim: int = 3) -> DiscreteVarifold:
    """First k translated lines of a dense-direction stationary family.

    Line i passes through the i-th nonzero lattice point with the i-th
    direction of a quasi-random sequence; each line is realized as two
    opposite rays, hence every vertex balances.  The family is stationary
    for every k while its radial projection mass over any fixed spherical
    cap grows without bound.
    """
    if k < 1:
        raise ValueError("need k >= 1")
    anchors = _lattice_points(k, ambient_dim)
    rays = []
    for i in range(k):
        u = _quasi_direction(i, seed, ambient_dim)
        rays.append(RayPiece(anchors[i], u, 1.0))
        rays.append(RayPiece(anchors[i], -u, 1.0))
    return DiscreteVarifold(ambient_dim, (), tuple(rays))


def radial_projection_cap_mass(v: DiscreteVarifold, cap_direction, cap_angle: float) -> float:
    """Mass of the radial projection image inside a spherical cap.

    Each piece maps to a great-circle arc with unit multiplicity, so the cap
    mass is the summed arc overlap in closed form.  Pieces through the
    origin have degenerate (zero-mass) images.
    """
    if not 0.0 < cap_angle <= math.pi:
        raise ValueError("cap angle must lie in (0, pi]")
    chat = unit(as_vector(cap_direction, dim=v.ambient_dim))
    total = 0.0
    for piece in v.pieces():
        base, u, hi = _piece_frame(piece)
        t_star = -float(np.dot(base, u))
        foot = base + t_star * u
        d = float(np.linalg.norm(foot))
        if d <= 1e-12:
            continue
        what = foot / d
        theta_lo = math.atan2(0.0 - t_star, d)
        theta_hi = math.pi / 2.0 if math.isinf(hi) else math.atan2(hi - t_star, d)
        a = float(np.dot(u, chat))
        b = float(np.dot(what, chat))
        amp = math.hypot(a, b)
        cos_alpha = math.cos(cap_angle)
        if amp <= abs(cos_alpha):
            if cos_alpha > 0.0:
                continue
            total += piece.weight * (theta_hi - theta_lo)
            continue
        center = math.atan2(a, b)
        delta = math.acos(max(-1.0, min(1.0, cos_alpha / amp)))
        for wrap in (-2.0 * math.pi, 0.0, 2.0 * math.pi):
            lo = center - delta + wrap
            hi_arc = center + delta + wrap
            total += piece.weight * max(0.0, min(hi_arc, theta_hi) - max(lo, theta_lo))
    return total


def projection_growth_table(
    k_values: Sequence[int],
    cap_direction,
    cap_angle: float,
    seed: int = 0,
    ambient_dim: int = 3,
) -> list[tuple[int, float]]:
    """(k, radial cap mass) rows for increasing dense-lines truncations."""
    rows = []
    for k in sorted(k_values):
        fixture = dense_lines_fixture(k, seed=seed, ambient_dim=ambient_dim)
        rows.append((k, radial_projection_cap_mass(fixture, cap_direction, cap_angle)))
    return rows
