"""First variation of discrete varifolds and its atomic representation.

For a weighted segment the tangential divergence integrates to an endpoint
difference, so the first variation of a piecewise-linear varifold is a finite
sum of point forces.  Balancing those forces at every vertex is exactly
stationarity, and restricting to a ball turns the sphere crossings into an
outward boundary force measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    VERTEX_TOL,
    DiscreteVarifold,
    RayPiece,
    SegmentPiece,
    as_vector,
    ball_interval,
    cluster_points,
    incident_rays,
    unit,
)


class DegenerateGeometryError(ValueError):
    """A piece is tangent to, or has an endpoint on, the cutting sphere."""


@dataclass(frozen=True)
class VariationAtom:
    """One point force of the first variation: location, direction, mass."""

    location: np.ndarray
    omega: np.ndarray
    mass: float

    def __post_init__(self):
        object.__setattr__(self, "location", as_vector(self.location))
        object.__setattr__(self, "omega", as_vector(self.omega, dim=self.location.shape[0]))
        object.__setattr__(self, "mass", float(self.mass))
        if abs(float(np.dot(self.omega, self.omega)) - 1.0) > 1e-10:
            raise ValueError("omega must be a unit vector")
        if self.mass <= 0.0:
            raise ValueError("atom mass must be positive")


@dataclass(frozen=True)
class TestField:
    """A compactly supported smooth vector field with an explicit jacobian.

    evaluate(x) -> vector and jacobian(x) -> (n, n) matrix; both must accept
    single points.  The field vanishes outside the open support ball.
    divergence_batch, when present, evaluates s . (Dg(x) s) for a whole
    (m, n) block of points at once; the built-in fields provide it.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    support_center: np.ndarray
    support_radius: float
    divergence_batch: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        object.__setattr__(self, "support_center", as_vector(self.support_center))
        object.__setattr__(self, "support_radius", float(self.support_radius))
        if not math.isfinite(self.support_radius) or self.support_radius <= 0.0:
            raise ValueError("support radius must be finite and positive")

    @property
    def ambient_dim(self) -> int:
        return self.support_center.shape[0]

    def tangential_divergence(self, x: np.ndarray, s: np.ndarray) -> float:
        """div_S g at (x, span(s)) = s . (Dg(x) s) for unit s."""
        return float(s @ (self.jacobian(x) @ s))

    def validate(self, rng: np.random.Generator, samples: int = 32) -> None:
        """Spot-check support vanishing and jacobian-vs-finite-differences."""
        n = self.ambient_dim
        for _ in range(samples):
            d = unit(rng.normal(size=n))
            far = self.support_center + 2.0 * self.support_radius * d
            if np.linalg.norm(self.evaluate(far)) != 0.0:
                raise ValueError("field does not vanish outside its support ball")
        h = 1e-6 * self.support_radius
        for _ in range(samples):
            x = self.support_center + self.support_radius * rng.uniform(-0.9, 0.9, size=n)
            jac = self.jacobian(x)
            num = np.empty_like(jac)
            for j in range(n):
                e = np.zeros(n)
                e[j] = h
                num[:, j] = (self.evaluate(x + e) - self.evaluate(x - e)) / (2.0 * h)
            scale = max(1.0, float(np.max(np.abs(jac))))
            if np.max(np.abs(jac - num)) > 1e-6 * scale:
                raise ValueError("jacobian disagrees with finite differences")


# ---------------------------------------------------------------------------
# Smooth profiles and the built-in field library
# ---------------------------------------------------------------------------

def _bump(t: np.ndarray) -> np.ndarray:
    """exp(-1/(1-t^2)) inside |t| < 1, zero outside."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = np.abs(t) < 1.0
    out[m] = np.exp(-1.0 / (1.0 - t[m] ** 2))
    return out


def _bump_prime(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = np.abs(t) < 1.0
    tm = t[m]
    out[m] = np.exp(-1.0 / (1.0 - tm**2)) * (-2.0 * tm / (1.0 - tm**2) ** 2)
    return out


def _half_exp(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    m = u > 0.0
    out[m] = np.exp(-1.0 / u[m])
    return out


def _plateau(t: np.ndarray, plateau: float = 0.5) -> np.ndarray:
    """Smooth lump: 1 for |t| <= plateau, 0 for |t| >= 1."""
    t = np.abs(np.asarray(t, dtype=float))
    u = (1.0 - t) / (1.0 - plateau)
    a = _half_exp(u)
    b = _half_exp(1.0 - u)
    out = np.where(t >= 1.0, 0.0, a / np.where(a + b == 0.0, 1.0, a + b))
    return np.where(t <= plateau, 1.0, out)


def _plateau_prime(t: np.ndarray, plateau: float = 0.5) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    sign = np.sign(t)
    ta = np.abs(t)
    u = (1.0 - ta) / (1.0 - plateau)
    a = _half_exp(u)
    b = _half_exp(1.0 - u)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ap = np.where(u > 0.0, a / np.maximum(u, 1e-300) ** 2, 0.0)
        bp = np.where(1.0 - u > 0.0, b / np.maximum(1.0 - u, 1e-300) ** 2, 0.0)
        s_prime = np.where(
            (a + b) > 0.0, (ap * b + a * bp) / np.maximum((a + b) ** 2, 1e-300), 0.0
        )
    inner = (ta > plateau) & (ta < 1.0)
    return np.where(inner, -sign * s_prime / (1.0 - plateau), 0.0)


def _profile_field(center, radius: float, matrix_or_vector, profile, profile_prime) -> TestField:
    c = as_vector(center)
    n = c.shape[0]
    arg = np.asarray(matrix_or_vector, dtype=float)
    if arg.ndim == 1:
        # constant vector times radial profile
        def value_of(x):
            return arg

        def deriv_of(x):
            return np.zeros((n, n))
    else:
        def value_of(x):
            return arg @ (x - c)

        def deriv_of(x):
            return arg

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(x - c))
        p = float(profile(np.atleast_1d(r / radius))[0])
        return p * value_of(x)

    def jacobian(x):
        x = np.asarray(x, dtype=float)
        d = x - c
        r = float(np.linalg.norm(d))
        t = r / radius
        p = float(profile(np.atleast_1d(t))[0])
        jac = p * deriv_of(x)
        if r > 0.0:
            grad = float(profile_prime(np.atleast_1d(t))[0]) / (radius * r) * d
            jac = jac + np.outer(value_of(x), grad)
        return jac

    def divergence_batch(points, s):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        d = pts - c
        r = np.linalg.norm(d, axis=1)
        t = r / radius
        p = profile(t)
        if arg.ndim == 1:
            sAs = 0.0
            vs = np.full(pts.shape[0], float(np.dot(arg, s)))
        else:
            sAs = float(s @ (arg @ s))
            vs = (d @ arg.T) @ s
        out = p * sAs
        safe = r > 0.0
        grad_s = np.zeros_like(r)
        grad_s[safe] = profile_prime(t[safe]) / (radius * r[safe]) * (d[safe] @ s)
        return out + vs * grad_s

    return TestField(evaluate, jacobian, c, radius, divergence_batch)


def bump_field(center, radius: float, vector) -> TestField:
    """Constant vector modulated by the standard radial bump profile."""
    return _profile_field(center, radius, as_vector(vector), _bump, _bump_prime)


def plateau_field(center, radius: float, vector, plateau: float = 0.5) -> TestField:
    """Constant vector times a smooth lump equal to 1 on the inner ball."""
    return _profile_field(
        center,
        radius,
        as_vector(vector),
        lambda t: _plateau(t, plateau),
        lambda t: _plateau_prime(t, plateau),
    )


def linear_field(center, radius: float, matrix, plateau: float = 0.5) -> TestField:
    """g(x) = lump(|x-c|/radius) * A (x-c); A = I radial, A skew rotational."""
    A = np.array(matrix, dtype=float)
    return _profile_field(
        center,
        radius,
        A,
        lambda t: _plateau(t, plateau),
        lambda t: _plateau_prime(t, plateau),
    )


def coordinate_field(center, radius: float, i: int, j: int, n: int) -> TestField:
    """Bump times the coordinate field x_j e_i (relative to the center)."""
    A = np.zeros((n, n))
    A[i, j] = 1.0
    return linear_field(center, radius, A)


def rotation_field(center, radius: float, i: int, j: int, n: int) -> TestField:
    """Bump times the rotation field in the (i, j) plane."""
    A = np.zeros((n, n))
    A[i, j] = -1.0
    A[j, i] = 1.0
    return linear_field(center, radius, A)


# ---------------------------------------------------------------------------
# First variation
# ---------------------------------------------------------------------------

def _ray_exit_parameter(ray: RayPiece, g: TestField) -> float:
    """Parameter past which the ray stays outside the field's support."""
    iv = ball_interval(ray.origin, ray.direction, g.support_center, g.support_radius)
    if iv is None:
        return 0.0
    return max(iv[1], 0.0)


def first_variation(v: DiscreteVarifold, g: TestField) -> float:
    """delta V (g): the derivative of mass along the flow of g.

    Closed form: a segment with direction s and weight w contributes
    w * (g(b).s - g(a).s); a ray contributes only its origin endpoint since
    the far end leaves the compact support.
    """
    if g.ambient_dim != v.ambient_dim:
        raise ValueError("field dimension does not match the varifold")
    total = 0.0
    for s in v.segments:
        u = s.direction
        total += s.weight * float(np.dot(g.evaluate(s.b) - g.evaluate(s.a), u))
    for r in v.rays:
        total += -r.weight * float(np.dot(g.evaluate(r.origin), r.direction))
    return total


def first_variation_quadrature(v: DiscreteVarifold, g: TestField,
                               nodes: int = 10_001) -> float:
    """Composite-Simpson quadrature of div_S g along every piece.

    Independent of the endpoint formula; rays are integrated up to their
    exit from the support ball.
    """
    if nodes % 2 == 0:
        nodes += 1
    total = 0.0
    for piece in v.pieces():
        if isinstance(piece, SegmentPiece):
            base, u, hi = piece.a, piece.direction, piece.length
        else:
            base, u = piece.origin, piece.direction
            hi = _ray_exit_parameter(piece, g)
        if hi <= 0.0:
            continue
        t = np.linspace(0.0, hi, nodes)
        if g.divergence_batch is not None:
            vals = g.divergence_batch(base + t[:, None] * u, u)
        else:
            vals = np.array([g.tangential_divergence(base + ti * u, u) for ti in t])
        w = np.ones(nodes)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        h = hi / (nodes - 1)
        total += piece.weight * float(np.dot(w, vals)) * h / 3.0
    return total


def vertex_residuals(v: DiscreteVarifold, tol: float = 1e-12) -> list[VariationAtom]:
    """Atomic representation of delta V for a piecewise-linear varifold.

    Piece ends are clustered by location; at each vertex the residual is the
    weighted sum of away-pointing unit vectors.  The reported omega is the
    flipped residual direction so that

        first_variation(v, g) == sum over atoms of mass * <g(location), omega>

    holds verbatim for every admissible test field.
    """
    ends: list[np.ndarray] = []
    for s in v.segments:
        ends.append(s.a)
        ends.append(s.b)
    for r in v.rays:
        ends.append(r.origin)
    atoms: list[VariationAtom] = []
    for x in cluster_points(ends, tol=VERTEX_TOL):
        residual = np.zeros(v.ambient_dim)
        for away, w in incident_rays(v, x):
            residual = residual + w * away
        m = float(np.linalg.norm(residual))
        if m > tol:
            atoms.append(VariationAtom(x, -residual / m, m))
    return atoms


def is_stationary(v: DiscreteVarifold, tol: float) -> tuple[bool, float]:
    """Whether every vertex balances at tolerance tol; also the max residual."""
    if tol <= 0.0:
        raise ValueError("tolerance must be positive")
    atoms = vertex_residuals(v, tol=0.0)
    worst = max((a.mass for a in atoms), default=0.0)
    return worst <= tol, worst


def boundary_variation(v: DiscreteVarifold, y, r: float,
                       tangency_tol: float = 1e-9) -> list[VariationAtom]:
    """Boundary force atoms of v restricted to the open ball B(y, r).

    Every transversal crossing x of a piece with the sphere contributes the
    atom (x, s_out, weight), where s_out is the piece direction oriented
    outward; each omega satisfies <omega, (x-y)/r> >= 0.  Raises
    DegenerateGeometryError when a piece is tangent to the sphere or has an
    endpoint on it, in which case the caller should perturb r.
    """
    if r <= 0.0:
        raise ValueError("radius must be positive")
    c = as_vector(y, dim=v.ambient_dim)
    atoms: list[VariationAtom] = []
    for piece in v.pieces():
        if isinstance(piece, SegmentPiece):
            base, u, hi = piece.a, piece.direction, piece.length
            endpoints = (piece.a, piece.b)
        else:
            base, u, hi = piece.origin, piece.direction, math.inf
            endpoints = (piece.origin,)
        for e in endpoints:
            if abs(float(np.linalg.norm(e - c)) - r) <= tangency_tol:
                raise DegenerateGeometryError(
                    "piece endpoint lies on the cutting sphere; perturb the radius"
                )
        d = base - c
        bh = float(np.dot(d, u))
        q = float(np.dot(d, d)) - r * r
        disc = bh * bh - q
        foot = -bh  # closest approach parameter of the supporting line
        near_piece = (-tangency_tol <= foot <= hi + tangency_tol) or (
            math.isinf(hi) and foot >= -tangency_tol
        )
        if abs(disc) <= tangency_tol and near_piece:
            raise DegenerateGeometryError(
                "piece is tangent to the cutting sphere; perturb the radius"
            )
        if disc <= 0.0:
            continue
        s = math.sqrt(disc)
        for t, outward in ((-bh - s, -1.0), (-bh + s, +1.0)):
            if 0.0 < t < hi:
                x = base + t * u
                atoms.append(VariationAtom(x, outward * u, piece.weight))
    return atoms
