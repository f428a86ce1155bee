import math

import numpy as np
import pytest

from varifold_lab import (
    DiscreteVarifold,
    PreconditionViolated,
    SegmentPiece,
    Subspace,
    ZeroDensityError,
    admissible_radius,
    conic_atoms,
    conic_to_discrete,
    cut_and_paste,
    default_battery,
    dense_lines_fixture,
    density,
    density_bound_check,
    dilate,
    is_stationary,
    mass,
    pair_with,
    projection_growth_table,
    radial_projection_cap_mass,
    tangent_estimate,
    weak_star_distance,
    weighted_projection,
    weighted_projection_conic,
)
from varifold_lab.blowup import cutoff_constant
from varifold_lab.fixtures import full_line, random_subspace, y_junction


def unit(v):
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# battery pairings
# ---------------------------------------------------------------------------

def test_battery_invariants():
    rng = np.random.default_rng(3)
    battery = default_battery(3)
    battery.validate(rng)


def test_pair_with_cutoff_constant_measures_mass():
    # pieces inside the half-radius plateau pair to exactly their mass
    v = DiscreteVarifold(2, (SegmentPiece([-0.3, 0.1], [0.4, 0.1], 1.3),), ())
    f = cutoff_constant(2.0)
    assert pair_with(v, f, 2.0) == pytest.approx(mass(v, [0, 0], 2.0), abs=1e-12)


def test_pair_with_direction_moment():
    # f(x,s) = <s, e1>^2 on a plateau covering the segment
    from varifold_lab.blowup import BatteryFunction
    from varifold_lab.variation import _plateau

    alpha = 0.6
    seg = SegmentPiece([0, 0], [math.cos(alpha), math.sin(alpha)], 1.0)
    v = DiscreteVarifold(2, (seg,), ())

    def value(points, s):
        return _plateau(np.linalg.norm(points, axis=1) / 4.0) * float(s[0]) ** 2

    f = BatteryFunction("moment", value)
    assert pair_with(v, f, 4.0) == pytest.approx(math.cos(alpha) ** 2, abs=1e-12)


def test_pair_with_empty_is_zero():
    v = DiscreteVarifold(2)
    assert pair_with(v, cutoff_constant(1.0), 1.0) == 0.0


def test_weak_star_distance_axioms():
    battery = default_battery(2)
    line = full_line([0.0, 0.0], [1.0, 0.0])
    heavy = full_line([0.0, 0.0], [1.0, 0.0], weight=2.0)
    other = y_junction()
    assert weak_star_distance(line, line, battery) == 0.0
    d1 = weak_star_distance(line, heavy, battery)
    d2 = weak_star_distance(heavy, line, battery)
    assert d1 == d2 > 0.0
    d3 = weak_star_distance(line, other, battery)
    assert d3 <= weak_star_distance(line, heavy, battery) + weak_star_distance(
        heavy, other, battery
    ) + 1e-15


def test_weak_star_separates_masses():
    # the smoothly cut constant sees at least the mass gap on the plateau
    battery = default_battery(2)
    line = full_line([0.0, 0.0], [1.0, 0.0])
    heavy = full_line([0.0, 0.0], [1.0, 0.0], weight=2.0)
    f = cutoff_constant(battery.radius)
    gap = abs(pair_with(heavy, f, battery.radius) - pair_with(line, f, battery.radius))
    assert gap >= mass(line, [0, 0], battery.radius / 2) - 1e-12


def test_cone_dilates_pair_identically():
    c = conic_atoms(2, [([1.0, 0.0], 1.0), ([-0.5, math.sqrt(3) / 2], 2.0)])
    v = conic_to_discrete(c)
    battery = default_battery(2)
    for lam in (0.5, 0.25, 0.125):
        assert weak_star_distance(dilate(v, [0, 0], lam), v, battery) == 0.0


# ---------------------------------------------------------------------------
# tangent estimation
# ---------------------------------------------------------------------------

def test_tangent_of_y_junction_hits_zero():
    v = y_junction()
    lambdas = [2.0 ** -k for k in range(1, 7)]
    cone, diag = tangent_estimate(v, [0.0, 0.0], lambdas)
    assert cone.n_atoms == 3
    assert diag.stabilized_at == 0  # arms are exact rays at every scale
    assert all(d == 0.0 for d in diag.distances)


def test_tangent_interior_point_two_atoms():
    v = DiscreteVarifold(2, (SegmentPiece([-2.0, 1.0], [4.0, 1.0], 1.5),), ())
    x = np.array([0.25, 1.0])
    lambdas = [2.0 ** -k for k in range(0, 8)]
    cone, diag = tangent_estimate(v, x, lambdas)
    assert cone.n_atoms == 2
    assert np.allclose(np.sort(cone.atom_directions[:, 0]), [-1.0, 1.0])
    assert np.all(cone.atom_masses == 1.5)
    assert diag.stabilized_at is not None
    assert diag.distances[-1] == 0.0
    # mass law: cone ball mass equals 2 r * density
    cd = conic_to_discrete(cone)
    theta = density(v, x).value
    for r in (0.3, 1.0, 2.0):
        assert mass(cd, [0, 0], r) == pytest.approx(2 * r * theta, abs=1e-12)


def test_tangent_requires_positive_density():
    v = full_line([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(ZeroDensityError):
        tangent_estimate(v, [0.0, 5.0], [0.5, 0.25])


def test_tangent_on_dense_lines_fixture():
    v = dense_lines_fixture(6, seed=1)
    x = v.rays[0].origin  # on the first line, away from the others
    lambdas = [2.0 ** -k for k in range(0, 22)]
    cone, diag = tangent_estimate(v, x, lambdas)
    assert cone.n_atoms == 2  # the line through x
    assert diag.stabilized_at is not None
    assert diag.distances[-1] == 0.0


def test_tangent_agrees_after_surgery():
    v = y_junction(weights=(1.0, 1.0, 1.0))
    res = cut_and_paste(v, [0.05, 0.0], 0.7)
    lambdas = [2.0 ** -k for k in range(2, 9)]
    c1, _ = tangent_estimate(v, [0.0, 0.0], lambdas)
    c2, _ = tangent_estimate(res.combined, [0.0, 0.0], lambdas)
    o1 = np.lexsort(c1.atom_directions.T)
    o2 = np.lexsort(c2.atom_directions.T)
    assert np.allclose(c1.atom_directions[o1], c2.atom_directions[o2], atol=1e-12)
    assert np.allclose(c1.atom_masses[o1], c2.atom_masses[o2], atol=1e-12)


def test_projection_tangent_commutation():
    rng = np.random.default_rng(9)
    v = y_junction(ambient_dim=3)
    x = np.zeros(3)
    p = random_subspace(rng, 3, 2)
    lambdas = [0.5, 0.25]
    cone, _ = tangent_estimate(v, x, lambdas)
    left = weighted_projection_conic(cone, p)
    pv = weighted_projection(v, p)
    right, _ = tangent_estimate(pv, p.project(x), lambdas)
    o1 = np.lexsort(left.atom_directions.T)
    o2 = np.lexsort(right.atom_directions.T)
    assert np.allclose(left.atom_directions[o1], right.atom_directions[o2], atol=1e-12)
    assert np.allclose(left.atom_masses[o1], right.atom_masses[o2], atol=1e-12)


# ---------------------------------------------------------------------------
# projected density bounds
# ---------------------------------------------------------------------------

def test_density_bounds_single_atom():
    y = unit([0.3, -0.2, 0.93])
    c = conic_atoms(3, [(y, 1.4)])
    p = Subspace(3, np.array([[1.0, 0, 0], [0, 1.0, 0]]))
    r = 1e-6
    report = density_bound_check(c, y, p, r, epsilon=1e-3)
    pole = float(np.linalg.norm(p.project(y)))
    assert report.lower == pytest.approx(pole * 1.4, abs=1e-12)
    assert report.upper == pytest.approx(pole * 1.4, abs=1e-12)


def test_density_bounds_ignore_far_atoms():
    y = unit([0.3, -0.2, 0.93])
    c = conic_atoms(3, [(y, 1.4), ([1.0, 0.0, 0.0], 5.0)])
    p = Subspace(3, np.array([[1.0, 0, 0], [0, 1.0, 0]]))
    report = density_bound_check(c, y, p, 1e-6, epsilon=1e-3)
    pole = float(np.linalg.norm(p.project(y)))
    assert report.lower == pytest.approx(pole * 1.4, abs=1e-12)


def test_density_bounds_with_cluster():
    rng = np.random.default_rng(4)
    y = unit([0.1, 0.2, 0.97])
    eps = 1e-3
    r = 5e-6
    # a companion atom inside the ball carrying half of epsilon
    tangent = unit(np.cross(y, [1.0, 0.0, 0.0]))
    companion = unit(y + (r / 2) * tangent)
    c = conic_atoms(3, [(y, 1.0), (companion, eps / 2)])
    p = Subspace(3, np.array([[1.0, 0, 0], [0, 1.0, 0]]))
    report = density_bound_check(c, y, p, r, epsilon=eps)
    assert report.upper <= 1.5 * eps + report.pole_distance * 1.0 + 1e-12


def test_density_bound_preconditions():
    y = np.array([0.0, 0.0, 1.0])
    c = conic_atoms(3, [(y, 1.0)])
    # the pole projects to the origin of the horizontal plane: |pi_P(y)| = 0
    p = Subspace(3, np.array([[1.0, 0, 0], [0, 1.0, 0]]))
    with pytest.raises(PreconditionViolated):
        density_bound_check(c, y, p, 1e-6, epsilon=1e-3)


def test_admissible_radius_helper():
    y = unit([0.2, 0.1, 0.97])
    near = unit(y + 4e-6 * unit(np.cross(y, [0.0, 1.0, 0.0])))
    c = conic_atoms(3, [(y, 1.0), (near, 0.5)])
    r0 = admissible_radius(c, y, epsilon=0.25)
    assert r0 <= np.linalg.norm(near - y)
    big = admissible_radius(c, y, epsilon=1.0)
    assert big == pytest.approx(1e-5)


# ---------------------------------------------------------------------------
# dense-lines fixture
# ---------------------------------------------------------------------------

def test_dense_lines_single_line_is_stationary():
    v = dense_lines_fixture(1, seed=0)
    assert len(v.rays) == 2
    assert is_stationary(v, 1e-12)[0]


def test_dense_lines_avoid_origin():
    v = dense_lines_fixture(12, seed=0)
    for i in range(0, len(v.rays), 2):
        base = v.rays[i].origin
        u = v.rays[i].direction
        dist = np.linalg.norm(base - float(np.dot(base, u)) * u)
        assert dist > 1e-3


def test_dense_lines_stationary_for_all_k():
    for k in (2, 5, 9):
        assert is_stationary(dense_lines_fixture(k, seed=3), 1e-12)[0]


def test_radial_cap_mass_full_line_is_pi():
    v = full_line([2.0, 1.0, 0.5], [0.3, -0.2, 0.93])
    # whole sphere: the image of any line is a unit-weight great semicircle
    assert radial_projection_cap_mass(v, [0, 0, 1.0], math.pi) == pytest.approx(
        math.pi, abs=1e-12
    )


def test_growth_table_is_monotone_and_grows():
    table = projection_growth_table([1, 4, 16, 64], [0.0, 0.0, 1.0], 0.6, seed=0)
    masses = [m for _, m in table]
    assert all(b >= a - 1e-12 for a, b in zip(masses, masses[1:]))
    assert masses[-1] > masses[0]
