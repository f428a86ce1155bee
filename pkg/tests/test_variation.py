import math

import numpy as np
import pytest

from varifold_lab import (
    DegenerateGeometryError,
    DiscreteVarifold,
    RayPiece,
    SegmentPiece,
    boundary_variation,
    bump_field,
    dilate,
    first_variation,
    first_variation_quadrature,
    is_stationary,
    linear_field,
    plateau_field,
    vertex_residuals,
)
from varifold_lab.fixtures import full_line, random_stationary_network, y_junction
from varifold_lab.variation import rotation_field


def segment(a, b, w=1.0):
    return SegmentPiece(np.array(a, float), np.array(b, float), w)


def ray(o, d, w=1.0):
    return RayPiece(np.array(o, float), np.array(d, float), w)


# ---------------------------------------------------------------------------
# test fields
# ---------------------------------------------------------------------------

def test_field_validation():
    rng = np.random.default_rng(3)
    for f in (
        bump_field([0.2, -0.1], 1.3, [1.0, 0.5]),
        plateau_field([0.0, 0.0], 2.0, [0.0, 1.0]),
        linear_field([0.1, 0.2], 1.5, np.eye(2)),
        rotation_field([0.0, 0.0], 1.0, 0, 1, 2),
    ):
        f.validate(rng)


def test_plateau_is_one_inside():
    f = plateau_field([0, 0], 2.0, [1.0, 0.0])
    assert np.allclose(f.evaluate([0.3, 0.2]), [1.0, 0.0])
    assert np.allclose(f.evaluate([5.0, 0.0]), [0.0, 0.0])


# ---------------------------------------------------------------------------
# first variation closed form
# ---------------------------------------------------------------------------

def test_single_segment_endpoint_in_support():
    a, b = np.array([0.0, 0.0]), np.array([2.0, 0.0])
    v = DiscreteVarifold(2, (segment(a, b),), ())
    g = plateau_field(b, 0.5, [0.7, 0.3])
    s = np.array([1.0, 0.0])
    assert first_variation(v, g) == pytest.approx(float(np.dot([0.7, 0.3], s)), abs=1e-15)


def test_balanced_y_junction_vanishes():
    v = y_junction(arm_length=2.0)
    g = bump_field([0, 0], 1.0, [0.3, -0.9])
    assert first_variation(v, g) == pytest.approx(0.0, abs=1e-15)


def test_identity_stretch_along_segment():
    # g = lump * (x, 0) with lump == 1 on the segment: div along e1 is 1
    v = DiscreteVarifold(2, (segment([0, 0], [1, 0]),), ())
    A = np.array([[1.0, 0.0], [0.0, 0.0]])
    g = linear_field([0.5, 0.0], 4.0, A)  # plateau covers the segment
    closed = first_variation(v, g)
    assert closed == pytest.approx(1.0, abs=1e-12)
    quad = first_variation_quadrature(v, g, nodes=2001)
    assert closed == pytest.approx(quad, abs=1e-10)


def test_closed_form_vs_quadrature_battery():
    rng = np.random.default_rng(11)
    for _ in range(15):
        n = int(rng.integers(2, 4))
        pieces_seg, pieces_ray = [], []
        if rng.random() < 0.7:
            a = rng.uniform(-1, 1, n)
            b = a + rng.uniform(0.3, 1.5) * _unit(rng, n)
            pieces_seg.append(segment(a, b, float(rng.uniform(0.2, 2.0))))
        else:
            pieces_ray.append(
                ray(rng.uniform(-1, 1, n), _unit(rng, n), float(rng.uniform(0.2, 2.0)))
            )
        v = DiscreteVarifold(n, tuple(pieces_seg), tuple(pieces_ray))
        center = rng.uniform(-1, 1, n)
        radius = float(rng.uniform(0.5, 2.0))
        g = bump_field(center, radius, rng.normal(size=n))
        closed = first_variation(v, g)
        quad = first_variation_quadrature(v, g, nodes=10_001)
        assert closed == pytest.approx(quad, rel=1e-8, abs=1e-9)


def _unit(rng, n):
    v = rng.normal(size=n)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# vertex residuals (atomic representation)
# ---------------------------------------------------------------------------

def test_full_line_has_no_residuals():
    assert vertex_residuals(full_line([0.0, 0.0], [1.0, 0.0])) == []


def test_single_ray_atom_direction_and_identity():
    v = DiscreteVarifold(2, (), (ray([0, 0], [1, 0]),))
    atoms = vertex_residuals(v)
    assert len(atoms) == 1
    # reported omega is flipped so the representation identity holds verbatim
    assert np.allclose(atoms[0].omega, [-1.0, 0.0])
    assert atoms[0].mass == pytest.approx(1.0)
    g = plateau_field([0, 0], 1.0, [1.0, 0.0])
    dv = first_variation(v, g)
    assert dv == pytest.approx(-1.0, abs=1e-15)
    represented = sum(
        a.mass * float(np.dot(g.evaluate(a.location), a.omega)) for a in atoms
    )
    assert represented == pytest.approx(dv, abs=1e-15)


def test_unbalanced_y_junction_residual():
    dirs = [
        np.array([1.0, 0.0]),
        np.array([-0.5, math.sqrt(3) / 2]),
        np.array([-0.5, -math.sqrt(3) / 2]),
    ]
    balanced = DiscreteVarifold(2, (), tuple(ray([0, 0], d) for d in dirs))
    assert vertex_residuals(balanced) == []
    lopsided = DiscreteVarifold(
        2, (), tuple(ray([0, 0], d, w) for d, w in zip(dirs, (1.0, 1.0, 2.0)))
    )
    atoms = vertex_residuals(lopsided)
    assert len(atoms) == 1
    # 2 s3 + s1 + s2 = s3, so the residual has mass 1 along s3
    assert atoms[0].mass == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(atoms[0].omega, -dirs[2], atol=1e-14)


def test_representation_identity_random_battery():
    rng = np.random.default_rng(23)
    for _ in range(10):
        n = int(rng.integers(2, 4))
        segs = tuple(
            segment(rng.uniform(-1, 1, n),
                    rng.uniform(-1, 1, n) + _unit(rng, n) * rng.uniform(0.4, 1.0),
                    float(rng.uniform(0.3, 2.0)))
            for _ in range(int(rng.integers(1, 4)))
        )
        rays = tuple(
            ray(rng.uniform(-1, 1, n), _unit(rng, n), float(rng.uniform(0.3, 2.0)))
            for _ in range(int(rng.integers(0, 3)))
        )
        v = DiscreteVarifold(n, segs, rays)
        atoms = vertex_residuals(v)
        for _ in range(20):
            g = bump_field(rng.uniform(-1.5, 1.5, n), float(rng.uniform(0.8, 2.5)),
                           rng.normal(size=n))
            dv = first_variation(v, g)
            rep = sum(
                a.mass * float(np.dot(g.evaluate(a.location), a.omega)) for a in atoms
            )
            assert rep == pytest.approx(dv, abs=1e-8)


def test_is_stationary():
    ok, worst = is_stationary(full_line([0.0, 0.0], [0.6, 0.8]), 1e-10)
    assert ok and worst == 0.0
    ok, worst = is_stationary(y_junction(), 1e-10)
    assert ok
    v = DiscreteVarifold(2, (segment([0, 0], [1, 0], 2.0),), ())
    ok, worst = is_stationary(v, 1e-10)
    assert not ok
    assert worst == pytest.approx(2.0)


def test_stationarity_dilation_invariant():
    rng = np.random.default_rng(5)
    for _ in range(5):
        v = random_stationary_network(rng, 3, n_vertices=3)
        assert is_stationary(v, 1e-10)[0]
        for lam in (0.5, 2.0):
            x = rng.uniform(-1, 1, 3)
            assert is_stationary(dilate(v, x, lam), 1e-10)[0]


# ---------------------------------------------------------------------------
# boundary variation
# ---------------------------------------------------------------------------

def test_boundary_line_through_center():
    v = full_line([0.0, 0.0], [1.0, 0.0])
    atoms = boundary_variation(v, [0, 0], 1.0)
    assert len(atoms) == 2
    omegas = sorted(tuple(a.omega) for a in atoms)
    assert np.allclose(omegas, [(-1.0, 0.0), (1.0, 0.0)])
    for a in atoms:
        radial = a.location / np.linalg.norm(a.location)
        assert float(np.dot(a.omega, radial)) >= -1e-12


def test_boundary_y_junction_three_arms():
    v = y_junction()
    atoms = boundary_variation(v, [0, 0], 0.5)
    assert len(atoms) == 3
    for a in atoms:
        assert a.mass == pytest.approx(1.0)
        assert float(np.dot(a.omega, a.location / 0.5)) == pytest.approx(1.0, abs=1e-12)


def test_boundary_chord_angles():
    d, r = 0.6, 1.0
    v = DiscreteVarifold(2, (segment([-5, d], [5, d]),), ())
    atoms = boundary_variation(v, [0, 0], r)
    assert len(atoms) == 2
    expected_angle = math.acos(math.sqrt(1 - d * d / (r * r)))
    for a in atoms:
        radial = a.location / np.linalg.norm(a.location)
        dot = float(np.dot(a.omega, radial))
        assert dot >= 0.0
        assert math.acos(min(1.0, dot)) == pytest.approx(expected_angle, abs=1e-12)


def test_boundary_atoms_reproduce_first_variation():
    rng = np.random.default_rng(31)
    from varifold_lab import restrict

    for _ in range(10):
        v = random_stationary_network(rng, 3, n_vertices=2)
        y = rng.uniform(-0.5, 0.5, 3)
        r = float(rng.uniform(0.8, 1.6))
        try:
            atoms = boundary_variation(v, y, r)
        except DegenerateGeometryError:
            continue
        vr = restrict(v, y, r, "inside")
        interior = [
            a for a in vertex_residuals(vr)
            if np.linalg.norm(a.location - y) < r - 1e-9
        ]
        g = bump_field(rng.uniform(-1, 1, 3), float(rng.uniform(0.5, 3.0)),
                       rng.normal(size=3))
        dv = first_variation(vr, g)
        rep = sum(a.mass * float(np.dot(g.evaluate(a.location), a.omega))
                  for a in atoms + interior)
        assert rep == pytest.approx(dv, abs=1e-8)


def test_boundary_degeneracies_raise():
    # tangent line
    v = DiscreteVarifold(2, (segment([-2, 1], [2, 1]),), ())
    with pytest.raises(DegenerateGeometryError):
        boundary_variation(v, [0, 0], 1.0)
    # endpoint on the sphere
    v2 = DiscreteVarifold(2, (segment([1, 0], [3, 0]),), ())
    with pytest.raises(DegenerateGeometryError):
        boundary_variation(v2, [0, 0], 1.0)
