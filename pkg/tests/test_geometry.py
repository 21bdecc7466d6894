import numpy as np
import pytest

from conekernel import geometry as geo
from conekernel.errors import (
    AssumptionViolated,
    DegenerateFace,
    StraightEdge,
)

SQ2 = np.sqrt(2.0)


@pytest.fixture(scope="module")
def octant():
    return geo.octant_cone()


@pytest.fixture(scope="module")
def cube():
    return geo.unit_cube()


def test_octant_construction(octant):
    assert octant.n_edges == 3
    assert octant.convex
    np.testing.assert_allclose(octant.inner_angles, np.pi / 2, atol=1e-12)


def test_make_cone_rejects_antipodal_pair():
    with pytest.raises(DegenerateFace):
        geo.make_cone([[1, 0, 0], [0, 1, 0], [-1, 0, 0]])


def test_make_cone_rejects_coplanar_fan():
    # vertices around a full great circle describe a half-space, which has
    # flat inner angles everywhere
    ang = [0.0, 2 * np.pi / 3, 4 * np.pi / 3]
    dirs = [[np.cos(a), np.sin(a), 0.0] for a in ang]
    with pytest.raises(StraightEdge):
        geo.make_cone(dirs)


def test_make_cone_rejects_non_unit():
    with pytest.raises(geo.NonUnitDirection):
        geo.make_cone([[1, 0, 0], [0, 2, 0], [0, 0, 1]])


def test_dist_vertex(octant):
    assert geo.dist_vertex(octant, [0, 0, 0]) == 0.0
    assert np.isclose(geo.dist_vertex(octant, [1, 1, 1]), np.sqrt(3))
    assert np.isclose(geo.dist_vertex(octant, [3, 4, 0]), 5.0)


def test_dist_edge(octant):
    assert np.isclose(geo.dist_edge(octant, 0, [0, 1, 1]), SQ2)
    assert np.isclose(geo.dist_edge(octant, 0, [5, 1, 0]), 1.0)
    assert np.isclose(geo.dist_edge(octant, 1, 2 * octant.vertex_dirs[1]),
                      0.0)
    with pytest.raises(IndexError):
        geo.dist_edge(octant, 7, [1, 1, 1])


def test_dist_boundary(octant, cube):
    assert np.isclose(geo.dist_boundary(octant, [1, 1, 1]), 1.0)
    assert np.isclose(geo.dist_boundary(octant, [2, 3, 0]), 0.0)
    assert np.isclose(geo.dist_boundary(cube, [0.5, 0.5, 0.5]), 0.5)


def test_dist_edge_set(octant, cube):
    assert np.isclose(geo.dist_edge_set(cube, [0.5, 0.1, 0.1]),
                      np.sqrt(0.02))
    v0 = cube.vertices[0]
    assert np.isclose(geo.dist_edge_set(cube, v0), 0.0)
    assert np.isclose(geo.dist_vertex_set(cube, v0), 0.0)
    assert np.isclose(geo.dist_edge_set(octant, [1, 1, 1]), SQ2)


def test_inner_angle_octant_and_reflex(octant):
    assert np.isclose(geo.inner_angle(octant, 0), np.pi / 2)
    complement = geo.make_cone(np.eye(3)[[0, 2, 1]])
    for i in range(3):
        assert np.isclose(geo.inner_angle(complement, i), 3 * np.pi / 2,
                          atol=1e-9)
    assert not complement.convex
    assert complement.contains([-1.0, -1.0, -1.0])
    assert not complement.contains([1.0, 1.0, 1.0])


def test_tetrahedron_vertex_cone_angle():
    tet = geo.platonic_solid("tetrahedron")
    cone = tet.vertex_cones[0]
    np.testing.assert_allclose(cone.inner_angles,
                               np.arctan(2 * SQ2), atol=1e-9)


def test_solid_angles(cube):
    assert np.isclose(geo.solid_angle(cube, 0), np.pi / 2, atol=1e-9)
    tet = geo.platonic_solid("tetrahedron")
    assert np.isclose(geo.solid_angle(tet, 0), np.arccos(23.0 / 27.0),
                      atol=1e-9)
    octa = geo.platonic_solid("octahedron")
    assert np.isclose(geo.solid_angle(octa, 0), 4 * np.arcsin(1.0 / 3.0),
                      atol=1e-9)


def test_cube_combinatorics(cube):
    assert len(cube.faces) == 6
    assert len(cube.edges) == 12
    assert cube.vertices.shape == (8, 3)
    assert cube.is_convex
    np.testing.assert_allclose(cube.edge_angles, np.pi / 2, atol=1e-9)
    assert np.isclose(cube.diameter, np.sqrt(3))


def test_distance_chain_invariant(octant, cube):
    rng = np.random.default_rng(42)
    pts = octant.sample_interior(10_000, rng, radius=3.0)
    d_b = octant.dist_boundary(pts)
    d_e = octant.dist_edges(pts)
    d_v = octant.dist_vertex(pts)
    d_each = octant.edge_distances(pts)
    eps = 1e-12
    assert np.all(d_b <= d_e + eps)
    assert np.all(d_e <= d_each.min(axis=1) + eps)
    assert np.all(d_each.max(axis=1) <= d_v + eps)

    pts = cube.sample_interior(10_000, rng)
    d_b = cube.dist_boundary(pts)
    d_e = cube.dist_edges(pts)
    assert np.all(d_b <= d_e + eps)
    for j, (a, b) in enumerate(cube.edges):
        d_j = cube.dist_edge(j, pts)
        assert np.all(d_e <= d_j + eps)
        for v in (a, b):
            d_v = np.linalg.norm(pts - cube.vertices[v], axis=1)
            assert np.all(d_j <= d_v + eps)


def test_edge_projection_comparability(octant):
    # d(x, E_i) <= |x - |x| p_i| <= 2 d(x, E_i) on interior samples
    rng = np.random.default_rng(7)
    pts = octant.sample_interior(10_000, rng, radius=5.0)
    r = np.linalg.norm(pts, axis=1)
    for i in range(octant.n_edges):
        proj = np.linalg.norm(pts - r[:, None] * octant.vertex_dirs[i],
                              axis=1)
        d = octant.dist_edge(i, pts)
        assert np.all(d <= proj + 1e-12)
        assert np.all(proj <= 2 * d + 1e-9)


def test_cone_scaling_homogeneity(octant):
    rng = np.random.default_rng(3)
    pts = octant.sample_interior(200, rng, radius=1.0)
    for s in (0.01, 0.5, 7.0, 1e3):
        np.testing.assert_allclose(octant.dist_boundary(s * pts),
                                   s * octant.dist_boundary(pts),
                                   rtol=1e-12)
        np.testing.assert_allclose(octant.dist_edges(s * pts),
                                   s * octant.dist_edges(pts), rtol=1e-12)
        np.testing.assert_allclose(octant.dist_vertex(s * pts),
                                   s * octant.dist_vertex(pts), rtol=1e-12)


def test_single_factor_collapse_bracket(octant):
    # the product of per-edge capped ratios is comparable to its argmin
    # factor alone, uniformly over x and r (bracket frozen empirically)
    rng = np.random.default_rng(11)
    pts = octant.sample_interior(10_000, rng, radius=2.0)
    d_v = octant.dist_vertex(pts)
    d_each = octant.edge_distances(pts)
    k = np.argmin(d_each, axis=1)
    rows = np.arange(pts.shape[0])
    for r in (1e-2, 1e-1, 1.0, 1e2):
        num = np.minimum(d_each, r)
        den = np.minimum(d_v, r)[:, None]
        full = np.prod(num / den, axis=1)
        single = num[rows, k] / den[:, 0]
        ratio = full / single
        assert np.all(ratio <= 1.0 + 1e-12)
        assert np.all(ratio >= 1.0 / 16.0)


def test_boundary_classification(octant, cube):
    face_pt = np.array([0.7, 0.4, 0.0])
    assert not octant.contains(face_pt)
    assert octant.contains(face_pt + [0, 0, 1e-6])
    assert np.isclose(octant.dist_boundary(face_pt), 0.0, atol=1e-12)
    assert not cube.contains([0.5, 0.5, 1.0])
    assert cube.contains([0.5, 0.5, 1.0 - 1e-6])


def test_validate_assumptions(octant, cube):
    rep = geo.validate_assumptions(octant)
    assert rep.passed and 0 < rep.r0 < 1 and 0 < rep.r1 < 1
    rep = geo.validate_assumptions(cube)
    assert rep.passed and rep.r2 is not None


def test_wedge_domain():
    w = geo.quarter_space_wedge()
    assert w.contains([1.0, 1.0, -2.0])
    assert not w.contains([1.0, -0.1, 0.0])
    assert np.isclose(w.dist_boundary([1.0, 0.5, 3.0]), 0.5)
    assert np.isclose(w.dist_edges([3.0, 4.0, -1.0]), 5.0)
    spec = w.spec
    np.testing.assert_allclose(spec.rotation @ spec.rotation.T, np.eye(3),
                               atol=1e-12)
    assert np.isclose(np.linalg.det(spec.rotation), 1.0)


def test_cone_wedge_specs(octant):
    for i in range(3):
        spec = octant.wedge_spec(i)
        assert np.isclose(spec.kappa, np.pi / 2)
        # local wedge membership agrees with the cone near the edge
        rng = np.random.default_rng(i)
        loc = np.column_stack([rng.uniform(0.01, 0.3, 64),
                               rng.uniform(0.01, 0.3, 64),
                               rng.uniform(-0.2, 0.2, 64)])
        theta = rng.uniform(0.01, spec.kappa - 0.01, 64)
        rho = rng.uniform(0.01, 0.2, 64)
        loc = np.column_stack([rho * np.cos(theta), rho * np.sin(theta),
                               rng.uniform(-0.2, 0.2, 64)])
        pts = octant.vertex_dirs[i] + spec.to_world(loc)
        assert np.all(octant.contains(pts))


def test_domain_json_roundtrip(tmp_path, octant):
    p = tmp_path / "dom.json"
    p.write_text('{"type": "cone", "vertex_dirs": '
                 '[[1,0,0],[0,1,0],[0,0,1]]}')
    d = geo.load_domain(str(p))
    assert isinstance(d, geo.PolyhedralCone)
    b = geo.load_domain("builtin:quarter_space_wedge(1.0)")
    assert isinstance(b, geo.Wedge) and np.isclose(b.kappa, 1.0)
    with pytest.raises(ValueError, match="vertex_dirs"):
        geo.domain_from_dict({"type": "cone"})


def test_halfspace_and_freespace():
    h = geo.HalfSpace()
    assert h.contains([0, 0, 1e-6])
    assert not h.contains([0, 0, -1e-6])
    assert np.isclose(h.dist_boundary([2, 3, 0.4]), 0.4)
    f = geo.FreeSpace()
    assert f.contains([1e9, -1e9, 0])
    assert np.isinf(f.dist_boundary([0, 0, 0]))
