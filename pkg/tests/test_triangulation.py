import math

import numpy as np
import pytest

from so3cover import quat, symmetry, triangulation

import oracles


def antipodal_cloud(n_pairs, seed):
    q = quat.sample_uniform(n_pairs, seed=seed)
    return np.concatenate([q, -q], axis=0)


def cell_600():
    return symmetry.expand_orbit(
        quat.IDENTITY, symmetry.laue_group("2I")
    ).points


def cell_16():
    return np.concatenate([np.eye(4), -np.eye(4)], axis=0)


def test_cross_product_canonical_basis():
    x = triangulation.cross_product_4d(
        [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]
    )
    assert np.allclose(np.abs(x), [0, 0, 0, 1])


def test_cross_product_orthogonality():
    rng = np.random.default_rng(0)
    for _ in range(20):
        s = rng.normal(size=(3, 4))
        x = triangulation.cross_product_4d(*s)
        assert np.abs(s @ x).max() < 1e-12


def test_cross_product_magnitude_gram():
    rng = np.random.default_rng(1)
    for _ in range(20):
        s = rng.normal(size=(3, 4))
        x = triangulation.cross_product_4d(*s)
        gram = s @ s.T
        assert np.linalg.norm(x) == pytest.approx(
            math.sqrt(np.linalg.det(gram)), rel=1e-10
        )


def test_hull_16_cell():
    simplices, _ = triangulation.convex_hull_4d(cell_16())
    assert len(simplices) == 16


def test_hull_600_cell():
    simplices, _ = triangulation.convex_hull_4d(cell_600())
    assert len(simplices) == 600


def test_hull_rejects_tiny_input():
    with pytest.raises(ValueError, match="at least 5"):
        triangulation.convex_hull_4d(np.eye(4))


def test_hull_matches_brute_force_enumeration():
    pts = antipodal_cloud(5, seed=3)
    simplices, _ = triangulation.convex_hull_4d(pts)
    got = {tuple(sorted(s)) for s in simplices.tolist()}
    want = oracles.brute_force_facets(pts)
    assert got == want


def test_hull_euler_characteristic():
    pts = antipodal_cloud(100, seed=4)
    simplices, equations = triangulation.convex_hull_4d(pts)
    v = len(np.unique(simplices))
    cells = len(simplices)
    edges = set()
    faces = set()
    for s in simplices:
        s = sorted(s)
        for i in range(4):
            for j in range(i + 1, 4):
                edges.add((s[i], s[j]))
            faces.add(tuple(s[:i] + s[i + 1:]))
    # boundary of a 4-polytope is a topological 3-sphere
    assert v - len(edges) + len(faces) - cells == 0
    assert len(faces) == 2 * cells
    assert len(edges) == v + cells
    # all points on the inner side of every facet hyperplane
    worst = (pts @ equations[:, :4].T + equations[:, 4]).max()
    assert worst < 1e-10


def test_triangulate_16_cell():
    tri = triangulation.triangulate(cell_16())
    assert math.degrees(tri.covering_radius) == pytest.approx(60.0, abs=1e-9)


def test_triangulate_600_cell():
    tri = triangulation.triangulate(cell_600())
    assert len(tri.simplices) == 600
    assert math.degrees(tri.covering_radius) == pytest.approx(
        22.238756, abs=1e-4
    )


def test_circumcentres_match_hull_normals():
    pts = antipodal_cloud(60, seed=5)
    tri = triangulation.triangulate(pts)
    _, equations = triangulation.convex_hull_4d(pts)
    assert np.abs(np.abs(np.sum(tri.circumcentres * equations[:, :4], axis=1)) - 1.0).max() < 1e-9


def test_empty_sphere_and_equidistance():
    for seed in range(5):
        pts = antipodal_cloud(80, seed=seed)
        tri = triangulation.triangulate(pts)
        dots = tri.circumcentres @ pts.T
        angles = np.arccos(np.clip(dots, -1.0, 1.0))
        assert np.all(angles >= tri.circumradii[:, None] - 1e-9)
        vert_dots = np.take_along_axis(dots, tri.simplices, axis=1)
        assert vert_dots.std(axis=1).max() < 1e-10


def test_covering_radius_bounds_monte_carlo():
    pts = antipodal_cloud(100, seed=6)
    theta = triangulation.covering_radius(pts)
    mc = oracles.mc_max_min_angle(pts, 200_000, seed=7)
    resolution = 2.5 * (3.0 * math.pi / (2.0 * 200_000)) ** (1.0 / 3.0)
    assert theta >= mc - 1e-12
    assert theta <= mc + 2.0 * resolution


def test_perturbed_600_cell_strictly_worse():
    pts = cell_600().copy()
    axis = np.zeros(4)
    axis[1] = 1.0
    tangent = axis - np.dot(axis, pts[0]) * pts[0]
    tangent /= np.linalg.norm(tangent)
    moved = math.cos(math.radians(0.5)) * pts[0] + math.sin(
        math.radians(0.5)
    ) * tangent
    # keep the antipodal pairing intact
    pair = np.where(np.allclose(pts, -pts[0], atol=1e-12).all() else None, 0, 0)
    idx_neg = int(np.argmin((pts + pts[0][None, :] * 1.0).sum(1) ** 2))
    pts[0] = moved
    pts[idx_neg] = -moved
    theta = triangulation.covering_radius(pts)
    assert math.degrees(theta) > 22.2388 + 0.01


def test_group_relabeling_invariance():
    g = symmetry.laue_group("T")
    rng = np.random.default_rng(8)
    oset = symmetry.expand_orbit(quat.sample_uniform(2, rng=rng), g)
    tri = triangulation.triangulate(oset.points)
    # right multiplication by a group element permutes the points
    shifted = oracles.mul(oset.points, np.asarray(g.elements[4]))
    keyed = {tuple(np.round(p * 1e9).astype(np.int64)): i for i, p in enumerate(quat.canonicalize(oset.points))}
    perm = np.array([
        keyed[tuple(np.round(p * 1e9).astype(np.int64))]
        for p in quat.canonicalize(shifted)
    ])
    mapped = {tuple(sorted(perm[s])) for s in tri.simplices.tolist()}
    original = {tuple(sorted(s)) for s in tri.simplices.tolist()}
    assert mapped == original


def test_spherical_volumes_partition_sphere():
    pts = antipodal_cloud(150, seed=9)
    tri = triangulation.triangulate(pts)
    vols = triangulation.spherical_simplex_volumes(pts, tri.simplices)
    assert np.all(vols > 0)
    assert vols.sum() == pytest.approx(2.0 * math.pi**2, rel=1e-6)


def test_spherical_volumes_600_cell():
    pts = cell_600()
    tri = triangulation.triangulate(pts)
    vols = triangulation.spherical_simplex_volumes(pts, tri.simplices)
    want = 2.0 * math.pi**2 / 600.0
    assert np.abs(vols - want).max() < 1e-9


def test_spherical_volume_matches_quadrature_oracle():
    rng = np.random.default_rng(10)
    q = quat.sample_uniform(40, rng=rng)
    pts = np.concatenate([q, -q])
    tri = triangulation.triangulate(pts)
    vols = triangulation.spherical_simplex_volumes(pts, tri.simplices)
    for idx in (0, 7, 23):
        want = oracles.spherical_tet_volume_quad(pts[tri.simplices[idx]])
        assert vols[idx] == pytest.approx(want, abs=1e-8)
