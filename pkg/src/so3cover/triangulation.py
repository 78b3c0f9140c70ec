"""Hyperspherically constrained Delaunay triangulation of points on the
3-sphere, via the 4D convex hull.

For a point set spanning R^4 whose convex hull contains the origin (any
antipodally closed set does), the hull facets are exactly the Delaunay
simplices of the spherical triangulation.  The circumcentre of a simplex
is the unit normal of the hyperplane through its four vertices, computed
as the normalized 4-fold vector cross product of the edge vectors; the
sign is fixed by requiring positive inner product with the vertices,
which selects the smaller circumcap and hence the empty-sphere solution.
The covering radius of the set is the maximum simplex circumradius.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

__all__ = [
    "TriangulationS3",
    "cross_product_4d",
    "convex_hull_4d",
    "triangulate",
    "covering_radius",
    "spherical_simplex_volumes",
]

# circumcentre degenerate below this pre-normalization norm
DEGENERATE_TOL = 1e-12


class DegenerateGeometryError(ValueError):
    pass


@dataclass
class TriangulationS3:
    """Delaunay simplices of a point set on S^3 with their circumcaps."""

    points: np.ndarray        # (n, 4) unit vectors
    simplices: np.ndarray     # (m, 4) vertex indices
    circumcentres: np.ndarray  # (m, 4) unit vectors
    circumradii: np.ndarray   # (m,) radians

    @property
    def covering_radius(self):
        return float(self.circumradii.max())


def _cross4_batch(s):
    """4-fold cross product of batched triples of 4-vectors.

    s has shape (..., 3, 4); the result (..., 4) is orthogonal to all
    three inputs with magnitude equal to their parallelepiped 3-volume.
    """
    a, b, c = s[..., 0, :], s[..., 1, :], s[..., 2, :]

    def det3(c0, c1, c2):
        return (
            a[..., c0] * (b[..., c1] * c[..., c2] - b[..., c2] * c[..., c1])
            - a[..., c1] * (b[..., c0] * c[..., c2] - b[..., c2] * c[..., c0])
            + a[..., c2] * (b[..., c0] * c[..., c1] - b[..., c1] * c[..., c0])
        )

    return np.stack(
        [
            det3(1, 2, 3),
            -det3(0, 2, 3),
            det3(0, 1, 3),
            -det3(0, 1, 2),
        ],
        axis=-1,
    )


def cross_product_4d(s1, s2, s3):
    """Vector orthogonal to three 4-vectors (generalized cross product).

    Magnitude equals the 3-volume of the parallelepiped spanned by the
    inputs; near-zero magnitude flags linear dependence.
    """
    s = np.stack([np.asarray(s1, float), np.asarray(s2, float),
                  np.asarray(s3, float)], axis=-2)
    return _cross4_batch(s)


def convex_hull_4d(points):
    """Facet list of the 4D convex hull as (m, 4) vertex-index simplices.

    Non-simplicial facets of degenerate (cospherical) inputs are
    triangulated; all sub-simplices share the facet hyperplane, so
    derived circumcap radii are unaffected.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 4:
        raise ValueError("expected an (n, 4) array of 4-vectors")
    if len(points) < 5:
        raise ValueError("need at least 5 points for a 4D hull")
    try:
        hull = ConvexHull(points, qhull_options="Qt")
    except QhullError as exc:
        raise DegenerateGeometryError(
            "4D hull failed (degenerate input?): %s" % str(exc).splitlines()[0]
        ) from exc
    return hull.simplices, hull.equations


def _circumcaps(points, simplices, equations=None):
    verts = points[simplices]                      # (m, 4, 4)
    edges = verts[:, 1:, :] - verts[:, :1, :]      # (m, 3, 4)
    x = _cross4_batch(edges)
    norms = np.linalg.norm(x, axis=1)
    bad = norms < DEGENERATE_TOL
    if np.any(bad):
        if equations is None:
            raise DegenerateGeometryError(
                "%d degenerate simplices (circumcentre undefined)" % bad.sum()
            )
        # sliver simplices from triangulated degenerate facets still lie
        # on the facet hyperplane; use its (unit) outward normal
        x[bad] = equations[bad, :4]
        norms[bad] = 1.0
    x /= norms[:, None]
    d0 = np.einsum("ij,ij->i", x, verts[:, 0, :])
    x *= np.sign(d0)[:, None]
    radii = np.arccos(np.clip(np.abs(d0), -1.0, 1.0))
    return x, radii


def triangulate(points):
    """Spherical Delaunay triangulation with circumcentres and radii."""
    points = np.asarray(points, dtype=float)
    simplices, equations = convex_hull_4d(points)
    centres, radii = _circumcaps(points, simplices, equations)
    return TriangulationS3(points, simplices, centres, radii)


def covering_radius(arg):
    """Covering radius (radians) of an expanded, antipodally closed set.

    Accepts an OrientationSet or a raw (n, 4) point array.  The maximum
    misorientation of the represented rotation set is twice this value.
    """
    points = getattr(arg, "points", arg)
    return triangulate(points).covering_radius


# degree-5 symmetric triangle quadrature (7 points), barycentric
_TRI_W = np.array(
    [9.0 / 40.0]
    + [(155.0 + np.sqrt(15.0)) / 1200.0] * 3
    + [(155.0 - np.sqrt(15.0)) / 1200.0] * 3
)
_a1 = (6.0 + np.sqrt(15.0)) / 21.0
_a2 = (6.0 - np.sqrt(15.0)) / 21.0
_TRI_L = np.array(
    [
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [1.0 - 2.0 * _a1, _a1, _a1],
        [_a1, 1.0 - 2.0 * _a1, _a1],
        [_a1, _a1, 1.0 - 2.0 * _a1],
        [1.0 - 2.0 * _a2, _a2, _a2],
        [_a2, 1.0 - 2.0 * _a2, _a2],
        [_a2, _a2, 1.0 - 2.0 * _a2],
    ]
)


_RULE_CACHE = {}


def _subdivided_rule(levels):
    """Barycentric nodes/weights of the 7-point rule applied on a
    4^levels uniform refinement of the triangle."""
    if levels in _RULE_CACHE:
        return _RULE_CACHE[levels]
    corners = [np.eye(3)]
    for _ in range(levels):
        refined = []
        for c in corners:
            m01, m02, m12 = (
                (c[0] + c[1]) / 2.0,
                (c[0] + c[2]) / 2.0,
                (c[1] + c[2]) / 2.0,
            )
            refined += [
                np.array([c[0], m01, m02]),
                np.array([m01, c[1], m12]),
                np.array([m02, m12, c[2]]),
                np.array([m01, m12, m02]),
            ]
        corners = refined
    nodes = []
    weights = []
    frac = 1.0 / len(corners)
    for c in corners:
        nodes.append(_TRI_L @ c)
        weights.append(_TRI_W * frac)
    _RULE_CACHE[levels] = (np.concatenate(nodes), np.concatenate(weights))
    return _RULE_CACHE[levels]


def spherical_simplex_volumes(points, simplices, levels=None):
    """Volumes of spherical tetrahedra on S^3.

    Each simplex is the intersection of S^3 with the cone over its
    vertices.  The volume is reduced to an integral over the solid-angle
    triangle at the first vertex: along a geodesic of length t the
    volume element is sin^2(t) dt, so the radial integral has the closed
    form t/2 - sin(2t)/4, leaving a smooth 2D integrand evaluated with a
    fixed-order triangle rule (refined for large simplices).

    Degenerate simplices get volume 0.
    """
    points = np.asarray(points, dtype=float)
    simplices = np.asarray(simplices)
    verts = points[simplices]                    # (m, 4, 4)
    p0 = verts[:, 0, :]
    face = verts[:, 1:, :]                       # (m, 3, 4)

    m_norm = _cross4_batch(face)
    m_len = np.linalg.norm(m_norm, axis=1)
    ok = m_len > DEGENERATE_TOL
    m_norm = np.where(ok[:, None], m_norm / np.where(ok, m_len, 1.0)[:, None], 0.0)
    c0 = np.einsum("ij,ij->i", m_norm, p0)
    m_norm *= np.where(c0 < 0, -1.0, 1.0)[:, None]
    c0 = np.abs(c0)

    # unit tangents at p0 toward the far face
    dots = np.einsum("ikj,ij->ik", face, p0)     # (m, 3)
    u = face - dots[:, :, None] * p0[:, None, :]
    u_len = np.linalg.norm(u, axis=2)
    ok &= np.all(u_len > DEGENERATE_TOL, axis=1)
    u = u / np.where(u_len > DEGENERATE_TOL, u_len, 1.0)[:, :, None]

    if levels is None:
        chords = max(
            float(np.max(np.linalg.norm(u[:, 0] - u[:, 1], axis=1), initial=0.0)),
            float(np.max(np.linalg.norm(u[:, 0] - u[:, 2], axis=1), initial=0.0)),
            float(np.max(np.linalg.norm(u[:, 1] - u[:, 2], axis=1), initial=0.0)),
        )
        levels = int(np.clip(np.ceil(np.log2(max(chords, 1e-9) / 0.25)), 0, 4))
    nodes, weights = _subdivided_rule(levels)

    e1 = u[:, 1] - u[:, 0]
    e2 = u[:, 2] - u[:, 0]
    g11 = np.einsum("ij,ij->i", e1, e1)
    g22 = np.einsum("ij,ij->i", e2, e2)
    g12 = np.einsum("ij,ij->i", e1, e2)
    area2 = np.sqrt(np.maximum(g11 * g22 - g12 * g12, 0.0))  # 2 * area

    nhat = _cross4_batch(np.stack([p0, e1, e2], axis=1))
    nhat_len = np.linalg.norm(nhat, axis=1)
    ok &= nhat_len > DEGENERATE_TOL
    nhat = nhat / np.where(nhat_len > DEGENERATE_TOL, nhat_len, 1.0)[:, None]
    dplane = np.einsum("ij,ij->i", nhat, u[:, 0])
    dplane = np.abs(dplane)

    # y: (m, q, 4) points on the flat tangent triangle
    y = np.matmul(nodes[None, :, :], u)
    y_len = np.sqrt((y * y).sum(axis=2))
    s_omega = np.matmul(y, m_norm[:, :, None])[:, :, 0] / y_len
    t_star = np.arctan2(c0[:, None], -s_omega)
    h = 0.5 * t_star - 0.25 * np.sin(2.0 * t_star)
    integrand = h / y_len**3
    vol = 0.5 * area2 * dplane * (integrand @ weights)
    return np.where(ok, vol, 0.0)
