"""Finite quaternion groups for the 11 Laue classes plus the binary
icosahedral group, orbit expansion of basis sets, and subgroup rebasing.

Group elements are stored modulo sign with canonical-sign representatives
(antipodal completion is implicit and applied only when a basis is
expanded into a full point set).  Right multiplication by group elements
is the symmetry action throughout: P = { b o g | b in B, g in G }.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import quat

__all__ = [
    "GROUP_NAMES",
    "QuaternionGroup",
    "OrientationSet",
    "GroupReport",
    "laue_group",
    "verify_group",
    "expand_orbit",
    "rebase_to_subgroup",
    "is_subgroup",
    "multiplication_table",
]

# component-wise tolerance for identifying equal elements / points after
# canonical sign normalization
DEDUP_TOL = 1e-9

_SQ2 = np.sqrt(2.0) / 2.0
_SQ3 = np.sqrt(3.0) / 2.0

# Rotational point-group elements (one quaternion per rotation, up to
# sign) for the seven Laue classes inside the octahedral family.  Each
# row: components, then membership flags for O, T, D4, D2, C4, C2, C1.
_CUBIC_FAMILY = [
    ((1.0, 0.0, 0.0, 0.0), (1, 1, 1, 1, 1, 1, 1)),
    ((0.0, 0.0, 0.0, 1.0), (1, 1, 1, 1, 1, 1, 0)),
    ((0.0, 1.0, 0.0, 0.0), (1, 1, 1, 1, 0, 0, 0)),
    ((0.0, 0.0, 1.0, 0.0), (1, 1, 1, 1, 0, 0, 0)),
    ((_SQ2, 0.0, 0.0, _SQ2), (1, 0, 1, 0, 1, 0, 0)),
    ((_SQ2, 0.0, 0.0, -_SQ2), (1, 0, 1, 0, 1, 0, 0)),
    ((0.0, _SQ2, _SQ2, 0.0), (1, 0, 1, 0, 0, 0, 0)),
    ((0.0, -_SQ2, _SQ2, 0.0), (1, 0, 1, 0, 0, 0, 0)),
    ((0.5, 0.5, -0.5, 0.5), (1, 1, 0, 0, 0, 0, 0)),
    ((0.5, 0.5, 0.5, -0.5), (1, 1, 0, 0, 0, 0, 0)),
    ((0.5, 0.5, -0.5, -0.5), (1, 1, 0, 0, 0, 0, 0)),
    ((0.5, -0.5, -0.5, -0.5), (1, 1, 0, 0, 0, 0, 0)),
    ((0.5, -0.5, 0.5, 0.5), (1, 1, 0, 0, 0, 0, 0)),
    ((0.5, -0.5, 0.5, -0.5), (1, 1, 0, 0, 0, 0, 0)),
    ((0.5, -0.5, -0.5, 0.5), (1, 1, 0, 0, 0, 0, 0)),
    ((0.5, 0.5, 0.5, 0.5), (1, 1, 0, 0, 0, 0, 0)),
    ((_SQ2, _SQ2, 0.0, 0.0), (1, 0, 0, 0, 0, 0, 0)),
    ((_SQ2, -_SQ2, 0.0, 0.0), (1, 0, 0, 0, 0, 0, 0)),
    ((_SQ2, 0.0, _SQ2, 0.0), (1, 0, 0, 0, 0, 0, 0)),
    ((_SQ2, 0.0, -_SQ2, 0.0), (1, 0, 0, 0, 0, 0, 0)),
    ((0.0, _SQ2, 0.0, _SQ2), (1, 0, 0, 0, 0, 0, 0)),
    ((0.0, -_SQ2, 0.0, _SQ2), (1, 0, 0, 0, 0, 0, 0)),
    ((0.0, 0.0, _SQ2, _SQ2), (1, 0, 0, 0, 0, 0, 0)),
    ((0.0, 0.0, -_SQ2, _SQ2), (1, 0, 0, 0, 0, 0, 0)),
]
_CUBIC_COLUMNS = ("O", "T", "D4", "D2", "C4", "C2", "C1")

# Laue classes inside the hexagonal family.  Membership flags for
# D6, D3, C6, C3, C1.
_HEX_FAMILY = [
    ((1.0, 0.0, 0.0, 0.0), (1, 1, 1, 1, 1)),
    ((0.5, 0.0, 0.0, _SQ3), (1, 1, 1, 1, 0)),
    ((0.5, 0.0, 0.0, -_SQ3), (1, 1, 1, 1, 0)),
    ((0.0, 0.0, 0.0, 1.0), (1, 0, 1, 0, 0)),
    ((_SQ3, 0.0, 0.0, 0.5), (1, 0, 1, 0, 0)),
    ((_SQ3, 0.0, 0.0, -0.5), (1, 0, 1, 0, 0)),
    ((0.0, 1.0, 0.0, 0.0), (1, 1, 0, 0, 0)),
    ((0.0, -0.5, _SQ3, 0.0), (1, 1, 0, 0, 0)),
    ((0.0, 0.5, _SQ3, 0.0), (1, 1, 0, 0, 0)),
    ((0.0, _SQ3, 0.5, 0.0), (1, 0, 0, 0, 0)),
    ((0.0, -_SQ3, 0.5, 0.0), (1, 0, 0, 0, 0)),
    ((0.0, 0.0, 1.0, 0.0), (1, 0, 0, 0, 0)),
]
_HEX_COLUMNS = ("D6", "D3", "C6", "C3", "C1")

GROUP_NAMES = ("C1", "C2", "C3", "C4", "C6", "D2", "D3", "D4", "D6", "T", "O", "2I")

_EXPECTED_ORDER = {
    "C1": 1, "C2": 2, "C3": 3, "C4": 4, "C6": 6,
    "D2": 4, "D3": 6, "D4": 8, "D6": 12,
    "T": 12, "O": 24, "2I": 60,
}


@dataclass(frozen=True)
class QuaternionGroup:
    """A finite quaternion group stored modulo sign.

    elements holds one canonical-sign representative per rotation; the
    implied full binary group is {+-g}.
    """

    name: str
    elements: np.ndarray  # (m, 4)

    @property
    def order(self):
        return len(self.elements)


@dataclass
class OrientationSet:
    """Basis points, acting group, and the expanded antipodal point set.

    points is the antipodally closed expansion {+-(b o g)}, deduplicated
    under canonical sign.  n_points (the N of covering reports) counts
    the caps; the set represents n_points / 2 distinct rotations.  theta
    caches a measured covering radius in radians when one is known.
    """

    basis: np.ndarray
    group: QuaternionGroup
    points: np.ndarray
    n_rotations: int
    theta: float | None = None

    @property
    def n_points(self):
        return len(self.points)


@dataclass
class GroupReport:
    """Outcome of the structural checks on a quaternion group."""

    name: str
    order: int
    ok: bool
    issues: list = field(default_factory=list)


def _dedup_canonical(q):
    """Canonicalize signs and drop duplicate rows (tolerance DEDUP_TOL)."""
    c = quat.canonicalize(q)
    keyed = np.round(c / DEDUP_TOL) * DEDUP_TOL
    _, idx = np.unique(keyed, axis=0, return_index=True)
    return c[np.sort(idx)]


def _family_group(name, rows, columns):
    col = columns.index(name)
    sel = [r for r, flags in rows if flags[col]]
    return quat.canonicalize(np.array(sel))


def _binary_icosahedral():
    """Element list of 2I (mod sign) by closure from two generators."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    gens = np.array(
        [
            [0.5, 0.5, 0.5, 0.5],
            [phi / 2.0, 0.5, 1.0 / (2.0 * phi), 0.0],
        ]
    )
    elements = [np.array([1.0, 0.0, 0.0, 0.0])]
    frontier = list(gens)
    seen = {_key(elements[0])}
    while frontier:
        g = frontier.pop()
        k = _key(g)
        if k in seen:
            continue
        seen.add(k)
        elements.append(g)
        for h in list(elements):
            for prod in (quat._mul_raw(g, h), quat._mul_raw(h, g)):
                p = quat.canonicalize(quat.normalize(prod))
                if _key(p) not in seen:
                    frontier.append(p)
    return _dedup_canonical(np.array(elements))


def _key(q):
    return tuple(np.round(np.asarray(q) / DEDUP_TOL).astype(np.int64))


_GROUP_CACHE = {}


def laue_group(name):
    """Return the quaternion group for a Laue label (or "2I").

    Element lists for the eleven Laue classes are the tabulated
    generators of the octahedral and hexagonal families; 2I is built by
    closure from its generators and verified structurally.
    """
    if name not in GROUP_NAMES:
        raise ValueError(
            "unknown group %r; valid names: %s" % (name, ", ".join(GROUP_NAMES))
        )
    if name not in _GROUP_CACHE:
        if name == "2I":
            elems = _binary_icosahedral()
        elif name in _CUBIC_COLUMNS:
            elems = _family_group(name, _CUBIC_FAMILY, _CUBIC_COLUMNS)
        else:
            elems = _family_group(name, _HEX_FAMILY, _HEX_COLUMNS)
        elems.setflags(write=False)
        _GROUP_CACHE[name] = QuaternionGroup(name, elems)
    return _GROUP_CACHE[name]


def _element_index(elements):
    return {_key(e): i for i, e in enumerate(elements)}


def verify_group(group):
    """Structural checks: identity membership, sign-modulo closure,
    expected cardinality.  Findings are reported, not raised."""
    issues = []
    elems = np.asarray(group.elements)
    index = _element_index(elems)
    if _key(quat.IDENTITY) not in index:
        issues.append("identity {1,0,0,0} missing")
    norms = np.linalg.norm(elems, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-12):
        issues.append("non-unit element present")
    expected = _EXPECTED_ORDER.get(group.name)
    if expected is not None and len(elems) != expected:
        issues.append("order %d != expected %d" % (len(elems), expected))
    for i, g in enumerate(elems):
        prods = quat.canonicalize(quat.normalize(quat._mul_raw(g, elems)))
        for j in range(len(elems)):
            if _key(prods[j]) not in index:
                issues.append(
                    "closure violation: element %d o element %d = %s not in group"
                    % (i, j, np.array_str(prods[j], precision=6))
                )
    return GroupReport(group.name, len(elems), not issues, issues)


def expand_orbit(basis, group):
    """Expand a basis through a group: P = {+-(b o g)}, deduplicated.

    For a basis in generic position |points| = 2 |B| |G|.  A basis point
    on a symmetry axis produces coincident orbit copies; those are
    merged with a warning rather than treated as fatal.
    """
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    if basis.size == 0:
        raise ValueError("basis must be non-empty")
    basis = quat.normalize(basis)
    prods = quat._mul_raw(basis[:, None, :], group.elements[None, :, :])
    reps = _dedup_canonical(prods.reshape(-1, 4))
    expected = len(basis) * group.order
    if len(reps) < expected:
        warnings.warn(
            "orbit expansion produced %d rotations instead of %d "
            "(basis point on a symmetry axis?)" % (len(reps), expected),
            stacklevel=2,
        )
    points = np.concatenate([reps, -reps], axis=0)
    return OrientationSet(
        basis=basis,
        group=group,
        points=points,
        n_rotations=len(reps),
    )


def is_subgroup(sub, sup):
    """True when every element of sub appears in sup (modulo sign)."""
    index = _element_index(np.asarray(sup.elements))
    return all(_key(e) in index for e in np.asarray(sub.elements))


def rebase_to_subgroup(oset, subgroup_name):
    """Re-express an orientation set over a subgroup of its group.

    The expanded point set is unchanged (hence so is the covering
    radius); the basis is enlarged by deterministic left-coset
    representatives of the subgroup in the original group.
    """
    sub = laue_group(subgroup_name)
    sup = oset.group
    if not is_subgroup(sub, sup):
        raise ValueError(
            "%s is not a subgroup of %s; valid rebase targets follow the "
            "octahedral-family and hexagonal-family subset tables"
            % (sub.name, sup.name)
        )
    sub_elems = np.asarray(sub.elements)
    sup_elems = np.asarray(sup.elements)
    sup_index = _element_index(sup_elems)
    assigned = np.zeros(sup.order, dtype=bool)
    reps = []
    # deterministic representatives: walk the supergroup in lexicographic
    # order, so each left coset r o H is represented by its smallest
    # canonical member
    for i in np.lexsort(sup_elems.T[::-1]):
        if assigned[i]:
            continue
        r = sup_elems[i]
        reps.append(r)
        coset = quat.canonicalize(quat.normalize(quat._mul_raw(r, sub_elems)))
        for c in coset:
            j = sup_index.get(_key(c))
            if j is None:
                raise ValueError("subgroup cosets escape the supergroup")
            assigned[j] = True
    new_basis = quat._mul_raw(
        np.asarray(oset.basis)[:, None, :], np.asarray(reps)[None, :, :]
    ).reshape(-1, 4)
    new_basis = quat.canonicalize(quat.normalize(new_basis))
    out = expand_orbit(new_basis, sub)
    out.theta = oset.theta
    return out


def multiplication_table(group):
    """Cayley table modulo sign.

    Returns (prod_idx, prod_sign, inv_idx, inv_sign) where
    g[i] o g[j] = prod_sign[i, j] * g[prod_idx[i, j]] and
    inverse(g[i]) = inv_sign[i] * g[inv_idx[i]].
    """
    elems = np.asarray(group.elements)
    m = len(elems)
    index = _element_index(elems)
    prod_idx = np.empty((m, m), dtype=np.int64)
    prod_sign = np.empty((m, m), dtype=np.int8)
    for i in range(m):
        prods = quat.normalize(quat._mul_raw(elems[i], elems))
        canon = quat.canonicalize(prods)
        for j in range(m):
            k = index.get(_key(canon[j]))
            if k is None:
                raise ValueError("group %s is not closed" % group.name)
            prod_idx[i, j] = k
            prod_sign[i, j] = 1 if np.dot(prods[j], canon[j]) > 0 else -1
    inv_idx = np.empty(m, dtype=np.int64)
    inv_sign = np.empty(m, dtype=np.int8)
    for i in range(m):
        inv = quat.conjugate(elems[i])
        canon = quat.canonicalize(inv)
        inv_idx[i] = index[_key(canon)]
        inv_sign[i] = 1 if np.dot(inv, canon) > 0 else -1
    return prod_idx, prod_sign, inv_idx, inv_sign
