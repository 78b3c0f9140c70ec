import numpy as np
import pytest

from so3cover import quat, symmetry, triangulation

import oracles

EXPECTED_ORDERS = {
    "C1": 1, "C2": 2, "C3": 3, "C4": 4, "C6": 6,
    "D2": 4, "D3": 6, "D4": 8, "D6": 12, "T": 12, "O": 24, "2I": 60,
}


@pytest.mark.parametrize("name", symmetry.GROUP_NAMES)
def test_groups_verify(name):
    g = symmetry.laue_group(name)
    assert g.order == EXPECTED_ORDERS[name]
    report = symmetry.verify_group(g)
    assert report.ok, report.issues


def test_unknown_group():
    with pytest.raises(ValueError, match="C1"):
        symmetry.laue_group("X9")


def test_c1_is_identity_only():
    g = symmetry.laue_group("C1")
    assert g.order == 1
    assert np.allclose(g.elements[0], quat.IDENTITY)


def test_octahedral_contains_half_integer_elements():
    g = symmetry.laue_group("O")
    halves = [e for e in g.elements if np.allclose(np.abs(e), 0.5)]
    assert len(halves) == 8


def test_d6_contains_sixfold_rotation():
    g = symmetry.laue_group("D6")
    target = np.array([0.5, 0.0, 0.0, np.sqrt(3.0) / 2.0])
    assert any(np.allclose(e, target) for e in g.elements)


def test_verify_detects_broken_closure():
    g = symmetry.laue_group("O")
    broken = symmetry.QuaternionGroup("O", g.elements[:-1])
    report = symmetry.verify_group(broken)
    assert not report.ok
    assert any("closure" in msg for msg in report.issues)


def test_2i_closure_brute_force():
    g = symmetry.laue_group("2I")
    elems = np.asarray(g.elements)
    keys = {oracles_key(e) for e in elems}
    assert len(keys) == 60
    for a in elems:
        prods = oracles.mul(a[None, :], elems)
        prods /= np.linalg.norm(prods, axis=1, keepdims=True)
        for p in prods:
            assert oracles_key(quat.canonicalize(p)) in keys


def oracles_key(e):
    return tuple(np.round(np.asarray(e) * 1e9).astype(np.int64))


def test_expand_identity_2i_is_600_cell():
    oset = symmetry.expand_orbit(quat.IDENTITY, symmetry.laue_group("2I"))
    assert oset.n_points == 120
    dots = np.abs(oset.points @ oset.points.T)
    np.fill_diagonal(dots, 0.0)
    # nearest-neighbour separation of the 600-cell vertex set is 36 deg
    min_angle = np.degrees(np.arccos(np.clip(dots.max(), -1, 1)))
    assert min_angle == pytest.approx(36.0, abs=1e-9)


def test_expand_identity_c1():
    oset = symmetry.expand_orbit(quat.IDENTITY, symmetry.laue_group("C1"))
    assert oset.n_points == 2
    assert np.allclose(oset.points[0], quat.IDENTITY)
    assert np.allclose(oset.points[1], -quat.IDENTITY)


def _sorted_rows(points):
    c = quat.canonicalize(points)
    keyed = np.round(c * 1e9).astype(np.int64)
    order = np.lexsort(keyed.T[::-1])
    return keyed[order]


def test_orbit_invariance_under_group_shift():
    g = symmetry.laue_group("O")
    rng = np.random.default_rng(21)
    b = quat.sample_uniform(1, rng=rng)
    shifted = oracles.mul(b[0], g.elements[5])
    shifted /= np.linalg.norm(shifted)
    a = symmetry.expand_orbit(b, g)
    c = symmetry.expand_orbit(shifted, g)
    assert a.n_points == c.n_points == 48
    assert np.array_equal(_sorted_rows(a.points), _sorted_rows(c.points))
    ta = triangulation.covering_radius(a.points)
    tc = triangulation.covering_radius(c.points)
    assert ta == pytest.approx(tc, abs=1e-12)


def test_expand_warns_on_coincident_orbits():
    g = symmetry.laue_group("O")
    basis = np.stack([quat.IDENTITY, np.asarray(g.elements[3])])
    with pytest.warns(UserWarning, match="symmetry axis"):
        oset = symmetry.expand_orbit(basis, g)
    assert oset.n_points == 48  # the two orbits coincide


def test_antipodal_closure():
    rng = np.random.default_rng(22)
    oset = symmetry.expand_orbit(
        quat.sample_uniform(3, rng=rng), symmetry.laue_group("D4")
    )
    rows = _sorted_rows(oset.points)
    neg = _sorted_rows(-oset.points)
    assert np.array_equal(rows, neg)


@pytest.mark.parametrize("name", ["C2", "C4", "D2", "D4", "T"])
def test_octahedral_family_subsets(name):
    assert symmetry.is_subgroup(
        symmetry.laue_group(name), symmetry.laue_group("O")
    )


@pytest.mark.parametrize("name", ["C3", "C6", "D3"])
def test_hexagonal_family_subsets(name):
    assert symmetry.is_subgroup(
        symmetry.laue_group(name), symmetry.laue_group("D6")
    )


def test_rebase_o_to_c1():
    rng = np.random.default_rng(23)
    oset = symmetry.expand_orbit(
        quat.sample_uniform(1, rng=rng), symmetry.laue_group("O")
    )
    rebased = symmetry.rebase_to_subgroup(oset, "C1")
    assert len(rebased.basis) == 24 * len(oset.basis)
    assert rebased.group.name == "C1"
    assert np.array_equal(_sorted_rows(oset.points), _sorted_rows(rebased.points))


def test_rebase_d6_to_c3():
    rng = np.random.default_rng(24)
    oset = symmetry.expand_orbit(
        quat.sample_uniform(2, rng=rng), symmetry.laue_group("D6")
    )
    rebased = symmetry.rebase_to_subgroup(oset, "C3")
    assert len(rebased.basis) == 4 * len(oset.basis)
    assert np.array_equal(_sorted_rows(oset.points), _sorted_rows(rebased.points))
    assert triangulation.covering_radius(rebased.points) == pytest.approx(
        triangulation.covering_radius(oset.points), abs=1e-12
    )


def test_rebase_rejects_non_subgroup():
    rng = np.random.default_rng(25)
    oset = symmetry.expand_orbit(
        quat.sample_uniform(1, rng=rng), symmetry.laue_group("O")
    )
    with pytest.raises(ValueError, match="family"):
        symmetry.rebase_to_subgroup(oset, "D6")


def test_multiplication_table_consistent():
    g = symmetry.laue_group("D6")
    prod_idx, prod_sign, inv_idx, inv_sign = symmetry.multiplication_table(g)
    elems = np.asarray(g.elements)
    for i in range(g.order):
        for j in range(g.order):
            want = oracles.mul(elems[i], elems[j])
            got = prod_sign[i, j] * elems[prod_idx[i, j]]
            assert np.allclose(want, got, atol=1e-12)
        inv = inv_sign[i] * elems[inv_idx[i]]
        assert np.allclose(
            oracles.mul(elems[i], inv), quat.IDENTITY, atol=1e-12
        )
