import math

import numpy as np
import pytest

from so3cover import quat

import oracles


def test_multiply_identity():
    q = quat.normalize([0.3, -0.5, 0.7, 0.2])
    assert np.allclose(quat.multiply(quat.IDENTITY, q), q, atol=1e-15)
    assert np.allclose(quat.multiply(q, quat.IDENTITY), q, atol=1e-15)


def test_multiply_ij_k():
    i = np.array([0.0, 1.0, 0.0, 0.0])
    j = np.array([0.0, 0.0, 1.0, 0.0])
    k = np.array([0.0, 0.0, 0.0, 1.0])
    assert np.allclose(quat.multiply(i, j), k, atol=1e-15)


def test_multiply_matches_matrix_composition():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p, q = quat.sample_uniform(2, rng=rng)
        left = quat.to_rotation_matrix(quat.multiply(p, q))
        right = quat.to_rotation_matrix(p) @ quat.to_rotation_matrix(q)
        assert np.abs(left - right).max() < 1e-12


def test_misorientation_basics():
    rng = np.random.default_rng(1)
    q = quat.sample_uniform(1, rng=rng)[0]
    assert quat.misorientation_angle(q, q) == pytest.approx(0.0, abs=1e-7)
    assert quat.misorientation_angle(q, -q) == pytest.approx(0.0, abs=1e-7)
    phi = 0.7
    p = np.array([math.cos(phi / 2), math.sin(phi / 2), 0.0, 0.0])
    assert quat.misorientation_angle(quat.IDENTITY, p) == pytest.approx(phi, abs=1e-12)


def test_misorientation_symmetry_and_range():
    rng = np.random.default_rng(2)
    p = quat.sample_uniform(200, rng=rng)
    q = quat.sample_uniform(200, rng=rng)
    a = quat.misorientation_angle(p, q)
    b = quat.misorientation_angle(q, p)
    assert np.allclose(a, b)
    assert np.all((a >= 0) & (a <= math.pi))
    assert np.allclose(quat.misorientation_angle(-p, q), a)


def test_rotation_matrix_identity_and_z90():
    assert np.allclose(quat.to_rotation_matrix(quat.IDENTITY), np.eye(3))
    s = math.sqrt(2.0) / 2.0
    got = quat.to_rotation_matrix(np.array([s, 0.0, 0.0, s]))
    want = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    assert np.abs(got - want).max() < 1e-15


def test_rotation_matrix_orthogonal():
    rng = np.random.default_rng(3)
    q = quat.sample_uniform(100, rng=rng)
    m = quat.to_rotation_matrix(q)
    eye = np.einsum("nij,nkj->nik", m, m)
    assert np.abs(eye - np.eye(3)).max() < 1e-12
    assert np.allclose(np.linalg.det(m), 1.0, atol=1e-12)


def test_double_cover_exact():
    rng = np.random.default_rng(4)
    q = quat.sample_uniform(100, rng=rng)
    assert np.array_equal(
        quat.to_rotation_matrix(q), quat.to_rotation_matrix(-q)
    )


def test_metric_matches_relative_rotation_angle():
    rng = np.random.default_rng(5)
    p = quat.sample_uniform(1000, rng=rng)
    q = quat.sample_uniform(1000, rng=rng)
    rel = oracles.mul(quat.conjugate(p), q)
    angle = 2.0 * np.arccos(np.clip(np.abs(rel[:, 0]), -1.0, 1.0))
    assert np.abs(quat.misorientation_angle(p, q) - angle).max() < 1e-10


def test_sample_uniform_deterministic_and_unit():
    a = quat.sample_uniform(1000, seed=42)
    b = quat.sample_uniform(1000, seed=42)
    assert np.array_equal(a, b)
    assert np.abs(np.linalg.norm(a, axis=1) - 1.0).max() < 1e-12
    single = quat.sample_uniform(1, seed=0)
    assert single.shape == (1, 4)
    assert abs(np.linalg.norm(single) - 1.0) < 1e-12


def test_sample_uniform_statistics():
    n = 100_000
    q = quat.sample_uniform(n, seed=7)
    assert np.abs(q.mean(axis=0)).max() < 0.01
    # |<q, e>| for a fixed axis, against the normalized-Gaussian oracle
    rng = np.random.default_rng(8)
    g = rng.normal(size=(n, 4))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    e = np.array([1.0, 0.0, 0.0, 0.0])
    ours = np.abs(q @ e).mean()
    reference = np.abs(g @ e).mean()
    # both estimate E|<q,e>| = 4/(3 pi); allow 3.5 combined sigmas
    sigma = 0.265 / math.sqrt(n)
    assert abs(ours - reference) < 3.5 * math.sqrt(2.0) * sigma


def test_rf_round_trip_and_specials():
    assert np.allclose(quat.to_rf(quat.IDENTITY), np.zeros(3))
    assert np.allclose(
        quat.from_rf(np.ones(3)), np.full(4, 0.5), atol=1e-15
    )
    rng = np.random.default_rng(9)
    q = quat.sample_uniform(200, rng=rng)
    keep = np.abs(q[:, 0]) > 1e-3
    q = q[keep]
    back = quat.from_rf(quat.to_rf(q))
    err = 1.0 - np.abs(np.sum(back * q, axis=1))
    assert err.max() < 1e-12


def test_rf_magnitude_is_tan_half_angle():
    rng = np.random.default_rng(10)
    q = quat.sample_uniform(200, rng=rng)
    q = q[np.abs(q[:, 0]) > 1e-2]
    mag = np.linalg.norm(quat.to_rf(q), axis=1)
    angle = quat.misorientation_angle(q, quat.IDENTITY)
    assert np.abs(mag - np.tan(angle / 2.0)).max() < 1e-9


def test_rf_radial_symmetry():
    # same rotation angle about different axes gives the same magnitude
    phi = 1.1
    axes = np.array([[1, 0, 0], [0, 1, 0], [3, -2, 1]], dtype=float)
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    qs = np.column_stack(
        [np.full(3, math.cos(phi / 2)), math.sin(phi / 2) * axes]
    )
    mags = np.linalg.norm(quat.to_rf(qs), axis=1)
    assert np.ptp(mags) < 1e-14


def test_rf_rejects_near_180():
    q = np.array([1e-8, 1.0, 0.0, 0.0])
    q /= np.linalg.norm(q)
    with pytest.raises(ValueError, match="rotate frame"):
        quat.to_rf(q)


def test_canonicalize():
    assert quat.canonicalize(np.array([-1.0, 0, 0, 0]))[0] == 1.0
    v = quat.canonicalize(np.array([0.0, -1.0, 0, 0]))
    assert v[1] == 1.0
    rng = np.random.default_rng(11)
    q = quat.sample_uniform(100, rng=rng)
    c = quat.canonicalize(q)
    assert np.all(c[:, 0] > 0)
    assert np.allclose(np.abs(np.sum(c * q, axis=1)), 1.0, atol=1e-12)
