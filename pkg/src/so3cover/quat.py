"""Unit quaternion algebra for orientation sampling on the 3-sphere.

Quaternions are stored as numpy arrays of shape (..., 4) in (w, x, y, z)
component order, Hamilton multiplication convention.  A unit quaternion q
and its antipode -q describe the same rotation, so most routines either
work modulo sign or say explicitly that they do not.

All angles are in radians.
"""

import numpy as np

__all__ = [
    "IDENTITY",
    "W_MIN",
    "normalize",
    "canonicalize",
    "multiply",
    "conjugate",
    "misorientation_angle",
    "to_rotation_matrix",
    "sample_uniform",
    "to_rf",
    "from_rf",
]

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])

# |w| floor below which a rotation is too close to 180 degrees for the
# Rodrigues-Frank chart; callers must pre-rotate the frame instead.
W_MIN = 1e-7

# sign-tie threshold used by canonicalize(); aligned with the orbit
# deduplication tolerance in the symmetry module.
_SIGN_EPS = 1e-9


def normalize(q):
    """Scale quaternion(s) to unit norm.

    Parameters
    ----------
    q : array_like, shape (..., 4)

    Returns
    -------
    ndarray with each quaternion divided by its Euclidean norm.

    Raises
    ------
    ValueError if any input has near-zero norm.
    """
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(n < 1e-300):
        raise ValueError("cannot normalize zero quaternion")
    return q / n


def canonicalize(q):
    """Return the canonical-sign representative of each quaternion.

    The representative has w > 0; for w == 0 (within a small tie
    threshold) the first nonzero component is made positive.  This makes
    set-equality tests on antipodally reduced data well-defined.
    """
    q = np.asarray(q, dtype=float)
    single = q.ndim == 1
    out = np.atleast_2d(q).copy()
    flip = out[:, 0] < -_SIGN_EPS
    undecided = np.abs(out[:, 0]) <= _SIGN_EPS
    for c in (1, 2, 3):
        flip |= undecided & (out[:, c] < -_SIGN_EPS)
        undecided &= np.abs(out[:, c]) <= _SIGN_EPS
    out[flip] *= -1.0
    return out[0] if single else out


def _mul_raw(p, q):
    """Hamilton product without renormalization (broadcasts)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, px, py, pz = (p[..., i] for i in range(4))
    qw, qx, qy, qz = (q[..., i] for i in range(4))
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )


def multiply(p, q):
    """Hamilton product of unit quaternions, renormalized to unit.

    Identity element is {1, 0, 0, 0}; composition order matches rotation
    matrix composition, U(p o q) = U(p) U(q).
    """
    return normalize(_mul_raw(p, q))


def conjugate(q):
    """Quaternion conjugate; the inverse for unit quaternions."""
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def misorientation_angle(p, q):
    """Rotation angle between two orientations, 2 arccos |<p, q>|.

    Symmetric in its arguments and invariant under sign flips of either
    argument.  The inner product is clamped to [-1, 1] so roundoff just
    outside the interval cannot produce NaN.  Result lies in [0, pi].
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = np.abs(np.sum(p * q, axis=-1))
    return 2.0 * np.arccos(np.clip(d, -1.0, 1.0))


def to_rotation_matrix(q):
    """3x3 rotation matrix of a unit quaternion.

    Every matrix entry is quadratic in the components, so q and -q map
    to the identical matrix.  Determinant is +1 for unit input.
    """
    q = np.asarray(q, dtype=float)
    w, x, y, z = (q[..., i] for i in range(4))
    m = np.empty(q.shape[:-1] + (3, 3))
    m[..., 0, 0] = 1.0 - 2.0 * y * y - 2.0 * z * z
    m[..., 0, 1] = 2.0 * x * y - 2.0 * w * z
    m[..., 0, 2] = 2.0 * x * z + 2.0 * w * y
    m[..., 1, 0] = 2.0 * x * y + 2.0 * w * z
    m[..., 1, 1] = 1.0 - 2.0 * x * x - 2.0 * z * z
    m[..., 1, 2] = 2.0 * y * z - 2.0 * w * x
    m[..., 2, 0] = 2.0 * x * z - 2.0 * w * y
    m[..., 2, 1] = 2.0 * y * z + 2.0 * w * x
    m[..., 2, 2] = 1.0 - 2.0 * x * x - 2.0 * y * y
    return m


def sample_uniform(n, seed=None, rng=None):
    """Draw n quaternions uniformly distributed on the 3-sphere.

    Uses the subgroup-algorithm construction from three uniform variates
    (Shoemake's method).  Deterministic for a fixed seed.

    Parameters
    ----------
    n : int, number of samples (>= 1)
    seed : int or None, seeds a fresh numpy Generator
    rng : numpy Generator, used directly if given (seed is then ignored)
    """
    if n < 1:
        raise ValueError("need n >= 1 samples")
    if rng is None:
        rng = np.random.default_rng(seed)
    u1, u2, u3 = rng.random((3, n))
    a = np.sqrt(1.0 - u1)
    b = np.sqrt(u1)
    t2 = 2.0 * np.pi * u2
    t3 = 2.0 * np.pi * u3
    return np.column_stack(
        [a * np.sin(t2), a * np.cos(t2), b * np.sin(t3), b * np.cos(t3)]
    )


def to_rf(q):
    """Rodrigues-Frank vector of a unit quaternion, (x, y, z)/w.

    The chart is singular at 180 degree rotations (w = 0); inputs with
    |w| <= W_MIN are rejected.  Sign convention w > 0, so the result
    does not depend on the sign of q.
    """
    q = np.asarray(q, dtype=float)
    single = q.ndim == 1
    qq = np.atleast_2d(q).copy()
    neg = qq[:, 0] < 0.0
    qq[neg] *= -1.0
    if np.any(qq[:, 0] <= W_MIN):
        raise ValueError(
            "near-180 degree rotation, rotate frame first (|w| <= %g)" % W_MIN
        )
    v = qq[:, 1:4] / qq[:, 0:1]
    return v[0] if single else v


def from_rf(v):
    """Unit quaternion of a Rodrigues-Frank vector: normalize({1, v})."""
    v = np.asarray(v, dtype=float)
    single = v.ndim == 1
    vv = np.atleast_2d(v)
    q = np.concatenate([np.ones((len(vv), 1)), vv], axis=1)
    q = normalize(q)
    return q[0] if single else q
