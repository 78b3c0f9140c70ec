"""Empirical error analysis of orientation sets.

Random test orientations are matched to their nearest dictionary
orientation through an exact spatial index over the expanded
(antipodally closed) point set; since antipodes are present in the
index, quaternion sign needs no special handling and Euclidean 4D
distance gives the same nearest neighbour as the misorientation metric.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import quat, triangulation

__all__ = [
    "ErrorHistogram",
    "NearestOrientationIndex",
    "build_nn_index",
    "error_histogram",
    "random_baseline",
    "write_histogram_csv",
]


class NearestOrientationIndex:
    """Exact nearest-orientation queries against an expanded point set."""

    def __init__(self, points):
        points = np.asarray(points, dtype=float)
        if len(points) == 0:
            raise ValueError("cannot index an empty point set")
        self.points = points
        self.tree = cKDTree(points)

    def query(self, quats, workers=1):
        """Nearest dictionary point for each query quaternion.

        Returns (indices, misorientation angles in radians).  For unit
        vectors the smallest chord |q - p| maximizes <q, p>, so the
        chord-nearest point over the antipodally closed set is also the
        misorientation-nearest orientation.
        """
        quats = np.atleast_2d(np.asarray(quats, dtype=float))
        _, idx = self.tree.query(quats, workers=workers)
        dots = np.abs(np.sum(quats * self.points[idx], axis=1))
        ang = 2.0 * np.arccos(np.clip(dots, -1.0, 1.0))
        return idx, ang


def build_nn_index(oset):
    """Spatial index over an orientation set's expanded points."""
    points = getattr(oset, "points", oset)
    return NearestOrientationIndex(points)


@dataclass
class ErrorHistogram:
    """Misorientation-error distribution of random orientations against
    a dictionary.  Bins cover [0, 2 theta]; the covering radius bounds
    the maximum misorientation by 2 theta."""

    bin_edges_deg: np.ndarray
    counts: np.ndarray
    samples: int
    max_deg: float
    mean_deg: float


def error_histogram(oset, samples, bins=100, seed=0, workers=1):
    """Sample random orientations and histogram their misorientation to
    the nearest dictionary orientation.  Deterministic for a fixed seed.
    """
    if samples < 1:
        raise ValueError("need samples >= 1")
    points = getattr(oset, "points", oset)
    theta = getattr(oset, "theta", None)
    if theta is None:
        theta = triangulation.covering_radius(points)
    index = NearestOrientationIndex(points)
    alpha_max = math.degrees(2.0 * theta)
    edges = np.linspace(0.0, alpha_max, bins + 1)
    counts = np.zeros(bins, dtype=np.int64)
    rng = np.random.default_rng(seed)
    total = 0
    max_err = 0.0
    sum_err = 0.0
    chunk = 200_000
    while total < samples:
        n = min(chunk, samples - total)
        q = quat.sample_uniform(n, rng=rng)
        _, ang = index.query(q, workers=workers)
        deg = np.degrees(ang)
        counts += np.histogram(deg, bins=edges)[0]
        max_err = max(max_err, float(deg.max()))
        sum_err += float(deg.sum())
        total += n
    return ErrorHistogram(
        bin_edges_deg=edges,
        counts=counts,
        samples=total,
        max_deg=max_err,
        mean_deg=sum_err / total,
    )


def random_baseline(n, trials, seed=0):
    """Mean covering radius (radians) of `trials` uniform-random
    antipodally closed sets of n points (n/2 sampled rotations)."""
    if n < 6 or n % 2:
        raise ValueError("need an even n >= 6")
    if trials < 1:
        raise ValueError("need trials >= 1")
    rng = np.random.default_rng(seed)
    thetas = np.empty(trials)
    for t in range(trials):
        q = quat.sample_uniform(n // 2, rng=rng)
        pts = np.concatenate([q, -q], axis=0)
        thetas[t] = triangulation.covering_radius(pts)
    return float(thetas.mean()), thetas


def write_histogram_csv(hist, path):
    """CSV histogram: bin left edges (degrees) and counts, then a
    summary line."""
    with open(path, "w") as fh:
        fh.write("# so3cover-histogram v1\n")
        fh.write("bin_left_deg,count\n")
        for left, c in zip(hist.bin_edges_deg[:-1], hist.counts):
            fh.write("%.10g,%d\n" % (left, c))
        fh.write(
            "max_deg=%.10g mean_deg=%.10g samples=%d\n"
            % (hist.max_deg, hist.mean_deg, hist.samples)
        )
