"""Closed-form simplex-bound machinery on the 3-sphere.

A covering of S^3 by N caps of radius theta has density
tau = N C3(theta) / (2 pi^2), with C3 the cap volume.  The simplex bound
conjectures that no covering beats the density achieved when the
Delaunay cells are regular spherical tetrahedra; evaluating that density
needs the dihedral angle, the vertex solid angle and the volume of the
regular spherical tetrahedron inscribed in a cap of radius theta.  The
volume comes from a simplification of Murakami's spherical-tetrahedron
formula to the equilateral case, which is driven by the complex
dilogarithm.  Inverting the resulting density relation for a given N
yields the lower-bound radius theta*.

All angles are radians; conversion to degrees happens at the interfaces.
"""

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "SPHERE_VOLUME",
    "cap_volume",
    "edge_length",
    "dihedral_angle",
    "solid_angle",
    "dilog",
    "regular_tet_volume",
    "covering_density",
    "simplex_bound_density",
    "lower_bound_radius",
    "optimality_gap",
    "CoveringReport",
    "make_report",
]

# surface volume of the unit 3-sphere
SPHERE_VOLUME = 2.0 * math.pi**2

_PI2_6 = math.pi**2 / 6.0


def cap_volume(theta):
    """Volume of a hyperspherical cap of radius theta on S^3.

    C3(theta) = pi (2 theta - sin 2 theta); monotone increasing with
    C3(pi) equal to the full sphere volume 2 pi^2.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0.0) or np.any(theta > math.pi):
        raise ValueError("cap radius must lie in [0, pi]")
    out = math.pi * (2.0 * theta - np.sin(2.0 * theta))
    return float(out) if out.ndim == 0 else out


def edge_length(theta):
    """Edge length of the regular spherical tetrahedron with
    circumradius theta: l = arccos((4 cos^2 theta - 1) / 3)."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0.0) or np.any(theta > math.pi / 2.0):
        raise ValueError("circumradius must lie in (0, pi/2]")
    c = np.cos(theta)
    out = np.arccos(np.clip((4.0 * c * c - 1.0) / 3.0, -1.0, 1.0))
    return float(out) if out.ndim == 0 else out


def dihedral_angle(theta):
    """Dihedral angle of the regular spherical tetrahedron:
    psi = arccos((4 cos^2 theta - 1) / (8 cos^2 theta + 1))."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0.0) or np.any(theta >= math.pi / 2.0):
        raise ValueError("circumradius must lie in (0, pi/2)")
    c2 = np.cos(theta) ** 2
    out = np.arccos(np.clip((4.0 * c2 - 1.0) / (8.0 * c2 + 1.0), -1.0, 1.0))
    return float(out) if out.ndim == 0 else out


def solid_angle(theta):
    """Solid angle at a vertex of the regular spherical tetrahedron,
    Omega = 3 psi - pi (the intersection solid angle of a vertex cap)."""
    return 3.0 * dihedral_angle(theta) - math.pi


def _bernoulli_coeffs(count):
    """B_n / (n+1)! for n = 0..count-1 (B_1 = -1/2 convention)."""
    b = [Fraction(1)]
    for n in range(1, count):
        acc = Fraction(0)
        for j in range(n):
            acc += Fraction(math.comb(n + 1, j)) * b[j]
        b.append(-acc / (n + 1))
    return np.array(
        [float(b[n] / Fraction(math.factorial(n + 1))) for n in range(count)]
    )


_BERN = _bernoulli_coeffs(72)


def _dilog_series(z):
    # direct power series, |z| <= 0.5
    total = 0j
    term = complex(z)
    k = 1
    while True:
        add = term / (k * k)
        total += add
        if abs(add) < 1e-18 * max(1.0, abs(total)):
            return total
        term *= z
        k += 1
        if k > 400:
            return total


def _dilog_bernoulli(w):
    # Li2(1 - e^-w) as a Bernoulli series in w; used on the unit-circle
    # annulus where both |z| and |1-z| are close to 1
    total = 0j
    wp = complex(w)
    for n in range(len(_BERN)):
        if n > 1 and n % 2 == 1:
            wp *= w
            continue
        add = _BERN[n] * wp
        total += add
        wp *= w
        if n > 4 and abs(add) < 1e-18 * max(1.0, abs(total)):
            break
    return total


def dilog(z):
    """Principal-branch complex dilogarithm Li2(z).

    Region splitting: direct series inside |z| <= 0.5, inversion for
    |z| >= 1.5, reflection toward 1 - z when that is small, and a
    Bernoulli series in -log(1 - z) on the remaining annulus around the
    unit circle.  Absolute accuracy is ~1e-14.
    """
    z = complex(z)
    if z == 0:
        return 0j
    if z == 1:
        return complex(_PI2_6)
    az = abs(z)
    if az <= 0.5:
        return _dilog_series(z)
    if az >= 1.5:
        lz = cmath.log(-z)
        return -_PI2_6 - 0.5 * lz * lz - dilog(1.0 / z)
    if abs(1.0 - z) <= 0.5:
        return _PI2_6 - cmath.log(z) * cmath.log(1.0 - z) - _dilog_series(1.0 - z)
    return _dilog_bernoulli(-cmath.log(1.0 - z))


def regular_tet_volume(theta):
    """Volume of the regular spherical tetrahedron with circumradius
    theta, from the equal-dihedral-angle reduction of Murakami's
    spherical tetrahedron formula (result taken mod 2 pi^2).

    Valid for theta in (0, pi/2); the formula degenerates at 90 degrees
    where the dihedral angle reaches pi.
    """
    theta = float(theta)
    psi = dihedral_angle(theta)
    e1 = cmath.exp(-1j * psi)
    e2 = e1 * e1
    e3 = e2 * e1
    e4 = e3 * e1
    e6 = e3 * e3
    q = 3.0 * e2 + 4.0 * e3 + e6
    if abs(q) < 1e-13:
        raise ValueError("volume formula degenerate at theta=%g" % theta)
    cpsi = math.cos(psi)
    rad = (cpsi + 1.0) ** 3 * (1.0 - 3.0 * cpsi)
    z0 = (-6.0 * math.sin(psi) ** 2 + 2.0 * math.sqrt(max(rad, 0.0))) / q
    ell = 0.5 * (
        dilog(z0)
        + 3.0 * dilog(z0 * e4)
        - 4.0 * dilog(-z0 * e3)
        - 3.0 * psi * psi
    )
    raw = -ell.real + math.pi * (cmath.phase(-q) + 3.0 * psi) - 1.5 * math.pi**2
    vol = raw % SPHERE_VOLUME
    if not (0.0 < vol < SPHERE_VOLUME):
        raise ValueError(
            "volume branch selection failed at theta=%g (raw=%g)" % (theta, raw)
        )
    return vol


def covering_density(n, theta):
    """Covering density tau = N C3(theta) / (2 pi^2)."""
    if n < 1:
        raise ValueError("need n >= 1")
    return n * cap_volume(theta) / SPHERE_VOLUME


def simplex_bound_density(theta):
    """Density of the conjectured optimal covering whose Delaunay cells
    are regular spherical tetrahedra of circumradius theta:
    tau = 4 C3(theta) (Omega / 4 pi) / Vol(T(theta))."""
    return (
        4.0
        * cap_volume(theta)
        * (solid_angle(theta) / (4.0 * math.pi))
        / regular_tet_volume(theta)
    )


def _bound_n(theta):
    # N(theta) implied by the simplex bound at radius theta
    return SPHERE_VOLUME * simplex_bound_density(theta) / cap_volume(theta)


def lower_bound_radius(n):
    """Conjectured lower bound theta* on the covering radius of any
    N-point covering of S^3, by inverting the simplex-bound density
    relation N = 2 pi^2 tau(theta*) / C3(theta*) with bisection."""
    if n < 5:
        raise ValueError("need n >= 5")
    lo = math.radians(0.001)
    hi = math.radians(89.0)
    flo = _bound_n(lo) - n
    fhi = _bound_n(hi) - n
    if flo <= 0.0 or fhi >= 0.0:
        raise ValueError("bisection bracket failed for n=%d" % n)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = _bound_n(mid) - n
        if fmid > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    theta = 0.5 * (lo + hi)
    if abs(_bound_n(theta) - n) > 1e-6 * n:
        raise ValueError("bisection did not converge for n=%d" % n)
    return theta


def optimality_gap(n, theta):
    """Percent distance of a measured covering radius from the
    conjectured bound: 100 (theta / theta* - 1)."""
    return 100.0 * (theta / lower_bound_radius(n) - 1.0)


@dataclass
class CoveringReport:
    """Quality summary of an N-rotation orientation set (angles in
    degrees; the gap is conjectured, not proven)."""

    n: int
    theta_deg: float
    theta_star_deg: float
    gap_pct: float
    density: float

    @property
    def alpha_max_deg(self):
        return 2.0 * self.theta_deg


def make_report(n, theta):
    """Build a CoveringReport from a measured covering radius (radians).

    n is the number of points in the antipodally closed set (each point
    carries one covering cap); the set represents n/2 distinct rotations
    with maximum misorientation 2 theta.
    """
    theta_star = lower_bound_radius(n)
    return CoveringReport(
        n=n,
        theta_deg=math.degrees(theta),
        theta_star_deg=math.degrees(theta_star),
        gap_pct=100.0 * (theta / theta_star - 1.0),
        density=covering_density(n, theta),
    )
