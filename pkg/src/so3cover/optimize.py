"""Three-stage covering-radius reduction for symmetric point sets on the
3-sphere: Riesz energy minimization (PR+ conjugate gradient on the
product manifold), optimal-Delaunay-triangulation smoothing with
spherical cell volumes, and simplex-wise derivative-free local
refinement in Rodrigues-Frank coordinates.

The optimization variables are the basis points only; the chosen
symmetry group acts by right multiplication, which is an isometry of
R^4, so energies and gradients over the expanded set reduce to sums over
basis-against-expanded pairs and the symmetry stays exact throughout.
"""

import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize as scipy_minimize

from . import bounds, quat, symmetry, triangulation

__all__ = [
    "PipelineConfig",
    "OneRing",
    "riesz_energy",
    "minimize_riesz",
    "odt_smooth",
    "local_refine",
    "generate",
    "GenerateResult",
]

_BIG = 1e30


@dataclass
class PipelineConfig:
    """Tunable knobs of the generation pipeline.

    Defaults target desk-scale runs; the published large sets used far
    more restarts.  s is the Riesz exponent (2 favours few local minima
    while keeping minimizers well-distributed); cg_tolerance is relative
    to the initial gradient norm.
    """

    s: float = 2.0
    cg_tolerance: float = 1e-8
    cg_max_iters: int = 2000
    odt_iterations: int = 50
    refine_passes: int = 3
    restarts: int = 10
    seed: int = 0
    nm_max_evals: int = 200
    refine_max_neighborhoods: int | None = None


@dataclass
class OneRing:
    """Star of a point: the simplices incident to it and their total
    spherical volume."""

    center: int
    simplices: np.ndarray
    volume: float


@dataclass
class StageRecord:
    restart: int
    stage: str
    theta: float


@dataclass
class GenerateResult:
    oset: symmetry.OrientationSet
    report: bounds.CoveringReport
    history: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


def expand_multiset(basis, group):
    """Expanded point multiset {+-(b o g)} with fixed layout.

    Row (i*m + k)*2 + s holds sign (-1)^s times basis[i] o g[k]; no
    deduplication is done, so the orbit bookkeeping stays index-based.
    """
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    elems = np.asarray(group.elements)
    prods = quat._mul_raw(basis[:, None, :], elems[None, :, :])
    both = np.stack([prods, -prods], axis=2)
    return both.reshape(-1, 4)


def _identity_index(group):
    d = np.abs(np.asarray(group.elements) @ quat.IDENTITY)
    k = int(np.argmax(d))
    if d[k] < 1.0 - 1e-9:
        raise ValueError("group has no identity element")
    return k


def _riesz(basis, group, s, want_grad):
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    nb = len(basis)
    m = group.order
    pts = expand_multiset(basis, group)
    if 2 * nb * m < 2:
        raise ValueError("need at least two expanded points")
    k_id = _identity_index(group)
    dots = basis @ pts.T
    t = 2.0 - 2.0 * dots
    self_cols = (np.arange(nb) * m + k_id) * 2
    t[np.arange(nb), self_cols] = np.inf
    if t.min() < 1e-24:
        raise ValueError("coincident points: Riesz energy is infinite")
    if s > 0:
        f = t ** (-0.5 * s)
        energy = 2.0 * m * float(f.sum())
        if not want_grad:
            return energy, None
        fp = s * t ** (-0.5 * s - 1.0)
    else:
        energy = 2.0 * m * float(-0.5 * np.log(t[np.isfinite(t)]).sum())
        if not want_grad:
            return energy, None
        fp = 1.0 / t
    fp[np.arange(nb), self_cols] = 0.0
    grad = 4.0 * m * (fp @ pts)
    return energy, grad


def riesz_energy(basis, group, s=2.0):
    """Riesz s-energy of the expanded multiset and its gradient with
    respect to the basis coordinates (sum over ordered pairs i != j;
    logarithmic energy for s = 0).

    The gradient is chain-ruled through the orbit expansion and
    projected onto the tangent space of the sphere at each basis point.
    """
    if s < 0:
        raise ValueError("Riesz exponent must be >= 0")
    energy, grad = _riesz(basis, group, s, want_grad=True)
    b = np.atleast_2d(np.asarray(basis, dtype=float))
    bhat = b / np.linalg.norm(b, axis=1, keepdims=True)
    grad_t = grad - np.sum(grad * bhat, axis=1, keepdims=True) * bhat
    return energy, grad_t


@dataclass
class RieszInfo:
    iterations: int
    energy: float
    grad_norm: float
    converged: bool
    line_search_failed: bool = False


def minimize_riesz(basis, group, config=None):
    """Local Riesz-energy minimization by PR+ nonlinear conjugate
    gradient with Armijo backtracking; the retraction renormalizes each
    basis point back onto the sphere after every trial step.

    Energy is non-increasing over accepted iterations.  Returns the best
    basis found plus convergence info; a line-search failure returns the
    current iterate with a warning flag instead of raising.
    """
    cfg = config or PipelineConfig()
    x = quat.normalize(np.atleast_2d(np.asarray(basis, dtype=float)))
    energy, g = riesz_energy(x, group, cfg.s)
    g0n = np.linalg.norm(g)
    d = -g
    step = 1.0 / (1.0 + g0n)
    failed = False
    it = 0
    for it in range(cfg.cg_max_iters):
        gn = np.linalg.norm(g)
        if gn <= cfg.cg_tolerance * max(1.0, g0n):
            return x, RieszInfo(it, energy, gn, True, failed)
        slope = float(np.sum(g * d))
        if slope >= 0.0:
            d = -g
            slope = -gn * gn
        t = step
        accepted = False
        for _ in range(60):
            xn = quat.normalize(x + t * d)
            en, _ = _riesz(xn, group, cfg.s, want_grad=False)
            if en <= energy + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            failed = True
            warnings.warn("Riesz line search failed; returning best iterate")
            break
        _, gn_new = riesz_energy(xn, group, cfg.s)
        # transport previous quantities to the new tangent spaces
        proj = lambda v: v - np.sum(v * xn, axis=1, keepdims=True) * xn
        g_prev = proj(g)
        beta = float(np.sum(gn_new * (gn_new - g_prev))) / max(
            float(np.sum(g * g)), 1e-300
        )
        beta = max(0.0, beta)
        d = -gn_new + beta * proj(d)
        x, g = xn, gn_new
        energy = en
        step = 2.0 * t
    return x, RieszInfo(it + 1, energy, float(np.linalg.norm(g)), False, failed)


def one_ring(tri, center):
    """OneRing of an expanded point: incident simplices and the total
    spherical volume they enclose."""
    mask = np.any(tri.simplices == center, axis=1)
    idx = np.nonzero(mask)[0]
    vols = triangulation.spherical_simplex_volumes(
        tri.points, tri.simplices[idx]
    )
    return OneRing(center, idx, float(vols.sum()))


@dataclass
class OdtInfo:
    iterations: int
    thetas: list
    warning: str | None = None


def _odt_targets(x, group, tri, pts):
    """New basis positions from one smoothing step: every expanded point
    moves to the volume-weighted average of its incident circumcentres
    (renormalized), and each basis point takes the orbit-average of its
    copies' targets pulled back through the group action."""
    nb, m = len(x), group.order
    conj = quat.conjugate(np.asarray(group.elements))
    vols = triangulation.spherical_simplex_volumes(pts, tri.simplices)
    flat = tri.simplices.ravel()
    w = np.repeat(vols, 4)
    npts = len(pts)
    den = np.bincount(flat, weights=w, minlength=npts)
    num = np.empty((npts, 4))
    for c in range(4):
        num[:, c] = np.bincount(
            flat, weights=w * np.repeat(tri.circumcentres[:, c], 4),
            minlength=npts,
        )
    ok = den > 0
    targets = pts.copy()
    targets[ok] = num[ok] / den[ok, None]
    targets = quat.normalize(targets)
    t4 = targets.reshape(nb, m, 2, 4).copy()
    t4[:, :, 1, :] *= -1.0
    back = quat._mul_raw(t4, conj[None, :, None, :])
    pulled = back.mean(axis=(1, 2))
    norms = np.linalg.norm(pulled, axis=1)
    if np.any(norms < 1e-6):
        return None
    return pulled / norms[:, None]


def odt_smooth(basis, group, iterations):
    """Optimal-Delaunay smoothing of the basis under the group action.

    Alternates triangulation of the expanded set with a simultaneous
    (Jacobi-style) move of every point toward its 1-ring optimal
    position.  The full step diverges when simplices subtend a sizable
    fraction of the sphere (the optimal-position formula assumes small
    local curvature), so a step that would increase the covering radius
    is retried at half relaxation a few times and smoothing stops when
    no step helps.  Stops early once the largest basis displacement
    falls below 1e-10; returns the iterate with the smallest measured
    covering radius.
    """
    x = quat.normalize(np.atleast_2d(np.asarray(basis, dtype=float)))
    thetas = []
    warn = None

    def measure(b):
        pts = expand_multiset(b, group)
        tri = triangulation.triangulate(pts)
        return pts, tri, tri.covering_radius

    try:
        pts, tri, theta = measure(x)
    except (triangulation.DegenerateGeometryError, ValueError) as exc:
        warn = "triangulation failed before smoothing: %s" % exc
        warnings.warn(warn)
        return x, OdtInfo(0, thetas, warn)
    thetas.append(theta)
    best = (theta, x.copy())
    omega = 1.0
    for _ in range(iterations):
        x_full = _odt_targets(x, group, tri, pts)
        if x_full is None:
            warn = "degenerate ODT average; stopping"
            warnings.warn(warn)
            break
        x_new = quat.normalize((1.0 - omega) * x + omega * x_full)
        try:
            pts, tri, theta_new = measure(x_new)
        except (triangulation.DegenerateGeometryError, ValueError) as exc:
            warn = "triangulation failed mid-smoothing: %s" % exc
            warnings.warn(warn)
            return best[1], OdtInfo(len(thetas), thetas, warn)
        # the simultaneous move can oscillate when simplices subtend a
        # sizable fraction of the sphere; damping reins that in while
        # letting the relaxation recover to full steps where they work
        if theta_new > theta + 1e-15:
            omega = max(0.05, 0.5 * omega)
        else:
            omega = min(1.0, 1.26 * omega)
        thetas.append(theta_new)
        if theta_new < best[0]:
            best = (theta_new, x_new.copy())
        disp = np.arccos(
            np.clip(np.abs(np.sum(x_new * x, axis=1)), -1.0, 1.0)
        ).max()
        x = x_new
        theta = theta_new
        if disp < 1e-10:
            break
    return best[1], OdtInfo(len(thetas), thetas, warn)


def _vertex_incidence(simplices, npts):
    flat = simplices.ravel()
    order = np.argsort(flat, kind="stable")
    starts = np.searchsorted(flat[order], np.arange(npts + 1))
    return order // 4, starts


def _incident(inc, starts, v):
    return inc[starts[v]:starts[v + 1]]


def _simplex_radii(verts):
    """Circumradii of simplices given as (m, 4, 4) vertex coordinates."""
    edges = verts[:, 1:, :] - verts[:, :1, :]
    x = triangulation._cross4_batch(edges)
    norms = np.linalg.norm(x, axis=1)
    norms = np.where(norms < 1e-300, 1.0, norms)
    x /= norms[:, None]
    d0 = np.abs(np.einsum("ij,ij->i", x, verts[:, 0, :]))
    return np.arccos(np.clip(d0, -1.0, 1.0))


class _Neighborhood:
    """Local refinement problem around one Delaunay simplex.

    Variables are the Rodrigues-Frank coordinates of the active basis
    points after the neighbourhood centroid has been rotated to the
    identity (left multiplication commutes with the right group action,
    so the rotation is exact on the whole orbit).
    """

    def __init__(self, pts, verts, group, dmax):
        self.group = group
        self.elems = np.asarray(group.elements)
        m = group.order
        slots = verts // (2 * m)
        self.active_slots, first = np.unique(slots, return_index=True)
        reps = pts[verts[np.sort(first)]]
        self.slot_order = slots[np.sort(first)]
        centroid = reps.sum(axis=0)
        nc = np.linalg.norm(centroid)
        if nc < 0.5:
            centroid = reps[0]
            nc = 1.0
        self.c = centroid / nc
        self.cinv = quat.conjugate(self.c)
        self.reps0 = reps
        self.dmax = dmax
        self.x0 = quat.to_rf(quat._mul_raw(self.cinv, reps)).ravel()

    def decode(self, x):
        rf = x.reshape(-1, 3)
        a = quat._mul_raw(self.c, quat.from_rf(rf))
        moved = np.arccos(
            np.clip(np.abs(np.sum(a * self.reps0, axis=1)), -1.0, 1.0)
        )
        if np.any(moved > self.dmax):
            return None
        return a

    def member_positions(self, a, mem_slot_pos, mem_k, mem_sgn):
        pos = quat._mul_raw(a[mem_slot_pos], self.elems[mem_k])
        return pos * mem_sgn[:, None]


def _refine_neighborhood(state, verts, cfg):
    """Optimize the basis points owning one simplex's vertices.

    Nelder-Mead minimizes the maximum circumradius of the pass-level
    simplices meeting the active orbits, recomputed at the candidate
    coordinates (a cheap surrogate for the local re-triangulation).  A
    proposed move is then verified against a fresh triangulation of the
    full set and accepted only when the simplices at the moved orbits
    improved and the global covering radius did not grow, which makes
    the refinement stage monotone by construction.
    """
    pts, group = state["pts"], state["group"]
    m = group.order
    inc, starts = state["inc"], state["starts"]
    simplices = state["simplices"]

    radius_here = float(state["radii"][_incident(inc, starts, verts[0])].max())
    hood = _Neighborhood(pts, verts, group, dmax=0.75 * max(radius_here, 1e-3))
    block_rows = np.concatenate(
        [s * 2 * m + np.arange(2 * m) for s in hood.slot_order]
    )
    # surrogate objective: the pass-level simplices at the representative
    # vertices (every simplex class meeting the active orbits has a
    # group-translate there, so the maximum matches the full scope)
    nb_simp = np.unique(
        np.concatenate([_incident(inc, starts, v) for v in verts])
    )
    frozen = simplices[nb_simp]
    if len(frozen) == 0:
        return False, 0.0
    buf = pts.copy()

    def frozen_objective(x):
        a = hood.decode(x)
        if a is None:
            return _BIG
        buf[block_rows] = expand_multiset(a, group)
        return float(_simplex_radii(buf[frozen]).max())

    f0 = frozen_objective(hood.x0)
    n = len(hood.x0)
    scale = 0.1 * np.tan(0.5 * radius_here)
    init = np.tile(hood.x0, (n + 1, 1))
    init[1:] += np.eye(n) * max(scale, 1e-6)
    res = scipy_minimize(
        frozen_objective,
        hood.x0,
        method="Nelder-Mead",
        options={
            "initial_simplex": init,
            "maxfev": cfg.nm_max_evals,
            "xatol": 1e-14,
            "fatol": 1e-16,
        },
    )
    if not np.isfinite(res.fun) or res.fun >= f0 * (1.0 - 1e-12):
        return False, 0.0
    a_best = hood.decode(res.x)
    if a_best is None:
        return False, 0.0

    coords_full = pts.copy()
    coords_full[block_rows] = expand_multiset(a_best, group)
    try:
        tri_full = triangulation.triangulate(coords_full)
    except (triangulation.DegenerateGeometryError, ValueError):
        return False, 0.0
    touched = np.isin(tri_full.simplices, block_rows).any(axis=1)
    if not np.any(touched):
        return False, 0.0
    f_local = float(tri_full.circumradii[touched].max())
    theta_after = tri_full.covering_radius
    if f_local >= f0 * (1.0 - 1e-12):
        return False, 0.0
    if theta_after > state["theta_global"] + 1e-15:
        return False, 0.0

    basis = state["basis"]
    for j, slot in enumerate(hood.slot_order):
        basis[slot] = a_best[j]
    pts[block_rows] = coords_full[block_rows]
    state["theta_global"] = theta_after
    return True, f0 - f_local


def _class_key(verts, m, prod_idx, prod_sign, inv_idx, inv_sign):
    slots = verts // (2 * m)
    ks = (verts % (2 * m)) // 2
    sgns = 1 - 2 * (verts % 2).astype(np.int8)
    best = None
    for j in range(4):
        kinv = inv_idx[ks[j]]
        new_k = prod_idx[ks, kinv]
        new_s = sgns * prod_sign[ks, kinv] * inv_sign[ks[j]] * sgns[j]
        key = tuple(sorted(zip(slots.tolist(), new_k.tolist(), new_s.tolist())))
        if best is None or key < best:
            best = key
    return best


@dataclass
class RefineInfo:
    passes: int
    visited: int
    accepted: int
    thetas: list


def local_refine(basis, group, passes, config=None):
    """Simplex-wise local refinement of the covering radius.

    Per pass: triangulate the expanded set, then visit Delaunay
    simplices in order of decreasing circumradius (one representative
    per symmetry class).  For each, the basis points owning the simplex
    vertices become the active set; their Rodrigues-Frank coordinates
    (neighbourhood rotated to the identity) are optimized by Nelder-Mead
    against the maximum circumradius of the simplices meeting the active
    set, evaluated on a local patch re-triangulation.  Only strictly
    improving moves are accepted, and the group action is reapplied
    after every update.
    """
    cfg = config or PipelineConfig()
    x = quat.normalize(np.atleast_2d(np.asarray(basis, dtype=float)))
    m = group.order
    tables = symmetry.multiplication_table(group)
    thetas = []
    visited = accepted = 0
    npass = 0
    best = (np.inf, x.copy())
    for _ in range(passes):
        pts = expand_multiset(x, group)
        try:
            tri = triangulation.triangulate(pts)
        except (triangulation.DegenerateGeometryError, ValueError) as exc:
            warnings.warn("refinement triangulation failed: %s" % exc)
            break
        thetas.append(tri.covering_radius)
        if tri.covering_radius < best[0]:
            best = (tri.covering_radius, x.copy())
        inc, starts = _vertex_incidence(tri.simplices, len(pts))
        state = {
            "pts": pts, "basis": x, "group": group,
            "simplices": tri.simplices, "radii": tri.circumradii,
            "inc": inc, "starts": starts,
            "theta_global": tri.covering_radius,
        }
        order = np.argsort(-tri.circumradii)
        seen = set()
        pass_visited = 0
        pass_accepted = False
        for t_idx in order:
            if (
                cfg.refine_max_neighborhoods is not None
                and pass_visited >= cfg.refine_max_neighborhoods
            ):
                break
            key = _class_key(tri.simplices[t_idx], m, *tables)
            if key in seen:
                continue
            seen.add(key)
            pass_visited += 1
            visited += 1
            ok, _ = _refine_neighborhood(state, tri.simplices[t_idx], cfg)
            if ok:
                accepted += 1
                pass_accepted = True
        npass += 1
        if not pass_accepted:
            break
    try:
        theta = triangulation.covering_radius(expand_multiset(x, group))
        thetas.append(theta)
        if theta < best[0]:
            best = (theta, x.copy())
    except (triangulation.DegenerateGeometryError, ValueError):
        pass
    if np.isfinite(best[0]):
        x = best[1]
    return x, RefineInfo(npass, visited, accepted, thetas)


def _measure(basis, group):
    return triangulation.covering_radius(expand_multiset(basis, group))


def _run_restart(args):
    (group_name, n_basis, cfg, restart, verbose) = args
    group = symmetry.laue_group(group_name)
    rng = np.random.default_rng([cfg.seed, restart])
    basis = quat.sample_uniform(n_basis, rng=rng)
    history = []
    warns = []

    def record(stage, theta):
        history.append(StageRecord(restart, stage, theta))
        if verbose:
            print(
                "stage=%s restart=%d theta_deg=%.6f"
                % (stage, restart, np.degrees(theta)),
                file=sys.stderr,
                flush=True,
            )

    record("random", _measure(basis, group))
    basis, rinfo = minimize_riesz(basis, group, cfg)
    if rinfo.line_search_failed:
        warns.append("restart %d: Riesz line search failed" % restart)
    record("riesz", _measure(basis, group))
    basis, oinfo = odt_smooth(basis, group, cfg.odt_iterations)
    if oinfo.warning:
        warns.append("restart %d: %s" % (restart, oinfo.warning))
    record("odt", _measure(basis, group))
    basis, _finfo = local_refine(basis, group, cfg.refine_passes, cfg)
    theta = _measure(basis, group)
    record("refine", theta)
    return theta, basis, history, warns


def generate(n, group, config=None, threads=1, verbose=True):
    """Generate an N-point orientation set (N counts the points of the
    antipodally closed set) with the given symmetry, taking the best of
    `restarts` independent pipeline runs.  Deterministic for a fixed
    seed; restarts may execute in parallel worker processes.
    """
    cfg = config or PipelineConfig()
    if isinstance(group, str):
        group = symmetry.laue_group(group)
    per_basis = 2 * group.order
    if n % per_basis != 0 or n < per_basis:
        lower = max(per_basis, (n // per_basis) * per_basis)
        upper = lower + per_basis
        suggestion = lower if 0 <= n - lower < upper - n else upper
        raise ValueError(
            "n=%d is not achievable with group %s (point counts must be "
            "multiples of %d); nearest valid n: %d"
            % (n, group.name, per_basis, suggestion)
        )
    if n < 6:
        raise ValueError("need at least 6 expanded points (n >= 6)")
    n_basis = n // per_basis
    jobs = [
        (group.name, n_basis, cfg, r, verbose) for r in range(cfg.restarts)
    ]
    if threads and threads > 1 and cfg.restarts > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_restart, jobs))
    else:
        results = [_run_restart(j) for j in jobs]
    best_idx = min(range(len(results)), key=lambda i: (results[i][0], i))
    theta_best, basis_best, _, _ = results[best_idx]
    history = [rec for r in results for rec in r[2]]
    warns = [w for r in results for w in r[3]]
    oset = symmetry.expand_orbit(basis_best, group)
    oset.theta = triangulation.covering_radius(oset.points)
    report = bounds.make_report(oset.n_points, oset.theta)
    return GenerateResult(oset=oset, report=report, history=history,
                          warnings=warns)
