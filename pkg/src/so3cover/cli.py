"""Command-line front end: generation, measurement, bounds, group
verification, error histograms and the uniform-random baseline.

Orientation sets travel as plain-text .qset files:

    # so3cover-qset v1
    group=2I
    n=1920
    kind=basis
    theta_deg=9.33  (optional)
    <one quaternion per line: w x y z, 17 significant digits, w >= 0>

kind=basis stores n / (2 |G|) basis rows (compact; expansion is cheap
and deterministic); kind=expanded stores n/2 canonical-sign rows, one
per antipodal pair.  Angles are degrees everywhere at this interface.
"""

import argparse
import math
import os
import sys

import numpy as np

from . import bounds, evaluate, optimize, quat, symmetry, triangulation

FORMAT_HEADER = "# so3cover-qset v1"

EXIT_USAGE = 2
EXIT_PIPELINE = 3


class QsetError(ValueError):
    pass


def write_qset(path, oset, expanded=False):
    """Write an orientation set; basis-only by default."""
    rows = (
        quat.canonicalize(oset.points[: len(oset.points) // 2])
        if expanded
        else quat.canonicalize(oset.basis)
    )
    with open(path, "w") as fh:
        fh.write(FORMAT_HEADER + "\n")
        fh.write("group=%s\n" % oset.group.name)
        fh.write("n=%d\n" % oset.n_points)
        fh.write("kind=%s\n" % ("expanded" if expanded else "basis"))
        if oset.theta is not None:
            fh.write("theta_deg=%.17g\n" % math.degrees(oset.theta))
        for row in rows:
            fh.write("%.17g %.17g %.17g %.17g\n" % tuple(row))


def read_qset(path):
    """Load an orientation set file, validating structure and norms."""
    header = {}
    rows = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != FORMAT_HEADER:
        raise QsetError("line 1: missing header %r" % FORMAT_HEADER)
    for ln, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" in line and not rows:
            key, _, value = line.partition("=")
            header[key.strip()] = value.strip()
            continue
        parts = line.split()
        if len(parts) != 4:
            raise QsetError("line %d: expected 4 fields, got %d" % (ln, len(parts)))
        try:
            q = np.array([float(p) for p in parts])
        except ValueError:
            raise QsetError("line %d: non-numeric field" % ln) from None
        if abs(np.linalg.norm(q) - 1.0) > 1e-12:
            raise QsetError("line %d: row is not unit norm" % ln)
        rows.append(q)
    for key in ("group", "n", "kind"):
        if key not in header:
            raise QsetError("missing header field %r" % key)
    group = symmetry.laue_group(header["group"])
    n = int(header["n"])
    kind = header["kind"]
    rows = np.array(rows)
    if kind == "basis":
        expected = n // (2 * group.order)
        if n % (2 * group.order) or len(rows) != expected:
            raise QsetError(
                "basis row count %d inconsistent with n=%d and group %s"
                % (len(rows), n, group.name)
            )
        oset = symmetry.expand_orbit(rows, group)
    elif kind == "expanded":
        if len(rows) != n // 2 or n % 2:
            raise QsetError(
                "expanded row count %d inconsistent with n=%d" % (len(rows), n)
            )
        points = np.concatenate([rows, -rows], axis=0)
        oset = symmetry.OrientationSet(
            basis=rows, group=group, points=points, n_rotations=len(rows)
        )
    else:
        raise QsetError("unknown kind %r" % kind)
    if oset.n_points != n:
        raise QsetError(
            "expanded point count %d does not match n=%d (degenerate basis?)"
            % (oset.n_points, n)
        )
    if "theta_deg" in header:
        oset.theta = math.radians(float(header["theta_deg"]))
    return oset


def _print_report(report):
    print("n=%d" % report.n)
    print("theta_deg=%.9f" % report.theta_deg)
    print("alpha_max_deg=%.9f" % report.alpha_max_deg)
    print("theta_star_deg=%.4f" % report.theta_star_deg)
    print("gap_pct=%.4f" % report.gap_pct)
    print("density=%.6f" % report.density)


def _threads(args):
    if args.threads is not None:
        value = args.threads
    else:
        value = int(os.environ.get("SO3COVER_THREADS", "0"))
    if value == 0:
        value = os.cpu_count() or 1
    return value


def cmd_generate(args):
    cfg = optimize.PipelineConfig(restarts=args.restarts, seed=args.seed)
    result = optimize.generate(
        args.n, args.group, cfg, threads=_threads(args), verbose=True
    )
    if args.out:
        write_qset(args.out, result.oset, expanded=args.expanded)
    for w in result.warnings:
        print("warning: %s" % w, file=sys.stderr)
    _print_report(result.report)
    return 0


def cmd_measure(args):
    oset = read_qset(args.infile)
    oset.theta = triangulation.covering_radius(oset.points)
    _print_report(bounds.make_report(oset.n_points, oset.theta))
    return 0


def cmd_bound(args):
    theta_star = bounds.lower_bound_radius(args.n)
    print("theta_star_deg=%.4f" % math.degrees(theta_star))
    print("density=%.6f" % bounds.simplex_bound_density(theta_star))
    return 0


def cmd_verify(args):
    names = [args.group] if args.group else list(symmetry.GROUP_NAMES)
    failed = False
    for name in names:
        report = symmetry.verify_group(symmetry.laue_group(name))
        status = "pass" if report.ok else "FAIL"
        print("group=%s order=%d %s" % (name, report.order, status))
        for issue in report.issues:
            print("  %s" % issue)
        failed |= not report.ok
    return 1 if failed else 0


def cmd_histogram(args):
    oset = read_qset(args.infile)
    hist = evaluate.error_histogram(
        oset, args.samples, bins=args.bins, seed=args.seed,
        workers=_threads(args),
    )
    evaluate.write_histogram_csv(hist, args.out)
    print("max_deg=%.6f" % hist.max_deg)
    print("mean_deg=%.6f" % hist.mean_deg)
    print("samples=%d" % hist.samples)
    return 0


def cmd_baseline(args):
    mean_theta, _ = evaluate.random_baseline(args.n, args.trials, seed=args.seed)
    print("mean_theta_deg=%.6f" % math.degrees(mean_theta))
    print("trials=%d" % args.trials)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="so3cover",
        description="Covering-radius optimized orientation sets on SO(3)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="optimize a new orientation set")
    p.add_argument("--n", type=int, required=True,
                   help="points in the antipodally closed set")
    p.add_argument("--group", required=True, choices=symmetry.GROUP_NAMES)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output .qset path")
    p.add_argument("--expanded", action="store_true",
                   help="store the full expansion instead of the basis")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("measure", help="covering radius of a .qset file")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("bound", help="conjectured lower-bound radius")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("verify", help="structural checks on group tables")
    p.add_argument("--group", choices=symmetry.GROUP_NAMES)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("histogram", help="misorientation error histogram")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_histogram)

    p = sub.add_parser("baseline", help="mean random covering radius")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_baseline)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    try:
        return args.func(args)
    except triangulation.DegenerateGeometryError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_PIPELINE
    except (QsetError, FileNotFoundError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pipeline failures
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
