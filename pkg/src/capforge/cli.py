"""
capforge command line.

Every command writes JSON (sorted keys, so identical inputs give identical
bytes) and, where there is something to draw, an SVG with a JSON twin holding
all plotted coordinates.

Exit codes: 0 success, 2 usage, 3 invalid input, 4 numerical convergence
failure, 5 the candidate cap fails to close or has an angle obstruction.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np
from scipy import stats

from . import fixtures
from .cap import cap_boundary, naive_cap
from .conformal.exterior import (
    ExteriorMap,
    SeriesConvergenceWarning,
    bottcher_series,
    development_derivative,
    functional_residual,
    harmonic_cap_development,
)
from .conformal.harmonic import HarmonicSampler, harmonic_measure_mc
from .conformal.julia import julia_boundary
from .conformal.polynomial import green_polynomial, quadratic
from .conformal.square import square_harmonic_cdf
from .curvature_lab import curvature_report
from .errors import CapforgeError, ConvergenceError
from .geometry import Polyline, is_simple
from .io import SvgCanvas, dump_json, load_measure, load_shape, points_to_list, shape_to_dict
from .measure import BoundaryMeasure, turning_measure, uniform_measure, validate

log = logging.getLogger("capforge")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVALID = 3
EXIT_CONVERGENCE = 4
EXIT_OBSTRUCTION = 5

FIXTURES = {
    "square": lambda: fixtures.square(),
    "unit-square": fixtures.unit_square,
    "triangle": fixtures.equilateral_triangle,
    "l-hexagon": fixtures.l_hexagon,
    "notched-square": fixtures.notched_square,
    "disk": lambda: fixtures.circle_polygon(1024),
    "ellipse": lambda: fixtures.ellipse_polygon(1024),
    "interval": fixtures.interval_slit,
    "naive-spiral": lambda: fixtures.naive_spiral_fixture().shape,
    "harmonic-spiral": lambda: fixtures.harmonic_spiral_fixture().shape,
}


def resolve_seed(seed):
    if seed is not None:
        return int(seed)
    return int(os.environ.get("CAPFORGE_SEED", "0"))


def read_shape(source: str):
    """A shape JSON path or ``fixture:NAME``; returns ``(polyline, fixture name or None)``."""
    if source.startswith("fixture:"):
        name = source.split(":", 1)[1]
        if name not in FIXTURES:
            raise ValueError(f"unknown fixture {name!r}; choose from {', '.join(sorted(FIXTURES))}")
        return FIXTURES[name](), name
    return load_shape(source), None


def parse_complex(text: str) -> complex:
    parts = [float(p) for p in text.replace(",", " ").split()]
    if len(parts) == 1:
        return complex(parts[0])
    if len(parts) == 2:
        return complex(parts[0], parts[1])
    raise ValueError(f"cannot read a complex number from {text!r}")


def _draw_development(shape: Polyline, cap, path: Path, title: str):
    canvas = SvgCanvas()
    canvas.polyline(shape.points, closed=shape.closed, stroke="#1f77b4", width=1.0, label=f"{title}: shape")
    canvas.polyline(cap.boundary.points, closed=cap.boundary.closed, stroke="#ff7f0e", width=1.0,
                    label=f"{title}: cap")
    canvas.marker(shape.points[0], label="shared basepoint")
    return canvas.save(path)


def _cap_summary(cap, L):
    out = cap.to_dict()
    out["relative_closure_defect"] = cap.closure_defect / L
    out["length"] = L
    return out


def cmd_check(args):
    shape, _ = read_shape(args.shape)
    verdict = is_simple(shape)
    report = {"vertices": int(shape.points.size), "length": shape.length, "signed_area": shape.signed_area,
              "simple": bool(verdict), "seed": args.seed}
    status = EXIT_OK
    if not verdict:
        report["first_crossing"] = {"edges": list(verdict.pair),
                                    "point": [verdict.point.real, verdict.point.imag]}
        status = EXIT_INVALID
    if args.measure:
        m = load_measure(args.measure)
        mv = validate(m, shape.length)
        report["measure"] = {"ok": mv.ok, "violations": [list(v) for v in mv.violations],
                             "warnings": [list(w) for w in mv.warnings]}
        if not mv.ok:
            status = EXIT_INVALID
    dump_json(report, args.out_dir / "check.json")
    print(("ok" if status == EXIT_OK else "invalid") + f": {args.shape}")
    return status


def _auto_measure(shape: Polyline, kind: str) -> BoundaryMeasure:
    if kind in ("turning", "triangle"):
        return turning_measure(shape)
    if kind == "uniform":
        return uniform_measure(shape.length)
    raise ValueError(f"unknown measure kind {kind!r}")


def cmd_cap(args):
    shape, _ = read_shape(args.shape)
    if args.measure:
        m = load_measure(args.measure)
    else:
        m = _auto_measure(shape, args.auto)
    cap = cap_boundary(shape, m, closure_tol=args.tol_closure and args.tol_closure * shape.length,
                       gluing_rows=args.rows)
    out = _cap_summary(cap, shape.length)
    out["seed"] = args.seed
    dump_json(out, args.out_dir / "cap.json")
    _draw_development(shape, cap, args.out_dir / "cap.svg", "cap")
    print(f"closure defect {cap.closure_defect:.3e}, planar {bool(cap.planar)}, winding ok {cap.winding_ok}")
    if not cap.closes or cap.obstructions:
        return EXIT_OBSTRUCTION
    return EXIT_OK


def default_basepoint(c: complex) -> complex:
    if c == 0.25:
        return 0.5 + 0j
    f = quadratic(c)
    if green_polynomial(f, 2.0) > 0:
        return 2.0 + 0j
    return complex(max(2.0, abs(c)) + 0.5)


def cmd_julia(args):
    c = parse_complex(args.c)
    b = parse_complex(args.basepoint) if args.basepoint else default_basepoint(c)
    shape, m = julia_boundary(quadratic(c), b, args.depth)
    verdict = is_simple(shape)
    tol = (args.tol_closure or 1e-3) * shape.length
    cap = cap_boundary(shape, m, closure_tol=tol, check_simple=False)
    stem = args.out_dir / "julia"
    dump_json(shape_to_dict(shape), stem.with_name("julia_shape.json"))
    dump_json(m.to_dict(), stem.with_name("julia_measure.json"))
    out = _cap_summary(cap, shape.length)
    out.update({"c": [c.real, c.imag], "basepoint": [b.real, b.imag], "depth": args.depth,
                "vertices": int(shape.points.size), "shape_simple": bool(verdict), "seed": args.seed})
    out.pop("gluing", None)
    dump_json(out, stem.with_name("julia_cap.json"))
    _draw_development(shape, cap, stem.with_suffix(".svg"), f"c = {c}")
    print(f"{shape.points.size} vertices, simple {bool(verdict)}, "
          f"closure {cap.closure_defect / shape.length:.3e} of perimeter, planar {bool(cap.planar)}")
    return EXIT_OK if cap.closes and not cap.obstructions else EXIT_OBSTRUCTION


def _ks_report(name, hits):
    if name == "disk":
        ang = np.mod(np.angle(hits.points), 2 * np.pi) / (2 * np.pi)
        return {"reference": "uniform angle", **_ks(ang, "uniform")}
    if name == "interval":
        x = hits.points.real
        return {"reference": "arcsine on [-2, 2]",
                **_ks(x, lambda v: 0.5 + np.arcsin(np.clip(v / 2, -1, 1)) / np.pi)}
    if name in ("square", "unit-square"):
        side = 2.0 if name == "square" else 1.0
        return {"reference": "exterior Schwarz-Christoffel map of the square",
                **_ks(hits.t, lambda t: square_harmonic_cdf(t, side))}
    return None


def _ks(sample, cdf):
    res = stats.kstest(sample, cdf)
    return {"ks_statistic": float(res.statistic), "p_value": float(res.pvalue)}


def cmd_harmonic_mc(args):
    shape, name = read_shape(args.shape)
    sampler = HarmonicSampler(walkers=args.walkers, seed=args.seed)
    hits = harmonic_measure_mc(shape, sampler)
    m = hits.measure(shape, bins=args.bins)
    report = {"walkers": args.walkers, "seed": args.seed, "bins": args.bins,
              "discarded": hits.discarded, "mean_steps": hits.mean_steps, "measure": m.to_dict()}
    if hits.discard_rate > 0.01:
        report["warning"] = f"{100 * hits.discard_rate:.2f}% of walkers exhausted the step budget"
        log.warning(report["warning"])
    ks = _ks_report(name, hits)
    if ks:
        report["ks"] = ks
    status = EXIT_OK
    if args.cap:
        cap = cap_boundary(shape, m, check_simple=not shape.is_degenerate,
                           closure_tol=args.tol_closure and args.tol_closure * shape.length)
        report["cap"] = _cap_summary(cap, shape.length)
        report["cap"].pop("gluing", None)
        _draw_development(shape, cap, args.out_dir / "harmonic_cap.svg", "harmonic cap")
        if not cap.closes or cap.obstructions:
            status = EXIT_OBSTRUCTION
    dump_json(m.to_dict(), args.out_dir / "harmonic_measure.json")
    dump_json(report, args.out_dir / "harmonic_report.json")
    print(f"{args.walkers} walkers, {hits.discarded} discarded" + (f", KS {ks['ks_statistic']:.4f}" if ks else ""))
    return status


def _exterior_from_args(args) -> ExteriorMap:
    if args.c is not None:
        return bottcher_series(quadratic(parse_complex(args.c)), args.order)
    if args.phi == "joukowski":
        return ExteriorMap.joukowski()
    return ExteriorMap.identity()


def cmd_dev(args):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeriesConvergenceWarning)
        Phi = _exterior_from_args(args)
        z = np.exp(2j * np.pi * np.arange(args.samples) / args.samples)
        g = harmonic_cap_development(Phi, z)
        ends = harmonic_cap_development(Phi, np.exp(2j * np.pi * np.array([0.0, 1.0])))
        out = {"map": Phi.to_dict(), "samples": args.samples, "points": points_to_list(g),
               "closure_defect": float(abs(ends[1] - ends[0])), "seed": args.seed}
        if args.c is not None:
            c = parse_complex(args.c)
            finer = bottcher_series(quadratic(c), 2 * args.order)
            out["series_defect"] = float(np.max(np.abs(harmonic_cap_development(finer, z) - g)))
            out["functional_residual"] = functional_residual(Phi, c)
    dg = np.abs(development_derivative(Phi, z))
    cusps = np.flatnonzero(dg < args.cusp_tol * dg.max())
    # keep one sample per run of small derivative
    if cusps.size:
        runs = np.split(cusps, np.flatnonzero(np.diff(cusps) > 1) + 1)
        cusps = np.array([r[np.argmin(dg[r])] for r in runs])
    out["cusps"] = points_to_list(g[cusps])
    dump_json(out, args.out_dir / "dev.json")
    canvas = SvgCanvas()
    canvas.polyline(g, closed=True, stroke="#ff7f0e", label="g on the unit circle")
    for p in g[cusps]:
        canvas.marker(p, label="cusp")
    canvas.save(args.out_dir / "dev.svg")
    msg = f"{args.samples} samples, {cusps.size} cusps, closure defect {out['closure_defect']:.1e}"
    if "series_defect" in out:
        msg += f", series defect {out['series_defect']:.3e}"
    print(msg)
    return EXIT_OK


def cmd_naive_cap(args):
    shape, _ = read_shape(args.shape)
    nc = naive_cap(shape)
    out = {
        "hull": points_to_list(nc.hull.points),
        "flaps": [points_to_list(f.points) for f in nc.flaps],
        "chords": [points_to_list(ch) for ch in nc.chords],
        "union_boundary": points_to_list(nc.union_boundary.points),
        "measure": nc.measure.to_dict(),
        "planar": bool(nc.planar),
        "seed": args.seed,
    }
    if not nc.planar:
        out["first_crossing"] = {"edges": list(nc.planar.pair),
                                 "point": [nc.planar.point.real, nc.planar.point.imag]}
    dump_json(out, args.out_dir / "naive_cap.json")
    canvas = SvgCanvas()
    canvas.polyline(shape.points, stroke="#1f77b4", label="shape")
    canvas.polyline(nc.hull.points, stroke="#2ca02c", label="hull")
    for f in nc.flaps:
        canvas.polyline(f.points, closed=False, stroke="#ff7f0e", label="flap")
    canvas.save(args.out_dir / "naive_cap.svg")
    print(f"{len(nc.flaps)} flaps, planar {bool(nc.planar)}")
    return EXIT_OK


def _curvature_fixture(name: str):
    if name == "doubled-disk":
        shape = fixtures.circle_polygon(2**16)
        m = uniform_measure(shape.length)
        ts = np.linspace(0, shape.length, 5, endpoint=False) + 0.1
        return shape, m, ts
    if name == "interval":
        shape = fixtures.interval_slit()
        m = fixtures.interval_harmonic_measure(2048)
        return shape, m, np.array([1.0, 2.0, 3.0])
    if name == "ellipse":
        shape = fixtures.ellipse_polygon(2**16)
        m = fixtures.ellipse_harmonic_measure(shape)
        return shape, m, np.array([0.2, 1.0, 2.5, 4.0])
    if name == "square":
        shape = fixtures.unit_square()
        m = turning_measure(shape)
        return shape, m, np.array([0.5, 1.5])
    raise ValueError(f"unknown curvature fixture {name!r}")


def cmd_curvature_report(args):
    shape, m, ts = _curvature_fixture(args.fixture)
    cap = cap_boundary(shape, m, check_simple=not shape.is_degenerate)
    rows = curvature_report(shape, m, cap, ts)
    dump_json({"fixture": args.fixture, "rows": rows, "seed": args.seed}, args.out_dir / "curvature_report.json")
    for r in rows:
        print(f"t={r['t']:.4f} estimate={r['estimate']:.5f} reference={r['reference']:.5f} "
              f"rel.err={r['relative_error']:.2e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", type=Path, default=Path("."), help="directory for outputs")
    common.add_argument("--seed", type=int, default=None, help="random seed (default $CAPFORGE_SEED or 0)")
    common.add_argument("--tol-closure", type=float, default=None,
                        help="closure tolerance relative to the perimeter")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="capforge", description="Cap developments of planar shapes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="validate a shape and optional measure")
    p.add_argument("shape")
    p.add_argument("--measure")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("cap", parents=[common], help="develop the cap of a shape and measure")
    p.add_argument("shape", help="shape JSON or fixture:NAME")
    p.add_argument("--measure", help="measure JSON")
    p.add_argument("--auto", choices=["turning", "triangle", "uniform"], default="turning",
                   help="measure to use when --measure is absent")
    p.add_argument("--rows", type=int, default=0, help="extra uniform gluing rows")
    p.set_defaults(func=cmd_cap)

    p = sub.add_parser("julia", parents=[common], help="Julia-set polygon, equal-weight measure and cap")
    p.add_argument("--c", required=True, help="parameter of z**2 + c, e.g. -1 or 0.25 or '0.1,0.2'")
    p.add_argument("--depth", type=int, default=11)
    p.add_argument("--basepoint", default=None)
    p.set_defaults(func=cmd_julia)

    p = sub.add_parser("harmonic-mc", parents=[common], help="Monte Carlo harmonic measure")
    p.add_argument("shape")
    p.add_argument("--walkers", type=int, default=100_000)
    p.add_argument("--bins", type=int, default=500)
    p.add_argument("--cap", action="store_true", help="also develop the cap of the binned measure")
    p.set_defaults(func=cmd_harmonic_mc)

    p = sub.add_parser("dev", parents=[common], help="image of the unit circle under the development g")
    p.add_argument("--phi", choices=["joukowski", "identity"], default="joukowski")
    p.add_argument("--c", default=None, help="use the Böttcher series of z**2 + c instead")
    p.add_argument("--order", type=int, default=64)
    p.add_argument("--samples", type=int, default=2048)
    p.add_argument("--cusp-tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_dev)

    p = sub.add_parser("naive-cap", parents=[common], help="hull plus reflected pockets")
    p.add_argument("shape")
    p.set_defaults(func=cmd_naive_cap)

    p = sub.add_parser("curvature-report", parents=[common], help="circumference-deficit curvature estimates")
    p.add_argument("--fixture", choices=["doubled-disk", "ellipse", "interval", "square"], default="doubled-disk")
    p.set_defaults(func=cmd_curvature_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.seed = resolve_seed(args.seed)
    if args.tol_closure is not None and not args.tol_closure > 0:
        parser.error("--tol-closure must be positive")
    try:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        return args.func(args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (CapforgeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
