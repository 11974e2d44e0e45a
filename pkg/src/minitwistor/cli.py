"""Command-line tools for Segre quartic surfaces, their pencils and the space of real lines.

Every subcommand writes its outputs plus manifest.json into --out. Exit codes:
0 success, 2 invalid parameters or input, 3 identity failure, 4 point is a
pole of the C* action, 5 conformal form with the wrong signature.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction

import numpy as np

from .errors import (AtCStarFixedPoint, DegenerateParams, ExactModeUnavailable, GeometryError, NoSpheres,
                     NotInW, NotOnSurface, SignatureMismatch, FiberBoundary)
from .reports import RunConfig, ReportBundle
from .scalar_geometry import ProjPoint
from .segre import build_surface, rotate_real, sphere_chart, sphere_point_real, surface_to_json

EXIT_OK, EXIT_PARAMS, EXIT_IDENTITY, EXIT_POLE, EXIT_SIGNATURE = 0, 2, 3, 4, 5


class InputError(Exception):
    pass


def _number(text):
    text = text.strip()
    if text.startswith("sqrt(") and text.endswith(")"):
        return math.sqrt(float(Fraction(text[5:-1])))
    try:
        return Fraction(text)
    except ValueError:
        return float(text)


def _vector(text, n=5):
    vals = [_number(t) for t in text.split(",")]
    if len(vals) != n:
        raise InputError(f"expected {n} comma-separated values, got {len(vals)}")
    return vals


def _real_point(values, coords):
    """Real-form float vector from user coordinates."""
    if coords == "complex":
        return ProjPoint(tuple(complex(float(v)) for v in values), "approx")
    return np.array([float(v) for v in values])


def default_generic_point(S):
    ch = sphere_chart(S, 1)
    lo, hi = ch.theta_bounds
    return sphere_point_real(ch, lo + 0.37 * (hi - lo), 0.9)


def default_geodesic_pair():
    x = np.array([math.sqrt(4.25), 0.0, 1.0, math.sqrt(0.19), -0.9])
    return x, rotate_real(x, 2.0)


# ---------------------------------------------------------------------------
# commands


def cmd_surface_info(S, cfg, bundle, args):
    bundle.json("surface.json", surface_to_json(S))
    return EXIT_OK


def cmd_verify_identities(S, cfg, bundle, args):
    from .identities import verify_identities

    res, elapsed, ok = verify_identities(S, tol=cfg.tolerance.projective)
    bundle.time("identities", elapsed)
    bundle.json("identities.json", {"mode": S.mode, "count": len(res), "allPass": ok,
                                    "checks": [{"name": r.name, "ok": r.ok, "detail": r.detail} for r in res]})
    for r in res:
        if not r.ok:
            print(f"identity failed: {r.name} {r.detail}", file=sys.stderr)
    print(f"{sum(r.ok for r in res)}/{len(res)} identities hold")
    return EXIT_OK if ok else EXIT_IDENTITY


def cmd_pencil(S, cfg, bundle, args):
    from .pencil import profile_to_json, pencil_profile
    from .svg import circle_diagram, section_svg

    p = default_generic_point(S) if args.point is None else _real_point(_vector(args.point), args.coords)
    prof = pencil_profile(S, p, samples=args.samples, grid=(cfg.grid.theta, cfg.grid.phi))
    bundle.json("pencil.json", profile_to_json(prof))
    ts = bundle.timestamp()
    bundle.svg("circle.svg", circle_diagram(prof, timestamp=ts))
    members = {m["name"]: m for m in prof.members}
    seq = []
    for name in prof.order:
        if name in members:
            seq.append((name, members[name]))
        seq += [(iv["name"], iv) for iv in prof.intervals if iv["name"] == _interval_after(prof, name)]
    node = prof.frame.P
    for k, (name, entry) in enumerate(seq):
        res = entry["result"]
        bundle.svg(f"trace_{k:02d}_{name}.svg",
                   section_svg(S, res.components, marks=[("p", node)], title=f"{name}: {res.tag}", timestamp=ts))
    print(f"table {'conforms' if prof.table_ok else 'differs'}; order {' '.join(prof.order)}")
    for d in prof.diagnostics:
        print("  " + d, file=sys.stderr)
    return EXIT_OK


def _interval_after(prof, member):
    names = ["J1", "J2", "J3", "J4", "J5"]
    if prof.merged:
        names = ["J1", "J3", "J4", "J5"]
    idx = prof.order.index(member)
    return names[idx] if idx < len(names) else None


def cmd_section(S, cfg, bundle, args):
    from .pencil import classify_section
    from .svg import section_svg

    h = np.array([float(v) for v in _vector(args.hyperplane)])
    node = None if args.node is None else _real_point(_vector(args.node), args.coords)
    res = classify_section(S, h, node=node, grid=(cfg.grid.theta, cfg.grid.phi))
    doc = {"hyperplane": h, "tag": res.tag, "nodeTag": res.node_tag, "notes": res.notes,
           "singularPoints": [{"point": np.real(sp.point), "kappa": sp.kappa, "real": sp.real,
                               "sphere": sp.sphere, "kind": sp.kind} for sp in res.singular_points],
           "components": {f"S{w}": [{"closed": c.closed, "points": len(c.points), "arcLength": c.arc_length}
                                    for c in cs] for w, cs in sorted(res.components.items())}}
    bundle.json("section.json", doc)
    rows = []
    for w, cs in sorted(res.components.items()):
        for ci, c in enumerate(cs):
            rows += [[w, ci, i, *pt] for i, pt in enumerate(c.points)]
    bundle.csv("section_traces.csv", ["sphere", "component", "index", "u", "v", "x3", "x4"], rows)
    marks = [(f"q{k}", np.real(sp.point)) for k, sp in enumerate(res.singular_points) if sp.real]
    bundle.svg("section.svg", section_svg(S, res.components, marks=marks, title=res.tag,
                                          timestamp=bundle.timestamp()))
    print(res.tag)
    return EXIT_OK


def cmd_nullcone(S, cfg, bundle, args):
    from .weyl import (classify_direction, conformal_form, fiber_direction_type, null_direction,
                       parametrize_minitwistor, w_chart, w_locate)

    if args.hyperplane is not None:
        w = w_locate(S, np.array([float(v) for v in _vector(args.hyperplane)]))
    else:
        p = default_generic_point(S) if args.point is None else _real_point(_vector(args.point), args.coords)
        w = w_chart(S, p, args.s)
    form = conformal_form(S, w)
    nq = parametrize_minitwistor(S, w)
    nulls = []
    for t0 in (-1.0, 0.0, 0.5, 2.0):
        dh = null_direction(S, w, t0, nq)
        nulls.append({"t0": t0, "type": classify_direction(S, w, dh, nq)})
    doc = {"point": w.to_json(), "form": form.to_json(), "fiberDirection": fiber_direction_type(S, w),
           "nullDirections": nulls, "fitOk": form.residual <= cfg.tolerance.fit_residual,
           "parametrization": nq.kind}
    bundle.json("nullcone.json", doc)
    print(f"signature {form.signature} residual {form.residual!r}")
    return EXIT_OK


def cmd_geodesic(S, cfg, bundle, args):
    from .svg import trace_svg
    from .weyl import geodesic_rows, trace_geodesic, _pole_vectors

    if args.x is None and args.y is None:
        x, y = default_geodesic_pair()
    elif args.x is None or args.y is None:
        raise InputError("give both --x and --y or neither")
    else:
        x = np.array([float(v) for v in _vector(args.x)])
        y = np.array([float(v) for v in _vector(args.y)])
    tr = trace_geodesic(S, x, y, grid=(cfg.grid.theta, cfg.grid.phi))
    summary = tr.summary()
    summary["closurePass"] = (not tr.empty) and all(
        c and g is not None and g <= cfg.tolerance.closure
        for c, g in zip(tr.closed, summary["relativeGaps"]))
    bundle.json("geodesic.json", summary)
    bundle.csv("geodesic.csv", ["component", "index", "u", "v", "x2", "x3", "x4", "s",
                                "h0", "h1", "h2", "h3", "h4", "gTangent"], geodesic_rows(tr))
    poles = _pole_vectors(S)
    bundle.svg("geodesic.svg", trace_svg(S, tr.components, which=1, marks=[("p1", poles[0]), ("p2", poles[1])],
                                         title="space-like geodesic", timestamp=bundle.timestamp()))
    print(f"{summary['components']} component(s), closed {summary['closed']}")
    return EXIT_OK


def cmd_zoll_sweep(S, cfg, bundle, args):
    from .weyl import zoll_sweep

    t0 = time.perf_counter()
    rows, summary = zoll_sweep(S, n=args.samples, seed=cfg.seed, workers=args.workers,
                               grid=(cfg.grid.theta, cfg.grid.phi), closure_rel=cfg.tolerance.closure)
    bundle.time("sweep", time.perf_counter() - t0)
    out = []
    for r in rows:
        gaps = [g for g in r["relativeGaps"] if g is not None]
        out.append([r["pair"], r["components"], ";".join("1" if c else "0" for c in r["closed"]),
                    max(gaps) if gaps else "", "" if r["minGTangent"] is None else r["minGTangent"],
                    int(r["empty"])])
    bundle.csv("zoll_sweep.csv", ["pair", "components", "closed", "maxClosureGap", "minGTangent", "empty"], out)
    bundle.json("zoll_summary.json", summary)
    print(f"non-empty rate {summary['nonEmptyRate']}, closure pass rate {summary['closurePassRate']}")
    return EXIT_OK


def cmd_hole_smoothness(S, cfg, bundle, args):
    from .weyl import hole_smoothness_report

    which = int(args.which.lstrip("p"))
    if which not in (1, 2):
        raise InputError("--which must be p1 or p2")
    rep = hole_smoothness_report(S, which=which, s=args.s)
    bundle.json("hole_smoothness.json", rep)
    rows = [[t, *e, d] for t, e, d in zip(rep["taus"], rep["entries"], rep["firstDifferences"] + [""])]
    bundle.csv("hole_smoothness.csv", ["tau", "g00", "g01", "g02", "g11", "g12", "g22", "firstDifference"], rows)
    print(f"jump ratio {rep['jumpRatio']!r}, order {rep['richardsonOrder']!r}")
    return EXIT_OK


COMMANDS = {
    "surface-info": cmd_surface_info,
    "verify-identities": cmd_verify_identities,
    "pencil": cmd_pencil,
    "section": cmd_section,
    "nullcone": cmd_nullcone,
    "geodesic": cmd_geodesic,
    "zoll-sweep": cmd_zoll_sweep,
    "hole-smoothness": cmd_hole_smoothness,
}

# surface-info and verify-identities work without real spheres
NEEDS_SPHERES = set(COMMANDS) - {"surface-info", "verify-identities"}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override it")
    common.add_argument("--alpha", type=_number)
    common.add_argument("--beta", type=_number)
    common.add_argument("--gamma", type=_number)
    common.add_argument("--mode", choices=["exact", "approx"])
    common.add_argument("--seed", type=int)
    common.add_argument("--out")
    common.add_argument("--tolerance.projective", dest="tol_projective", type=float)
    common.add_argument("--tolerance.closure", dest="tol_closure", type=float)
    common.add_argument("--tolerance.fit-residual", dest="tol_fit", type=float)
    common.add_argument("--grid.theta", dest="grid_theta", type=int)
    common.add_argument("--grid.phi", dest="grid_phi", type=int)
    common.add_argument("--golden", action="store_true", help="omit timestamps, timings and platform versions")
    common.add_argument("--coords", choices=["real", "complex"], default="real",
                        help="points given as (u, v, x2, x3, x4) or as (X0, ..., X4)")

    parser = argparse.ArgumentParser(prog="minitwistor", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("surface-info", "verify-identities"):
        sub.add_parser(name, parents=[common])
    p = sub.add_parser("pencil", parents=[common])
    p.add_argument("--point")
    p.add_argument("--samples", type=int, default=1)
    p = sub.add_parser("section", parents=[common])
    p.add_argument("--hyperplane", required=True)
    p.add_argument("--node")
    p = sub.add_parser("nullcone", parents=[common])
    p.add_argument("--point")
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--hyperplane")
    p = sub.add_parser("geodesic", parents=[common])
    p.add_argument("--x")
    p.add_argument("--y")
    p = sub.add_parser("zoll-sweep", parents=[common])
    p.add_argument("--samples", type=int, default=25)
    p.add_argument("--workers", type=int, default=1)
    p = sub.add_parser("hole-smoothness", parents=[common])
    p.add_argument("--which", default="p1")
    p.add_argument("--s", type=float, default=0.5)
    return parser


def make_config(args):
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = RunConfig.from_json(fh.read()).to_dict()
    cfg = RunConfig.from_dict(base) if base else RunConfig()
    d = cfg.to_dict()
    for k in ("alpha", "beta", "gamma", "mode", "seed", "out"):
        v = getattr(args, k)
        if v is not None:
            d[k] = v
    for flag, key in (("tol_projective", "projective"), ("tol_closure", "closure"), ("tol_fit", "fit_residual")):
        v = getattr(args, flag)
        if v is not None:
            d["tolerance"][key] = v
    for flag, key in (("grid_theta", "theta"), ("grid_phi", "phi")):
        v = getattr(args, flag)
        if v is not None:
            d["grid"][key] = v
    return RunConfig.from_dict(d)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        S = build_surface(*cfg.surface_args())
    except (ValueError, TypeError, DegenerateParams, ExactModeUnavailable, OSError, json.JSONDecodeError) as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    bundle = ReportBundle(args.command, cfg, golden=args.golden)
    try:
        if args.command in NEEDS_SPHERES:
            S.require_spheres()
        code = COMMANDS[args.command](S, cfg, bundle, args)
    except AtCStarFixedPoint as exc:
        print(f"point is a pole of the C* action: {exc}; use nullcone --point with --s", file=sys.stderr)
        code = EXIT_POLE
    except SignatureMismatch as exc:
        print(f"signature mismatch: {exc}", file=sys.stderr)
        code = EXIT_SIGNATURE
    except (InputError, NoSpheres, NotOnSurface, NotInW, FiberBoundary, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        code = EXIT_PARAMS
    except GeometryError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        code = EXIT_PARAMS
    bundle.manifest(code)
    return code


if __name__ == "__main__":
    sys.exit(main())
