"""Command-line entry point: ``electroskeleton {compute,verify,conjecture}``."""

from __future__ import annotations

import argparse
import logging
import sys
import traceback

import numpy as np

from . import errors, io
from .config import RunConfig, Tolerances
from .geom2d import random_convex_polygon, regular_polygon, validate_polygon
from .pipeline import run_pipeline
from .verify import verify_result

logger = logging.getLogger("electroskeleton")

EXIT_CODES = {
    "ok": 0,
    "generic error": errors.SkeletonError.exit_code,
    "invalid polygon": errors.InvalidPolygon.exit_code,
    "non-convex polygon": errors.NonConvex.exit_code,
    "degenerate angle": errors.DegenerateAngle.exit_code,
    "duplicate vertex": errors.DuplicateVertex.exit_code,
    "singular collocation system": errors.SingularSystem.exit_code,
    "negative equilibrium density": errors.NegativeDensity.exit_code,
    "ridge chaining failure": errors.ChainingFailure.exit_code,
    "verification check failed": errors.VerificationFailed.exit_code,
    "bad command-line usage": 64,
}

NONCONVEX_NOTE = (
    "a non-convex polygon has no electrostatic skeleton in general, "
    "so the reflection construction is only run on convex input"
)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


def _common(p: argparse.ArgumentParser, polygon: bool = True) -> None:
    if polygon:
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--vertices", help="flat list x1,y1,x2,y2,...")
        src.add_argument("--input", help='JSON file {"vertices": [[x, y], ...]}')
    d = RunConfig()
    p.add_argument("--panels", type=int, default=d.panels_per_side, help="boundary panels per side")
    p.add_argument("--grading", type=float, default=d.grading, help="corner grading exponent")
    p.add_argument("--grid", type=int, default=d.grid_resolution, help="label grid cells along the long axis")
    p.add_argument("--arc-samples", type=int, default=d.samples_per_arc, help="density samples per ridge arc")
    p.add_argument("--min-angle", type=float, default=d.min_angle_deg, help="reject interior angles below (deg)")
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--out", help="output JSON path (default: stdout)")
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE", help="override a tolerance")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    epilog = "exit codes:\n" + "\n".join(f"  {code:3d}  {name}" for name, code in EXIT_CODES.items())
    parser = argparse.ArgumentParser(
        prog="electroskeleton",
        description="Electrostatic skeletons of convex polygons by reflecting the Green function.",
        epilog=epilog,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="build the skeleton and its measure")
    _common(c)
    c.add_argument("--csv", metavar="PREFIX", help="also write PREFIX_ridges.csv and PREFIX_measure.csv")

    v = sub.add_parser("verify", help="check the skeleton property and supporting facts")
    _common(v)
    v.add_argument("--levels", type=_floats, default=RunConfig().levels, help="level-curve values, comma separated")
    v.add_argument("--radii", type=_floats, default=RunConfig().radii, help="test-circle radii in diameters")
    v.add_argument("--perturb", nargs="?", type=float, const=0.1, default=0.0,
                   help="negative control: scale arc masses by 1 +/- PERTURB (default 0.1)")

    k = sub.add_parser("conjecture", help="connectivity of the ridge complement on random convex n-gons")
    _common(k, polygon=False)
    k.add_argument("--sides", type=int, required=True)
    k.add_argument("--trials", type=int, default=50)
    k.add_argument("--random-min-angle", type=float, default=15.0, help="angle filter for random polygons (deg)")
    k.add_argument("--min-side", type=float, default=0.05, help="shortest side of random polygons, in diameters")
    k.add_argument("--no-regular", action="store_true", help="skip the regular n-gon fixture")
    return parser


def _tolerances(items) -> Tolerances:
    kw = {}
    for item in items:
        name, _, value = item.partition("=")
        kw[name.strip()] = float(value)
    return Tolerances().override(**kw)


def config_from_args(args) -> RunConfig:
    verts = ()
    if getattr(args, "vertices", None):
        verts = io.parse_vertex_list(args.vertices)
    elif getattr(args, "input", None):
        verts = io.load_vertices(args.input)
    kw = dict(
        vertices=tuple(tuple(map(float, v)) for v in verts),
        panels_per_side=args.panels,
        grading=args.grading,
        grid_resolution=args.grid,
        samples_per_arc=args.arc_samples,
        min_angle_deg=args.min_angle,
        seed=args.seed,
        tolerances=_tolerances(args.tol),
        output_path=args.out,
    )
    if hasattr(args, "levels"):
        kw.update(levels=tuple(args.levels), radii=tuple(args.radii), perturb=args.perturb)
    return RunConfig(**kw)


def _emit(obj: dict, path: str | None) -> None:
    text = io.dumps(obj)
    if path:
        io.write_atomic(path, text)
    else:
        sys.stdout.write(text)


def cmd_compute(cfg: RunConfig, csv_prefix: str | None = None) -> dict:
    result = run_pipeline(cfg)
    out = io.bundle(result, cfg.as_dict())
    _emit(out, cfg.output_path)
    if csv_prefix:
        io.write_csv(csv_prefix, result)
    return out


def cmd_verify(cfg: RunConfig) -> dict:
    result = run_pipeline(cfg)
    report = verify_result(result, cfg)
    out = report.as_dict()
    out["robin_constant"] = result.solution.robin_constant
    out["config"] = cfg.as_dict()
    _emit(out, cfg.output_path)
    for name, ok in report.checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}", file=sys.stderr)
    return out


def cmd_conjecture(
    cfg: RunConfig,
    n_sides: int,
    trials: int,
    include_regular: bool = True,
    random_min_angle: float = 15.0,
    min_side: float = 0.05,
) -> dict:
    """Run the pipeline on random convex n-gons and collect any disconnected complement."""
    if n_sides < 4:
        raise errors.InvalidPolygon("conjecture runs need n_sides >= 4; triangles are settled")
    rng = np.random.default_rng(cfg.seed)
    polys = []
    if include_regular:
        polys.append(("regular", regular_polygon(n_sides)))
    for _ in range(trials):
        polys.append(("random", random_convex_polygon(n_sides, rng, random_min_angle, min_side_frac=min_side).vertices))

    instances, counter, errs = [], [], []
    base = cfg.as_dict()
    for idx, (kind, verts) in enumerate(polys):
        entry = {"index": idx, "kind": kind, "vertices": np.asarray(verts).tolist()}
        try:
            res = run_pipeline(cfg, validate_polygon(verts, cfg.min_angle_deg))
        except errors.SkeletonError as exc:
            logger.warning("instance %d failed: %s", idx, exc)
            entry.update(status="error", error=f"{type(exc).__name__}: {exc}")
            errs.append({"index": idx, "vertices": entry["vertices"], "error": entry["error"]})
            instances.append(entry)
            continue
        conn = res.connectivity
        entry.update(
            status="ok",
            n_regions=conn.n_regions,
            complement_connected=conn.complement_connected,
            complement_components=conn.complement_components,
            n_junctions=conn.n_junctions,
            n_arcs=conn.n_arcs,
        )
        instances.append(entry)
        if not conn.complement_connected:
            logger.warning("instance %d: ridge complement has %d components", idx, conn.complement_components)
            counter.append({
                "index": idx,
                "vertices": entry["vertices"],
                "config": {**base, "vertices": entry["vertices"]},
                "connectivity": conn.as_dict(),
                "skeleton": io.skeleton_dict(res),
            })
    ok = [i for i in instances if i["status"] == "ok"]
    out = {
        "n_sides": n_sides,
        "trials": trials,
        "seed": cfg.seed,
        "instances": instances,
        "counterexamples": counter,
        "errors": errs,
        "summary": {
            "runs": len(instances),
            "connected": sum(1 for i in ok if i["complement_connected"]),
            "counterexamples": len(counter),
            "errors": len(errs),
        },
        "config": base,
        "generator": {"min_angle_deg": random_min_angle, "max_angle_deg": 170.0, "min_side_frac": min_side},
    }
    _emit(out, cfg.output_path)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        if args.command == "compute":
            cmd_compute(cfg, args.csv)
        elif args.command == "verify":
            out = cmd_verify(cfg)
            if not out["passed"]:
                return errors.VerificationFailed.exit_code
        else:
            cmd_conjecture(cfg, args.sides, args.trials, not args.no_regular, args.random_min_angle, args.min_side)
    except errors.NonConvex as exc:
        print(f"error: NonConvex: {exc}; {NONCONVEX_NOTE}", file=sys.stderr)
        return exc.exit_code
    except errors.SkeletonError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        if args.verbose:
            traceback.print_exc()
        print(f"error: {exc}", file=sys.stderr)
        return 64
    return 0


if __name__ == "__main__":
    sys.exit(main())
