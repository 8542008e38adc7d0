"""Acceptance criteria 1-9 at the default resolution (64 panels/side, grading 3,
512 grid, 256 samples/arc). Each test prints one PASS/FAIL line."""

import math
from dataclasses import replace

import numpy as np
import pytest

from electroskeleton import io
from electroskeleton.cli import cmd_conjecture
from electroskeleton.equilibrium import build_mesh, solve_equilibrium
from electroskeleton.geom2d import EQUILATERAL, UNIT_SQUARE, random_convex_polygon, regular_polygon, validate_polygon
from electroskeleton.pipeline import run_pipeline
from electroskeleton.verify import check_ray_monotonicity, match_exterior, trace_level_curve
from tests.conftest import ACCEPTANCE_LINES, EQ_CENTROID, _config


def report(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def skeleton_ok(res) -> tuple[bool, str]:
    conn = res.connectivity
    n = res.polygon.n_sides
    vertex_ends = sorted(
        ref for a in res.skeleton.arcs for kind, ref in zip(a.endpoint_kinds, a.endpoint_refs) if kind == "vertex"
    )
    junction_ends = all(
        kind in ("vertex", "junction") for a in res.skeleton.arcs for kind in a.endpoint_kinds
    )
    ok = (
        conn.n_regions == n
        and all(conn.touches_own_face.values())
        and vertex_ends == list(range(n))
        and len(res.skeleton.junctions) >= 1
        and junction_ends
        and conn.complement_connected
    )
    return ok, f"regions={conn.n_regions} junctions={len(res.skeleton.junctions)} vertex_ends={vertex_ends} " \
               f"complement_components={conn.complement_components}"


@pytest.fixture(scope="module")
def fixtures(run_cached):
    return {name: run_cached(name) for name in ("equilateral", "square", "scalene", "pentagon", "hexagon")}


def test_criterion_1_triangle_skeletons(fixtures):
    rng = np.random.default_rng(2024)
    runs = [("equilateral", fixtures["equilateral"][1])]
    for k in range(10):
        poly = random_convex_polygon(3, rng, min_angle_deg=15.0, max_angle_deg=180.0)
        runs.append((f"random{k}", run_pipeline(_config(poly.vertices), poly)))
    failures = []
    for name, res in runs:
        ok, detail = skeleton_ok(res)
        if not ok:
            failures.append(f"{name}: {detail}")
    report(1, "triangle skeleton structure", not failures, f"{len(runs)} triangles, failures={failures}")


def test_criterion_2_equilateral_symmetry(fixtures):
    res = fixtures["equilateral"][1]
    skel = res.skeleton
    j_err = min(np.linalg.norm(j.location - EQ_CENTROID) for j in skel.junctions)
    dev = 0.0
    for arc in skel.arcs:
        v = res.polygon.vertices[arc.endpoint_refs[1]]
        d = (EQ_CENTROID - v) / np.linalg.norm(EQ_CENTROID - v)
        rel = arc.points - v
        dev = max(dev, float(np.abs(rel[:, 0] * d[1] - rel[:, 1] * d[0]).max()))
    masses = res.measure.arc_masses()
    spread = float(np.ptp(masses))
    ok = len(skel.junctions) == 1 and j_err < 1e-4 and dev < 1e-4 and spread < 1e-3
    report(2, "equilateral symmetry", ok, f"junction_err={j_err:.2e} bisector_dev={dev:.2e} arm_mass_spread={spread:.2e}")


def test_criterion_3_exterior_match(fixtures):
    lines = []
    ok = True
    for name in ("equilateral", "square", "scalene"):
        cfg, res = fixtures[name]
        radii = [r * res.polygon.diameter for r in (2.0, 5.0)]
        rep = match_exterior(res.solution, res.measure, radii, 128, 6)
        good = rep.sup_error < 5e-3 and max(rep.moment_errors) < 5e-3 and rep.mass_error < 5e-3
        k = np.arange(len(res.skeleton.arcs))
        bad = res.measure.scaled_arcs(1.0 + 0.1 * np.where(k % 2 == 0, 1.0, -1.0))
        neg = match_exterior(res.solution, bad, radii, 128, 6).sup_error
        good = good and neg > 1e-2
        ok &= good
        lines.append(f"{name}: sup={rep.sup_error:.1e} mom={max(rep.moment_errors):.1e} "
                     f"mass={rep.mass_error:.1e} perturbed={neg:.1e}")
    report(3, "exterior potential match + negative control", ok, "; ".join(lines))


def test_criterion_4_positivity(fixtures):
    mins = {name: float(res.measure.density.min()) for name, (_, res) in fixtures.items()}
    ok = all(m > 0 for m in mins.values()) and all(
        np.all(res.measure.weights > 0) for _, res in fixtures.values())
    report(4, "positive density", ok, ", ".join(f"{k}={v:.3g}" for k, v in mins.items()))


def test_criterion_5_level_convexity(fixtures):
    worst = {}
    for name in ("equilateral", "square"):
        sol = fixtures[name][1].solution
        worst[name] = min(trace_level_curve(sol, c, 256).min_cross_product for c in (0.05, 0.3, 1.0))
    ok = all(v >= -1e-6 for v in worst.values())
    report(5, "level-set convexity", ok, ", ".join(f"{k} min_cross={v:.2e}" for k, v in worst.items()))


def test_criterion_6_ray_monotonicity(fixtures):
    worst = {}
    for name in ("equilateral", "square", "scalene"):
        res = fixtures[name][1]
        reps = check_ray_monotonicity(res.solution, res.polygon, trials=30, seed=0)
        worst[name] = min(r.min_increment for r in reps)
    ok = all(v > -1e-8 for v in worst.values())
    report(6, "ray monotonicity", ok, ", ".join(f"{k} min_increment={v:.2e}" for k, v in worst.items()))


def test_criterion_7_solver_convergence():
    tri = validate_polygon(EQUILATERAL)
    g128 = solve_equilibrium(build_mesh(tri, 128, 3)).robin_constant
    g256 = solve_equilibrium(build_mesh(tri, 256, 3)).robin_constant
    disk = solve_equilibrium(build_mesh(validate_polygon(regular_polygon(64)), 8, 3)).robin_constant
    base = validate_polygon(2 * UNIT_SQUARE - 1)
    g0 = solve_equilibrium(build_mesh(base, 64, 3)).robin_constant
    s = 2.5
    gs = solve_equilibrium(build_mesh(validate_polygon(s * base.vertices), 64, 3)).robin_constant
    scale_err = abs(gs - g0 - math.log(s))
    ok = abs(g256 - g128) < 1e-4 and abs(disk) < 5e-3 and scale_err < 1e-4
    report(7, "solver convergence", ok,
           f"|g256-g128|={abs(g256 - g128):.1e} disk_gamma={disk:.1e} scaling_err={scale_err:.1e}")


def test_criterion_8_conjecture_experiment(fixtures):
    named = {k: fixtures[k][1].connectivity.complement_connected for k in ("pentagon", "hexagon")}
    cfg = _config(UNIT_SQUARE)
    out = cmd_conjecture(cfg, n_sides=4, trials=50, include_regular=True)
    import jsonschema

    jsonschema.validate(out, io.load_schema("conjecture"))
    s = out["summary"]
    dumped = all("vertices" in c and "config" in c for c in out["counterexamples"])
    square_ok = out["instances"][0]["status"] == "ok" and out["instances"][0]["complement_connected"]
    ok = (all(named.values()) and square_ok and s["runs"] == 51 and dumped
          and s["connected"] + s["counterexamples"] + s["errors"] == s["runs"])
    report(8, "connected complement experiment", ok,
           f"square={square_ok} pentagon={named['pentagon']} hexagon={named['hexagon']} "
           f"quadrilaterals: runs={s['runs']} connected={s['connected']} "
           f"counterexamples={s['counterexamples']} errors={s['errors']}")


def test_criterion_9_determinism(fixtures, tmp_path):
    cfg = fixtures["scalene"][0]
    texts = []
    for k in range(2):
        res = run_pipeline(cfg)
        path = tmp_path / f"run{k}.json"
        io.write_atomic(path, io.dumps(io.bundle(res, cfg.as_dict())))
        texts.append(path.read_bytes())
    report(9, "byte-identical output", texts[0] == texts[1], f"{len(texts[0])} bytes")
