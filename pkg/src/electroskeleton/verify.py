"""Numerical checks of the skeleton property and of the facts the construction relies on."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig, Tolerances
from .equilibrium import EquilibriumSolution, build_mesh, eval_u, log_potential, resolved_mask, solve_equilibrium
from .errors import CircleIntersectsK, RootNotBracketed
from .geom2d import ConvexPolygon, reflect_point, signed_distances
from .riesz import RieszMeasure, complex_moments, potential_of_measure

logger = logging.getLogger(__name__)


@dataclass
class MatchReport:
    sup_error_by_radius: dict[float, float]
    moment_errors: list[float]
    mass_error: float

    @property
    def sup_error(self) -> float:
        return max(self.sup_error_by_radius.values())

    def passed(self, tol: Tolerances) -> bool:
        return (
            self.sup_error < tol.match_sup
            and max(self.moment_errors) < tol.moment
            and self.mass_error < tol.mass
        )

    def as_dict(self) -> dict:
        return {
            "sup_error_by_radius": {repr(float(r)): e for r, e in self.sup_error_by_radius.items()},
            "moment_errors": self.moment_errors,
            "mass_error": self.mass_error,
        }


@dataclass
class ConvexityReport:
    level: float
    polyline: np.ndarray
    min_cross_product: float

    def as_dict(self) -> dict:
        return {"level": self.level, "n_points": len(self.polyline), "min_cross_product": self.min_cross_product}


@dataclass
class MonotonicityReport:
    segment: tuple[np.ndarray, np.ndarray]
    values: np.ndarray
    min_increment: float
    start_fraction: float = 0.0  # sampling starts this far along the segment

    def as_dict(self) -> dict:
        return {
            "segment": [self.segment[0].tolist(), self.segment[1].tolist()],
            "start_fraction": self.start_fraction,
            "start_value": float(self.values[0]),
            "min_increment": self.min_increment,
        }


def _circle(center, radius, n):
    th = 2 * np.pi * np.arange(n) / n
    return center + radius * np.column_stack([np.cos(th), np.sin(th)])


def match_exterior(
    sol: EquilibriumSolution,
    mu: RieszMeasure,
    radii,
    points_per_circle: int = 128,
    k_max: int = 6,
) -> MatchReport:
    """Compare the potential of mu with that of the equilibrium measure outside K.

    Both measures have unit mass, so the raw potentials must agree without an
    additive offset. Moments are taken about the polygon centroid.
    """
    poly = sol.polygon
    c = poly.centroid
    reach = np.linalg.norm(poly.vertices - c, axis=1).max()
    sup = {}
    for r in radii:
        if r <= reach:
            raise CircleIntersectsK(f"circle of radius {r:g} about the centroid meets the polygon")
        z = _circle(c, r, points_per_circle)
        sup[float(r)] = float(np.abs(potential_of_measure(mu, z) - log_potential(sol, z)).max())
    mom = np.abs(complex_moments(mu, k_max, c) - complex_moments(sol, k_max, c))
    return MatchReport(sup, [float(m) for m in mom], abs(mu.total_mass - 1.0))


def _ray_exit(poly: ConvexPolygon, origin, dirs) -> np.ndarray:
    """Distance from an interior origin to the boundary along each unit direction."""
    n = np.array([f.unit_inward_normal for f in poly.faces])
    d0 = signed_distances(poly, origin)
    rate = dirs @ n.T  # d/dt of signed distance
    with np.errstate(divide="ignore"):
        t = np.where(rate < 0, d0 / -rate, np.inf)
    return t.min(axis=1)


def trace_level_curve(
    sol: EquilibriumSolution, c: float, n_angles: int = 256, max_radius_factor: float = 1e6
) -> ConvexityReport:
    """Root-find u = c along rays from the centroid and measure the curve's convexity."""
    if c <= 0:
        raise ValueError("level must be positive")
    poly = sol.polygon
    center = poly.centroid
    th = 2 * np.pi * np.arange(n_angles) / n_angles
    dirs = np.column_stack([np.cos(th), np.sin(th)])
    lo = _ray_exit(poly, center, dirs)
    hi = lo * 1.5 + 1e-3 * poly.diameter
    limit = max_radius_factor * poly.diameter
    for _ in range(200):
        need = eval_u(sol, center + hi[:, None] * dirs) < c
        if not need.any():
            break
        if np.any(hi[need] > limit):
            raise RootNotBracketed(f"level {c:g} not reached within radius {limit:g}")
        lo = np.where(need, hi, lo)
        hi = np.where(need, 2 * hi, hi)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = eval_u(sol, center + mid[:, None] * dirs) < c
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    pts = center + (0.5 * (lo + hi))[:, None] * dirs
    e = np.roll(pts, -1, axis=0) - pts
    e2 = np.roll(e, -1, axis=0)
    cross = (e[:, 0] * e2[:, 1] - e[:, 1] * e2[:, 0]) / (
        np.linalg.norm(e, axis=1) * np.linalg.norm(e2, axis=1)
    )
    return ConvexityReport(level=c, polyline=pts, min_cross_product=float(cross.min()))


def check_ray_monotonicity(
    sol: EquilibriumSolution,
    poly: ConvexPolygon,
    trials: int = 30,
    seed: int = 0,
    n_samples: int = 64,
    reverse: bool = False,
    max_redraws: int = 100,
) -> list[MonotonicityReport]:
    """Sample u along mirror images of vertex-to-side segments.

    Each trial joins a random point b of a random side to a vertex V off that
    side, then reflects the segment across the sides through V. The images
    start at V and run outside K; u must not decrease along them.

    Samples start where the segment leaves the band of one local panel length
    around the boundary (see `resolved_mask`). A draw whose image never leaves
    that band is redrawn and logged.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if n_samples < 50:
        raise ValueError("n_samples must be >= 50")
    rng = np.random.default_rng(seed)
    n = poly.n_sides
    probe = np.linspace(0.0, 1.0, 2049)
    reports = []
    for _ in range(trials):
        for _attempt in range(max_redraws):
            f = int(rng.integers(n))
            # vertices f and f+1 lie on side f
            off = [k for k in range(n) if k not in (f, (f + 1) % n)]
            v_idx = off[int(rng.integers(len(off)))]
            V = poly.vertices[v_idx]
            face = poly.faces[f]
            b = face.origin + rng.uniform(0.0, 1.0) * face.length * face.unit_tangent
            ends = [reflect_point(poly.faces[j], b) for j in poly.faces_at_vertex(v_idx)]
            starts = []
            for end in ends:
                ok = np.flatnonzero(resolved_mask(sol, V + probe[:, None] * (end - V)))
                starts.append(None if len(ok) == 0 or ok[0] >= len(probe) - 2 else probe[ok[0]])
            if all(t0 is not None for t0 in starts):
                break
            logger.info("redrawing monotonicity segment from vertex %d: image stays next to the boundary", v_idx)
        else:
            raise RuntimeError("could not draw a resolvable monotonicity segment")
        for end, t0 in zip(ends, starts):
            t = np.linspace(t0, 1.0, n_samples)[:, None]
            vals = np.asarray(eval_u(sol, V + t * (end - V)), dtype=float)
            if reverse:
                vals = vals[::-1]
            reports.append(MonotonicityReport((V.copy(), end), vals, float(np.diff(vals).min()), float(t0)))
    return reports


def convergence_study(
    poly: ConvexPolygon,
    panel_counts,
    grading: float = 3.0,
    include_match: bool = True,
    grid_resolution: int = 256,
    samples_per_arc: int = 128,
    radii=(2.0, 5.0),
) -> list[dict]:
    """Robin constant, mass and exterior-match errors per panels-per-side value.

    `radii` are in units of the polygon diameter.
    """
    counts = list(panel_counts)
    if len(counts) < 2:
        raise ValueError("need at least two panel counts")
    from .pipeline import run_pipeline

    rows = []
    prev = None
    for m in counts:
        sol = solve_equilibrium(build_mesh(poly, m, grading))
        row = {
            "panels_per_side": m,
            "robin_constant": sol.robin_constant,
            "equilibrium_mass_error": abs(float(sol.weights.sum()) - 1.0),
            "robin_change": None if prev is None else abs(sol.robin_constant - prev),
        }
        if include_match:
            cfg = RunConfig(
                vertices=tuple(map(tuple, poly.vertices.tolist())),
                panels_per_side=m,
                grading=grading,
                grid_resolution=grid_resolution,
                samples_per_arc=samples_per_arc,
            )
            res = run_pipeline(cfg, poly)
            rep = match_exterior(res.solution, res.measure, [r * poly.diameter for r in radii])
            row["measure_mass_error"] = rep.mass_error
            row["match_error"] = rep.sup_error
        rows.append(row)
        prev = sol.robin_constant
    return rows


@dataclass
class VerificationReport:
    match: MatchReport
    convexity: list[ConvexityReport]
    monotonicity: list[MonotonicityReport]
    connectivity: dict
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": self.checks,
            "match": self.match.as_dict(),
            "convexity": [c.as_dict() for c in self.convexity],
            "monotonicity": {
                "segments": len(self.monotonicity),
                "min_increment": min(m.min_increment for m in self.monotonicity),
                "max_start_value": max(abs(float(m.values[0])) for m in self.monotonicity),
            },
            "connectivity": self.connectivity,
        }


def verify_result(result, cfg: RunConfig) -> VerificationReport:
    """Run every check on a pipeline result; thresholds come from cfg.tolerances."""
    tol = cfg.tolerances
    poly = result.polygon
    mu = result.measure
    if cfg.perturb:
        k = np.arange(len(result.skeleton.arcs))
        mu = mu.scaled_arcs(1.0 + cfg.perturb * np.where(k % 2 == 0, 1.0, -1.0))
    match = match_exterior(
        result.solution, mu, [r * poly.diameter for r in cfg.radii], cfg.points_per_circle, cfg.k_max
    )
    conv = [trace_level_curve(result.solution, c, cfg.level_rays) for c in cfg.levels]
    mono = check_ray_monotonicity(result.solution, poly, cfg.monotonicity_trials, cfg.seed)
    conn = result.connectivity
    n = poly.n_sides
    checks = {
        "exterior_match": match.sup_error < tol.match_sup,
        "moments": max(match.moment_errors) < tol.moment,
        "mass": match.mass_error < tol.mass,
        "positivity": bool(np.all(mu.density > 0)),
        "level_convexity": all(c.min_cross_product >= tol.convexity for c in conv),
        "ray_monotonicity": all(m.min_increment > tol.monotonicity for m in mono),
        "regions": conn.n_regions == n and all(conn.touches_own_face.values()),
        "complement_connected": conn.complement_connected,
    }
    return VerificationReport(match, conv, mono, conn.as_dict(), checks)
