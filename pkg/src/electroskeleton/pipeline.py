"""End-to-end construction: polygon -> equilibrium -> reflected fields -> ridges -> measure."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .config import RunConfig
from .equilibrium import EquilibriumSolution, build_mesh, solve_equilibrium
from .geom2d import ConvexPolygon, validate_polygon
from .reflections import ReflectedFieldSet
from .riesz import RieszMeasure, assemble_measure
from .skeleton import ConnectivityReport, LabelGrid, Skeleton, connectivity_report, extract_ridges, label_grid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineResult:
    polygon: ConvexPolygon
    solution: EquilibriumSolution
    fields: ReflectedFieldSet
    grid: LabelGrid
    skeleton: Skeleton
    measure: RieszMeasure
    connectivity: ConnectivityReport


def run_pipeline(cfg: RunConfig, polygon: ConvexPolygon | None = None) -> PipelineResult:
    poly = polygon if polygon is not None else validate_polygon(cfg.vertices, cfg.min_angle_deg)
    sol = solve_equilibrium(build_mesh(poly, cfg.panels_per_side, cfg.grading))
    logger.info("robin constant %.10f (%d panels)", sol.robin_constant, len(sol.mesh))
    fields = ReflectedFieldSet(poly, sol)
    grid = label_grid(fields, cfg.grid_resolution)
    skel = extract_ridges(fields, grid, cfg.tolerances.tie)
    logger.info("skeleton: %d arcs, %d junctions", len(skel.arcs), len(skel.junctions))
    measure = assemble_measure(fields, skel, cfg.samples_per_arc)
    conn = connectivity_report(fields, grid, skel)
    return PipelineResult(poly, sol, fields, grid, skel, measure, conn)
