"""Electrostatic skeletons of convex polygons.

The Green function of the exterior is continued into the polygon by
reflection across each side; the maximum of those continuations is
subharmonic and its Riesz measure, carried by the ridge where two of them
tie, reproduces the equilibrium potential outside the polygon.
"""

from .config import RunConfig, Tolerances
from .equilibrium import EquilibriumSolution, build_mesh, eval_grad_u, eval_u, panel_log_integral, solve_equilibrium
from .geom2d import ConvexPolygon, contains, reflect_point, validate_polygon
from .pipeline import PipelineResult, run_pipeline
from .reflections import ReflectedFieldSet, argmax_label, u_j, w_value
from .riesz import RieszMeasure, assemble_measure, complex_moments, potential_of_measure, ridge_density
from .skeleton import Skeleton, connectivity_report, extract_ridges, label_grid

__version__ = "0.1.0"

__all__ = [
    "ConvexPolygon", "EquilibriumSolution", "PipelineResult", "ReflectedFieldSet", "RieszMeasure",
    "RunConfig", "Skeleton", "Tolerances", "argmax_label", "assemble_measure", "build_mesh",
    "complex_moments", "connectivity_report", "contains", "eval_grad_u", "eval_u", "extract_ridges",
    "label_grid", "panel_log_integral", "potential_of_measure", "reflect_point", "ridge_density",
    "run_pipeline", "solve_equilibrium", "u_j", "validate_polygon", "w_value",
]
