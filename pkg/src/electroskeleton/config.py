"""Run configuration and the single home of every pass/fail tolerance."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace


@dataclass(frozen=True)
class Tolerances:
    match_sup: float = 5e-3  # sup |U^mu - U^nu| on the test circles
    moment: float = 5e-3  # |m_k(mu) - m_k(nu)|, k <= k_max
    mass: float = 5e-3  # |mu(K) - 1|
    perturbed_min_error: float = 1e-2  # negative control must exceed this
    convexity: float = -1e-6  # min normalized cross product of a level curve
    monotonicity: float = -1e-8  # min increment of u along reflected segments
    boundary_value: float = 2e-2  # |u| at segment starts on the boundary
    tie: float = 1e-10  # field-value bisection tolerance for ridge points

    def override(self, **kw) -> "Tolerances":
        known = {f.name for f in fields(self)}
        bad = set(kw) - known
        if bad:
            raise ValueError(f"unknown tolerance(s): {', '.join(sorted(bad))}")
        return replace(self, **kw)


@dataclass(frozen=True)
class RunConfig:
    vertices: tuple[tuple[float, float], ...] = ()
    panels_per_side: int = 64
    grading: float = 3.0
    grid_resolution: int = 512
    samples_per_arc: int = 256
    min_angle_deg: float = 5.0
    levels: tuple[float, ...] = (0.05, 0.3, 1.0)
    radii: tuple[float, ...] = (2.0, 5.0)  # in units of the polygon diameter
    points_per_circle: int = 128
    k_max: int = 6
    level_rays: int = 256
    monotonicity_trials: int = 30
    seed: int = 0
    perturb: float = 0.0  # +/- relative arc-mass perturbation (negative control)
    tolerances: Tolerances = field(default_factory=Tolerances)
    output_path: str | None = None

    def __post_init__(self):
        for name in ("panels_per_side", "grid_resolution", "samples_per_arc", "points_per_circle",
                     "level_rays", "monotonicity_trials"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("output_path")
        d["vertices"] = [list(v) for v in self.vertices]
        d["levels"] = list(self.levels)
        d["radii"] = list(self.radii)
        return d
