"""Equilibrium measure of a convex polygon by first-kind log-kernel collocation.

The measure is approximated by a piecewise-constant density on a graded
panel mesh of the boundary. Collocation at panel midpoints uses exact
panel integrals of log|z - s|, so self-panels need no special treatment.
The Green function with pole at infinity is then

    u(z) = sum_i density_i * int_{panel_i} log|z - s| ds  -  robin_constant,

which vanishes on the boundary and grows like log|z|.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import NegativeDensity, SingularSystem, TooCloseToBoundary
from .geom2d import ConvexPolygon, distance_to_boundary

logger = logging.getLogger(__name__)

NEGATIVE_DENSITY_TOL = 1e-6
GRADIENT_STANDOFF = 1e-3  # relative to diameter


@dataclass(frozen=True)
class BoundaryMesh:
    a: np.ndarray  # (M, 2) panel start points
    b: np.ndarray  # (M, 2) panel end points
    face_index: np.ndarray  # (M,)
    polygon: ConvexPolygon
    breakpoints: np.ndarray  # (n+1,) grading parameters shared by every side

    @property
    def nodes(self) -> np.ndarray:
        return 0.5 * (self.a + self.b)

    @property
    def lengths(self) -> np.ndarray:
        return np.linalg.norm(self.b - self.a, axis=1)

    def __len__(self) -> int:
        return len(self.a)

    @property
    def panels_per_side(self) -> int:
        return len(self.breakpoints) - 1

    def side_layout(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(origin, tangent, arclength breakpoints) per side, for the compiled kernels."""
        faces = self.polygon.faces
        origin = np.array([f.origin for f in faces])
        tangent = np.array([f.unit_tangent for f in faces])
        pos = np.array([f.length * self.breakpoints for f in faces])
        return origin, tangent, pos


@dataclass(frozen=True)
class EquilibriumSolution:
    mesh: BoundaryMesh
    density: np.ndarray  # per unit arclength
    robin_constant: float

    @property
    def polygon(self) -> ConvexPolygon:
        return self.mesh.polygon

    @property
    def weights(self) -> np.ndarray:
        """Panel masses (density times length)."""
        return self.density * self.mesh.lengths

    @property
    def capacity(self) -> float:
        return float(np.exp(self.robin_constant))

    @cached_property
    def kernel_args(self):
        origin, tangent, pos = self.mesh.side_layout()
        dens = self.density.reshape(self.polygon.n_sides, self.mesh.panels_per_side)
        return origin, tangent, pos, np.ascontiguousarray(dens)


def grading_parameters(n: int, exponent: float) -> np.ndarray:
    """n+1 breakpoints on [0, 1], symmetric, clustering like s**exponent at both ends."""
    s = np.linspace(0.0, 1.0, n + 1)
    left = 0.5 * (2.0 * s) ** exponent
    right = 1.0 - 0.5 * (2.0 * (1.0 - s)) ** exponent
    t = np.where(s <= 0.5, left, right)
    t[0], t[-1] = 0.0, 1.0
    return t


def build_mesh(poly: ConvexPolygon, panels_per_side: int = 64, grading_exponent: float = 3.0) -> BoundaryMesh:
    if panels_per_side < 8:
        raise ValueError("panels_per_side must be at least 8")
    if grading_exponent < 1:
        raise ValueError("grading_exponent must be >= 1")
    t = grading_parameters(panels_per_side, grading_exponent)
    a, b, idx = [], [], []
    n = poly.n_sides
    for j in range(n):
        p0 = poly.vertices[j]
        p1 = poly.vertices[(j + 1) % n]
        pts = p0 + t[:, None] * (p1 - p0)
        pts[-1] = p1  # exact tiling at the shared vertex
        a.append(pts[:-1])
        b.append(pts[1:])
        idx.append(np.full(panels_per_side, j))
    return BoundaryMesh(
        a=np.vstack(a), b=np.vstack(b), face_index=np.concatenate(idx), polygon=poly, breakpoints=t
    )


def _antiderivative(x, h):
    # d/dx F = 0.5*log(x^2 + h^2), continuous as h -> 0
    r2 = x * x + h * h
    safe = np.where(r2 > 0, r2, 1.0)
    xlog = np.where(r2 > 0, 0.5 * x * np.log(safe), 0.0)
    ah = np.abs(h)
    return xlog - x + ah * np.arctan2(x, ah)


def _local_coords(a, b, z):
    d = b - a
    L = np.sqrt((d**2).sum(-1))
    t = d / L[..., None]
    rel = z - a
    s0 = (rel * t).sum(-1)
    h = rel[..., 1] * t[..., 0] - rel[..., 0] * t[..., 1]  # component along left normal
    return L, t, s0, h


def panel_log_integral(a, b, z) -> np.ndarray:
    """Exact value of the arclength integral of log|z - s| over the segment [a, b].

    Broadcasts over leading axes; finite when z lies on the segment.
    """
    a, b, z = (np.asarray(v, dtype=float) for v in (a, b, z))
    L, _, s0, h = _local_coords(a, b, z)
    return _antiderivative(L - s0, h) - _antiderivative(-s0, h)


def panel_log_gradient(a, b, z) -> np.ndarray:
    """Gradient in z of `panel_log_integral`; (..., 2). Singular on the segment itself."""
    a, b, z = (np.asarray(v, dtype=float) for v in (a, b, z))
    L, t, s0, h = _local_coords(a, b, z)
    x2, x1 = L - s0, -s0
    along = -0.5 * (np.log(x2 * x2 + h * h) - np.log(x1 * x1 + h * h))
    ah = np.abs(h)
    normal = np.sign(h) * (np.arctan2(x2, ah) - np.arctan2(x1, ah))
    n = np.stack([-t[..., 1], t[..., 0]], axis=-1)
    return along[..., None] * t + normal[..., None] * n


def single_layer_matrix(mesh: BoundaryMesh, points: np.ndarray) -> np.ndarray:
    """(P, M) matrix of panel log integrals at the given points."""
    points = np.asarray(points, dtype=float)
    return panel_log_integral(mesh.a[None, :, :], mesh.b[None, :, :], points[:, None, :])


def solve_equilibrium(mesh: BoundaryMesh) -> EquilibriumSolution:
    """Solve the bordered collocation system for the density and the Robin constant.

    Rows: sum_i density_i * I_i(node_k) - gamma = 0 for each node, and the
    mass row sum_i density_i * length_i = 1.
    """
    m = len(mesh)
    A = np.empty((m + 1, m + 1))
    A[:m, :m] = single_layer_matrix(mesh, mesh.nodes)
    A[:m, m] = -1.0
    A[m, :m] = mesh.lengths
    A[m, m] = 0.0
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    try:
        x = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"collocation system is singular: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystem("collocation system produced non-finite values")
    density, gamma = x[:m], float(x[m])
    lowest = float(density.min())
    if lowest < -NEGATIVE_DENSITY_TOL:
        raise NegativeDensity(
            f"density dips to {lowest:.3g}; increase panels_per_side or the grading exponent"
        )
    logger.debug("equilibrium: %d panels, robin constant %.12f", m, gamma)
    return EquilibriumSolution(mesh=mesh, density=density, robin_constant=gamma)


def equilibrium(poly: ConvexPolygon, panels_per_side: int = 64, grading: float = 3.0) -> EquilibriumSolution:
    return solve_equilibrium(build_mesh(poly, panels_per_side, grading))


def log_potential(sol: EquilibriumSolution, z) -> np.ndarray:
    """Logarithmic potential of the discrete equilibrium measure (no Robin offset)."""
    z = np.asarray(z, dtype=float)
    flat = np.ascontiguousarray(z.reshape(-1, 2))
    return _kernels.potential(flat, *sol.kernel_args).reshape(z.shape[:-1])


def eval_u(sol: EquilibriumSolution, z) -> np.ndarray | float:
    """Green function with pole at infinity: zero on the boundary, log|z| + O(1) far away."""
    val = log_potential(sol, z) - sol.robin_constant
    return float(val) if np.ndim(val) == 0 else val


def eval_grad_u(sol: EquilibriumSolution, z, standoff: float | None = None, check: bool = True) -> np.ndarray:
    """Analytic gradient of u; z must stay `standoff` (default 1e-3*diameter) away from the boundary."""
    z = np.asarray(z, dtype=float)
    flat = np.ascontiguousarray(z.reshape(-1, 2))
    if check:
        poly = sol.polygon
        limit = GRADIENT_STANDOFF * poly.diameter if standoff is None else standoff
        dist = distance_to_boundary(poly, flat)
        if np.any(dist <= limit):
            k = int(np.argmin(dist))
            raise TooCloseToBoundary(
                f"point {flat[k].tolist()} is {dist[k]:.3g} from the boundary (standoff {limit:.3g})"
            )
    return _kernels.gradient(flat, *sol.kernel_args).reshape(z.shape)


def resolved_mask(sol: EquilibriumSolution, z, factor: float = 1.0) -> np.ndarray:
    """True where z is farther from the boundary than `factor` local panel lengths.

    Between collocation nodes the piecewise-constant potential carries an error
    of the size of the panel mismatch; it decays within about one panel length.
    Points inside that band cannot resolve increments of u below ~1e-4.
    """
    from scipy.spatial import cKDTree

    z = np.asarray(z, dtype=float)
    flat = z.reshape(-1, 2)
    mesh = sol.mesh
    _, idx = cKDTree(mesh.nodes).query(flat)
    scale = np.maximum(factor * mesh.lengths[idx], GRADIENT_STANDOFF * sol.polygon.diameter)
    return (distance_to_boundary(sol.polygon, flat) > scale).reshape(z.shape[:-1])
