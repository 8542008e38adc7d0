"""Planar geometry: convex polygons, their side lines and the mirror maps across them.

Points are plain float arrays with a trailing axis of length 2, so every
function here accepts a single point or a stack of points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DegenerateAngle, DuplicateVertex, InvalidPolygon, NonConvex

DEFAULT_MIN_ANGLE_DEG = 5.0
BOUNDARY_BAND = 1e-12  # relative to diameter


class Location(str, Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    EXTERIOR = "exterior"


@dataclass(frozen=True)
class FaceLine:
    origin: np.ndarray
    unit_tangent: np.ndarray
    unit_inward_normal: np.ndarray
    length: float

    @property
    def end(self) -> np.ndarray:
        return self.origin + self.length * self.unit_tangent

    @property
    def reflection_matrix(self) -> np.ndarray:
        """Linear part of the mirror map, I - 2 n n^T (symmetric, orthogonal)."""
        n = self.unit_inward_normal
        return np.eye(2) - 2.0 * np.outer(n, n)

    def signed_distance(self, p) -> np.ndarray:
        """Distance to the side line, positive on the polygon side."""
        p = np.asarray(p, dtype=float)
        return (p - self.origin) @ self.unit_inward_normal


@dataclass(frozen=True)
class ConvexPolygon:
    vertices: np.ndarray  # (N, 2), counterclockwise
    faces: tuple[FaceLine, ...]

    @property
    def n_sides(self) -> int:
        return len(self.faces)

    @property
    def centroid(self) -> np.ndarray:
        """Area centroid."""
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        cross = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        area = cross.sum() / 2.0
        return ((v + w) * cross[:, None]).sum(axis=0) / (6.0 * area)

    @property
    def area(self) -> float:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        return float((v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]).sum() / 2.0)

    @property
    def diameter(self) -> float:
        d = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.sqrt((d**2).sum(-1)).max())

    @property
    def interior_angles(self) -> np.ndarray:
        v = self.vertices
        prev = np.roll(v, 1, axis=0) - v
        nxt = np.roll(v, -1, axis=0) - v
        cosang = (prev * nxt).sum(1) / np.linalg.norm(prev, axis=1) / np.linalg.norm(nxt, axis=1)
        return np.arccos(np.clip(cosang, -1.0, 1.0))

    def faces_at_vertex(self, k: int) -> tuple[int, int]:
        """Indices of the two sides meeting at vertex k (incoming, outgoing)."""
        return ((k - 1) % self.n_sides, k)

    def bounding_box(self) -> tuple[float, float, float, float]:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def to_list(self) -> list[list[float]]:
        return self.vertices.tolist()


def _face(a: np.ndarray, b: np.ndarray) -> FaceLine:
    d = b - a
    length = float(np.hypot(d[0], d[1]))
    t = d / length
    # inward normal of a counterclockwise loop is the tangent turned left
    n = np.array([-t[1], t[0]])
    return FaceLine(origin=a.copy(), unit_tangent=t, unit_inward_normal=n, length=length)


def validate_polygon(
    vertices: Sequence[Sequence[float]] | np.ndarray,
    min_angle_deg: float = DEFAULT_MIN_ANGLE_DEG,
) -> ConvexPolygon:
    """Build a strictly convex polygon from a vertex loop.

    Clockwise input is reversed to counterclockwise. Raises NonConvex,
    DegenerateAngle or DuplicateVertex naming the offending vertex index.
    """
    v = np.array(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2:
        raise InvalidPolygon("vertices must be a list of (x, y) pairs")
    if len(v) < 3:
        raise InvalidPolygon(f"need at least 3 vertices, got {len(v)}")
    if not np.all(np.isfinite(v)):
        bad = int(np.argwhere(~np.isfinite(v))[0, 0])
        raise InvalidPolygon(f"vertex {bad} has a non-finite coordinate", index=bad)

    d = v[:, None, :] - v[None, :, :]
    dist = np.sqrt((d**2).sum(-1))
    diam = dist.max()
    if diam == 0.0:
        raise DuplicateVertex("all vertices coincide", index=1)
    np.fill_diagonal(dist, np.inf)
    close = np.argwhere(dist <= 1e-12 * diam)
    if len(close):
        i, j = sorted(close[0])
        raise DuplicateVertex(f"vertex {j} repeats vertex {i}", index=int(j))

    w = np.roll(v, -1, axis=0)
    area2 = float((v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]).sum())
    if abs(area2) <= 1e-12 * diam**2:
        far = int(np.argmax(np.where(np.isfinite(dist[0]), dist[0], 0.0)))
        u = (v[far] - v[0]) / diam
        off = np.abs((v[:, 0] - v[0, 0]) * u[1] - (v[:, 1] - v[0, 1]) * u[0])
        if off.max() <= 1e-12 * diam:
            raise DegenerateAngle("vertices are collinear (zero area)", index=0)
        raise NonConvex("vertex loop has zero signed area (self-intersecting)", index=0)
    if area2 < 0:
        v = v[::-1].copy()

    e = np.roll(v, -1, axis=0) - v  # edge k: vertex k -> k+1
    e_prev = np.roll(e, 1, axis=0)
    cross = e_prev[:, 0] * e[:, 1] - e_prev[:, 1] * e[:, 0]
    norms = np.linalg.norm(e, axis=1)
    sin_turn = cross / (norms * np.roll(norms, 1))
    if np.any(sin_turn <= 0):
        k = int(np.argmax(sin_turn <= 0))
        raise NonConvex(f"polygon is not strictly convex at vertex {k}", index=k)
    turning = np.arctan2(cross, (e_prev * e).sum(1))
    if not math.isclose(turning.sum(), 2 * math.pi, rel_tol=1e-9):
        raise NonConvex("vertex loop winds more than once (self-intersecting)", index=0)

    interior = math.pi - turning
    k = int(np.argmin(interior))
    if math.degrees(interior[k]) < min_angle_deg:
        raise DegenerateAngle(
            f"interior angle {math.degrees(interior[k]):.3g} deg at vertex {k} "
            f"is below the {min_angle_deg:g} deg minimum",
            index=k,
        )

    faces = tuple(_face(v[k], v[(k + 1) % len(v)]) for k in range(len(v)))
    return ConvexPolygon(vertices=v, faces=faces)


def reflect_point(face: FaceLine, p) -> np.ndarray:
    """Mirror image of p across the line through `face`."""
    p = np.asarray(p, dtype=float)
    n = face.unit_inward_normal
    d = (p - face.origin) @ n
    return p - 2.0 * d[..., None] * n


def signed_distances(poly: ConvexPolygon, p) -> np.ndarray:
    """(..., N) distances to every side line, positive inside."""
    p = np.asarray(p, dtype=float)
    origins = np.array([f.origin for f in poly.faces])
    normals = np.array([f.unit_inward_normal for f in poly.faces])
    return np.einsum("...k,nk->...n", p, normals) - (origins * normals).sum(1)


def contains(poly: ConvexPolygon, p) -> Location:
    """Classify a single point against the polygon with a 1e-12*diameter boundary band."""
    dmin = float(signed_distances(poly, p).min())
    band = BOUNDARY_BAND * poly.diameter
    if dmin > band:
        return Location.INTERIOR
    if dmin >= -band:
        return Location.BOUNDARY
    return Location.EXTERIOR


def classify(poly: ConvexPolygon, p) -> np.ndarray:
    """Vectorized `contains`: +1 interior, 0 boundary, -1 exterior."""
    dmin = signed_distances(poly, p).min(axis=-1)
    band = BOUNDARY_BAND * poly.diameter
    return np.where(dmin > band, 1, np.where(dmin >= -band, 0, -1))


def distance_to_boundary(poly: ConvexPolygon, p) -> np.ndarray:
    """Euclidean distance from p to the polygon boundary (vectorized)."""
    p = np.asarray(p, dtype=float)
    best = np.full(p.shape[:-1], np.inf)
    for f in poly.faces:
        rel = p - f.origin
        t = np.clip(rel @ f.unit_tangent, 0.0, f.length)
        q = f.origin + t[..., None] * f.unit_tangent
        best = np.minimum(best, np.linalg.norm(p - q, axis=-1))
    return best


def regular_polygon(n: int, radius: float = 1.0, center=(0.0, 0.0), phase: float = 0.0) -> np.ndarray:
    """Vertices of a regular n-gon inscribed in a circle."""
    ang = phase + 2 * np.pi * np.arange(n) / n
    return np.column_stack([center[0] + radius * np.cos(ang), center[1] + radius * np.sin(ang)])


EQUILATERAL = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def random_convex_polygon(
    n: int,
    rng: np.random.Generator,
    min_angle_deg: float = 15.0,
    max_angle_deg: float = 170.0,
    min_side_frac: float = 0.05,
    max_tries: int = 10_000,
) -> ConvexPolygon:
    """Random convex n-gon with vertices on the unit circle, resampled until its angles are in range.

    Points on a circle sorted by angle are already in convex position, so only
    the filters can reject a draw. Sides shorter than `min_side_frac` times the
    diameter are rejected too: their label regions are thinner than a grid cell.
    """
    for _ in range(max_tries):
        ang = np.sort(rng.uniform(0.0, 2 * np.pi, n))
        verts = np.column_stack([np.cos(ang), np.sin(ang)])
        try:
            poly = validate_polygon(verts, min_angle_deg)
        except InvalidPolygon:
            continue
        sides = np.array([f.length for f in poly.faces])
        if np.degrees(poly.interior_angles).max() <= max_angle_deg and sides.min() >= min_side_frac * poly.diameter:
            return poly
    raise RuntimeError(f"no admissible {n}-gon after {max_tries} draws")
