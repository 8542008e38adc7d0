"""Reflected continuations u_j = -u o l_j of the Green function into the polygon."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equilibrium import EquilibriumSolution, eval_grad_u, eval_u
from .errors import OutsideDomain
from .geom2d import ConvexPolygon, classify, reflect_point


@dataclass(frozen=True)
class ReflectedFieldSet:
    polygon: ConvexPolygon
    solution: EquilibriumSolution

    def __post_init__(self):
        if self.solution.polygon is not self.polygon and not np.array_equal(
            self.solution.polygon.vertices, self.polygon.vertices
        ):
            raise ValueError("solution was computed for a different polygon")

    @property
    def count(self) -> int:
        return self.polygon.n_sides

    def reflected_points(self, x, faces=None) -> np.ndarray:
        """(..., k, 2) images of x across the selected sides (all by default)."""
        faces = range(self.count) if faces is None else faces
        x = np.asarray(x, dtype=float)
        return np.stack([reflect_point(self.polygon.faces[j], x) for j in faces], axis=-2)

    def values(self, x, faces=None) -> np.ndarray:
        """(..., k) field values u_j(x); no domain check."""
        return -eval_u_array(self.solution, self.reflected_points(x, faces))

    def pair_values(self, x, i, j) -> tuple[np.ndarray, np.ndarray]:
        """u_i(x_k), u_j(x_k) with per-point face indices (vectorized over k)."""
        x = np.asarray(x, dtype=float)
        faces = self.polygon.faces
        i = np.broadcast_to(i, x.shape[:-1])
        j = np.broadcast_to(j, x.shape[:-1])
        ri = _reflect_many(faces, x, i)
        rj = _reflect_many(faces, x, j)
        both = eval_u_array(self.solution, np.stack([ri, rj]))
        return -both[0], -both[1]

    def gradients(self, x, faces=None, standoff: float | None = None) -> np.ndarray:
        """(..., k, 2) gradients of u_j at x, chained through the mirror maps."""
        faces = list(range(self.count)) if faces is None else list(faces)
        x = np.asarray(x, dtype=float)
        out = []
        for j in faces:
            face = self.polygon.faces[j]
            g = eval_grad_u(self.solution, reflect_point(face, x), standoff=standoff)
            # d/dx [-u(Rx + c)] = -R^T grad u, and R is symmetric
            out.append(-(g @ face.reflection_matrix))
        return np.stack(out, axis=-2)


def _reflect_many(faces, x, idx) -> np.ndarray:
    n = np.array([f.unit_inward_normal for f in faces])[idx]
    o = np.array([f.origin for f in faces])[idx]
    d = ((x - o) * n).sum(-1)
    return x - 2.0 * d[..., None] * n


def eval_u_array(sol: EquilibriumSolution, z) -> np.ndarray:
    return np.asarray(eval_u(sol, z), dtype=float).reshape(np.shape(z)[:-1])


def _require_interior(fields: ReflectedFieldSet, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(classify(fields.polygon, x) != 1):
        raise OutsideDomain(f"point(s) not in the polygon interior: {x.tolist()}")
    return x


def u_j(fields: ReflectedFieldSet, j: int, x) -> np.ndarray | float:
    """Harmonic continuation of u across side j, evaluated at interior x."""
    x = _require_interior(fields, x)
    val = fields.values(x, [j])[..., 0]
    return float(val) if val.ndim == 0 else val


def w_value(fields: ReflectedFieldSet, x) -> np.ndarray | float:
    """u outside the polygon (and on its boundary), max_j u_j inside."""
    x = np.asarray(x, dtype=float)
    inside = classify(fields.polygon, x) == 1
    out = np.asarray(eval_u(fields.solution, x), dtype=float).reshape(x.shape[:-1]).copy()
    if np.any(inside):
        out[inside] = fields.values(x[inside]).max(axis=-1)
    return float(out) if out.ndim == 0 else out


def label_from_values(vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Argmax (smallest index on ties) and gap to the runner-up along the last axis."""
    idx = np.argmax(vals, axis=-1)
    part = np.sort(vals, axis=-1)
    return idx, part[..., -1] - part[..., -2]


def argmax_label(fields: ReflectedFieldSet, x) -> tuple[int, float] | tuple[np.ndarray, np.ndarray]:
    """Index of the dominant reflected field and its margin over the second largest."""
    x = _require_interior(fields, x)
    idx, margin = label_from_values(fields.values(x))
    if idx.ndim == 0:
        return int(idx), float(margin)
    return idx, margin
