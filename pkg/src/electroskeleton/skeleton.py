"""Ridge set of the subharmonic max: where the two largest reflected fields tie.

Pipeline: label a uniform grid by the dominant field, bisect every grid edge
whose end labels differ, Newton-refine triple points, then chain crossings of
each field pair into polylines that run from a junction to a vertex (or
between two junctions). Near a vertex the grid cannot resolve the thin wedge,
so the ridge is followed by angular bisection on shrinking circles down to
1e-3*diameter and then joined to the vertex by a straight segment.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .errors import ChainingFailure
from .geom2d import ConvexPolygon, classify
from .reflections import ReflectedFieldSet, label_from_values

logger = logging.getLogger(__name__)

TIE_TOL = 1e-10
NEWTON_TOL = 1e-12
VERTEX_TRUNCATION = 1e-3  # relative to diameter
EXTERIOR = -1


@dataclass(frozen=True)
class LabelGrid:
    x0: float  # lower-left corner of the grid
    y0: float
    h: float  # square cell size
    labels: np.ndarray  # (ny, nx); EXTERIOR outside the polygon
    margins: np.ndarray  # (ny, nx); nan outside
    values: np.ndarray  # (ny, nx, N); nan outside
    resolution: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def centers(self) -> np.ndarray:
        ny, nx = self.shape
        xs = self.x0 + (np.arange(nx) + 0.5) * self.h
        ys = self.y0 + (np.arange(ny) + 0.5) * self.h
        X, Y = np.meshgrid(xs, ys)
        return np.stack([X, Y], axis=-1)

    def cell_of(self, p) -> tuple[np.ndarray, np.ndarray]:
        p = np.asarray(p, dtype=float)
        col = np.floor((p[..., 0] - self.x0) / self.h).astype(int)
        row = np.floor((p[..., 1] - self.y0) / self.h).astype(int)
        return row, col


@dataclass(frozen=True)
class RidgeArc:
    pair: tuple[int, int]
    points: np.ndarray  # (K, 2), ordered junction -> vertex when applicable
    endpoint_kinds: tuple[str, str]  # each "vertex" or "junction"
    endpoint_refs: tuple[int, int]  # vertex index or junction index per end

    @property
    def length(self) -> float:
        return float(np.linalg.norm(np.diff(self.points, axis=0), axis=1).sum())


@dataclass(frozen=True)
class Junction:
    location: np.ndarray
    incident_pairs: frozenset = field(default_factory=frozenset)


@dataclass(frozen=True)
class Skeleton:
    arcs: tuple[RidgeArc, ...]
    junctions: tuple[Junction, ...]
    cell: float  # grid spacing the skeleton was extracted at
    tol: float

    def points(self) -> np.ndarray:
        return np.vstack([a.points for a in self.arcs]) if self.arcs else np.zeros((0, 2))

    def arcs_for_pair(self, pair) -> list[RidgeArc]:
        pair = tuple(sorted(pair))
        return [a for a in self.arcs if a.pair == pair]


def label_grid(fields: ReflectedFieldSet, resolution: int = 512) -> LabelGrid:
    """Dominant-field label and tie margin at the centre of every cell inside the polygon.

    Cells are square; `resolution` counts cells along the longer side of the bounding box.
    """
    if resolution < 64:
        raise ValueError("resolution must be at least 64")
    xmin, ymin, xmax, ymax = fields.polygon.bounding_box()
    w, hgt = xmax - xmin, ymax - ymin
    h = max(w, hgt) / resolution
    nx = max(1, math.ceil(w / h - 1e-9))
    ny = max(1, math.ceil(hgt / h - 1e-9))
    x0 = xmin - 0.5 * (nx * h - w)
    y0 = ymin - 0.5 * (ny * h - hgt)
    grid = LabelGrid(x0, y0, h, np.empty((ny, nx), int), np.empty((ny, nx)), np.empty(0), resolution)
    C = grid.centers()
    inside = classify(fields.polygon, C) == 1
    n = fields.count
    values = np.full((ny, nx, n), np.nan)
    values[inside] = fields.values(C[inside])
    labels = np.full((ny, nx), EXTERIOR)
    margins = np.full((ny, nx), np.nan)
    idx, margin = label_from_values(values[inside])
    labels[inside] = idx
    margins[inside] = margin
    return LabelGrid(x0, y0, h, labels, margins, values, resolution)


def _bisect_pairs(fields, p0, p1, ia, ib, iters):
    """Vectorized bisection of u_a - u_b on segments p0 -> p1 (positive at p0)."""
    lo = np.zeros(len(p0))
    hi = np.ones(len(p0))
    d = p1 - p0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        ua, ub = fields.pair_values(p0 + mid[:, None] * d, ia, ib)
        pos = ua - ub > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    return p0 + (0.5 * (lo + hi))[:, None] * d


def _in_ridge(fields, pts, ia, ib, tol):
    """Mask of points where u_a, u_b tie and dominate every other field (to tol)."""
    vals = fields.values(pts)
    rows = np.arange(len(pts))
    ua, ub = vals[rows, ia], vals[rows, ib]
    return (np.abs(ua - ub) < tol) & (vals.max(axis=1) - np.maximum(ua, ub) <= tol)


def grid_crossings(fields: ReflectedFieldSet, grid: LabelGrid, tol: float = TIE_TOL):
    """Tie points on grid edges with differing labels: (points, pairs) with pairs sorted."""
    L = grid.labels
    C = grid.centers()
    chunks = []
    for a_sl, b_sl in (
        ((slice(None), slice(None, -1)), (slice(None), slice(1, None))),
        ((slice(None, -1), slice(None)), (slice(1, None), slice(None))),
    ):
        la, lb = L[a_sl], L[b_sl]
        m = (la >= 0) & (lb >= 0) & (la != lb)
        chunks.append((C[a_sl][m], C[b_sl][m], la[m], lb[m]))
    p0 = np.vstack([c[0] for c in chunks])
    p1 = np.vstack([c[1] for c in chunks])
    ia = np.concatenate([c[2] for c in chunks])
    ib = np.concatenate([c[3] for c in chunks])
    if len(p0) == 0:
        return np.zeros((0, 2)), np.zeros((0, 2), int)
    iters = int(math.ceil(math.log2(grid.h / (1e-14 * max(grid.h * grid.resolution, 1.0))))) + 2
    pts = _bisect_pairs(fields, p0, p1, ia, ib, iters)
    keep = _in_ridge(fields, pts, ia, ib, tol)
    pairs = np.sort(np.column_stack([ia, ib]), axis=1)
    return pts[keep], pairs[keep]


def _junction_candidates(grid: LabelGrid):
    L = grid.labels
    block = np.stack([L[:-1, :-1], L[:-1, 1:], L[1:, :-1], L[1:, 1:]], axis=-1)
    s = np.sort(block, axis=-1)
    valid = s >= 0
    new = np.concatenate([valid[..., :1], (np.diff(s, axis=-1) != 0) & valid[..., 1:]], axis=-1)
    distinct = new.sum(-1)
    # block centres coincide with cell corners
    rows, cols = np.nonzero(distinct >= 3)
    xy = np.column_stack([grid.x0 + (cols + 1) * grid.h, grid.y0 + (rows + 1) * grid.h])
    return xy


def refine_junction(fields: ReflectedFieldSet, x0, triple, tol: float = NEWTON_TOL, max_iter: int = 40):
    """Newton on (u_a - u_b, u_a - u_c) = 0. Returns the point or None on failure."""
    x = np.array(x0, dtype=float)
    scale = max(1.0, fields.polygon.diameter)
    for _ in range(max_iter):
        v = fields.values(x, triple)
        try:
            g = fields.gradients(x, triple)
        except Exception:
            return None
        F = np.array([v[0] - v[1], v[0] - v[2]])
        J = np.array([g[0] - g[1], g[0] - g[2]])
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return None
        step = np.linalg.norm(dx)
        if step > 0.1 * scale:
            dx *= 0.1 * scale / step
        x = x + dx
        if classify(fields.polygon, x) != 1:
            return None
        if step < tol * scale:
            return x
    return None


def find_junctions(fields: ReflectedFieldSet, grid: LabelGrid, tol: float = TIE_TOL) -> list[np.ndarray]:
    cands = _junction_candidates(grid)
    found: list[np.ndarray] = []
    diam = fields.polygon.diameter
    for c in cands:
        if any(np.linalg.norm(c - j) < 2 * grid.h for j in found):
            continue
        vals = fields.values(c)
        triple = list(np.argsort(vals)[::-1][:3])
        x = refine_junction(fields, c, triple)
        if x is None or np.linalg.norm(x - c) > 3 * grid.h:
            logger.debug("junction candidate at %s did not converge", c)
            continue
        v = fields.values(x)
        if v.max() - v[triple].min() > tol * 10:
            continue
        if all(np.linalg.norm(x - j) > 1e-6 * diam for j in found):
            found.append(x)
    return found


def _order_chain(pts: np.ndarray, gap: float) -> np.ndarray:
    """Nearest-neighbour walk from one extremity of a connected cluster of points."""
    D = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    start = int(np.argmax(D[0]))
    start = int(np.argmax(D[start])) if len(pts) > 2 else start
    start = int(np.argmax(D[start]))
    n = len(pts)
    visited = np.zeros(n, bool)
    order = [start]
    visited[start] = True
    cur = start
    for _ in range(n - 1):
        d = np.where(visited, np.inf, D[cur])
        nxt = int(np.argmin(d))
        if d[nxt] > gap:
            # stragglers beside the chain (duplicate crossings) are absorbed, real gaps are not
            rest = np.nonzero(~visited)[0]
            near = D[np.ix_(rest, order)].min(axis=1)
            if np.all(near <= gap):
                break
            raise ChainingFailure(
                f"gap of {d[nxt]:.3g} (> {gap:.3g}) while chaining ridge points; raise the grid resolution"
            )
        order.append(nxt)
        visited[nxt] = True
        cur = nxt
    return pts[order]


def _components(pts: np.ndarray, radius: float) -> list[np.ndarray]:
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    tree = cKDTree(pts)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    n = len(pts)
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    k, lab = connected_components(g, directed=False)
    return [np.nonzero(lab == c)[0] for c in range(k)]


def _dedupe(pts: np.ndarray, eps: float) -> np.ndarray:
    if len(pts) < 2:
        return pts
    tree = cKDTree(pts)
    drop = set()
    for i, j in tree.query_pairs(eps):
        drop.add(max(i, j))
    keep = [k for k in range(len(pts)) if k not in drop]
    return pts[keep]


def _vertex_of_pair(poly: ConvexPolygon, pair) -> int | None:
    a, b = pair
    n = poly.n_sides
    if (a + 1) % n == b:
        return b
    if (b + 1) % n == a:
        return a
    return None


def trace_to_vertex(fields: ReflectedFieldSet, pair, vertex: int, r_start: float, r_stop: float) -> np.ndarray:
    """Tie points of `pair` on circles about `vertex` with radii shrinking from r_start to r_stop."""
    poly = fields.polygon
    v = poly.vertices[vertex]
    f_in, f_out = poly.faces_at_vertex(vertex)
    dir_out = poly.faces[f_out].unit_tangent
    dir_in = -poly.faces[f_in].unit_tangent
    phi_out = math.atan2(dir_out[1], dir_out[0])
    phi_in = math.atan2(dir_in[1], dir_in[0])
    # counterclockwise from the outgoing side to the incoming side sweeps the interior angle
    span = (phi_in - phi_out) % (2 * math.pi)
    if r_start <= r_stop:
        return np.zeros((0, 2))
    n = max(2, int(math.ceil(math.log(r_stop / r_start) / math.log(0.85))) + 1)
    radii = r_start * (r_stop / r_start) ** (np.arange(1, n) / (n - 1))
    a, b = pair
    # u_a - u_b has opposite signs on the two sides of the wedge
    lo = np.full(len(radii), 1e-9 * span)
    hi = np.full(len(radii), span * (1 - 1e-9))

    def pts_at(t):
        ang = phi_out + t
        return v + radii[:, None] * np.column_stack([np.cos(ang), np.sin(ang)])

    ua, ub = fields.pair_values(pts_at(lo), a, b)
    sign_lo = np.sign(ua - ub)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        ua, ub = fields.pair_values(pts_at(mid), a, b)
        same = np.sign(ua - ub) == sign_lo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return pts_at(0.5 * (lo + hi))


def extract_ridges(fields: ReflectedFieldSet, grid: LabelGrid, tol: float = TIE_TOL) -> Skeleton:
    """Chain grid tie points into ridge arcs and junctions."""
    poly = fields.polygon
    diam = poly.diameter
    h = grid.h
    gap = 2.0 * h
    pts, pairs = grid_crossings(fields, grid, tol)
    junctions = find_junctions(fields, grid, tol)
    r_trunc = VERTEX_TRUNCATION * diam

    arcs: list[RidgeArc] = []
    for pair in sorted({tuple(p) for p in pairs.tolist()}):
        sel = pts[(pairs[:, 0] == pair[0]) & (pairs[:, 1] == pair[1])]
        vtx = _vertex_of_pair(poly, pair)
        if vtx is not None:
            # the last few cells at a sharp tip straddle the boundary and leave isolated
            # crossings; the tip is traced on circles instead
            sel = sel[np.linalg.norm(sel - poly.vertices[vtx], axis=1) > max(r_trunc, 4.0 * h)]
        sel = _dedupe(sel, 1e-9 * h)
        if len(sel) == 0:
            continue
        for comp in _components(sel, gap * 1.0001):
            chain = _order_chain(sel[comp], gap * 1.0001)
            arcs.append(_finish_arc(fields, pair, chain, junctions, vtx, h, r_trunc))

    arcs.extend(_short_junction_links(fields, arcs, junctions, h))
    incident: list[set] = [set() for _ in junctions]
    for arc in arcs:
        for kind, ref in zip(arc.endpoint_kinds, arc.endpoint_refs):
            if kind == "junction":
                incident[ref].add(arc.pair)
    junction_objs = tuple(Junction(location=j, incident_pairs=frozenset(s)) for j, s in zip(junctions, incident))
    return Skeleton(arcs=tuple(arcs), junctions=junction_objs, cell=h, tol=tol)


def _finish_arc(fields, pair, chain, junctions, vtx, h, r_trunc) -> RidgeArc:
    poly = fields.polygon
    ends = [chain[0], chain[-1]]
    kinds: list[str | None] = [None, None]
    refs = [-1, -1]
    if junctions:
        J = np.array(junctions)
        for e in range(2):
            d = np.linalg.norm(J - ends[e], axis=1)
            k = int(np.argmin(d))
            if d[k] <= 3.0 * h:
                kinds[e], refs[e] = "junction", k
    if vtx is not None:
        dv = [np.linalg.norm(ends[e] - poly.vertices[vtx]) for e in range(2)]
        e = int(np.argmin(dv))
        if kinds[e] is None:
            kinds[e], refs[e] = "vertex", vtx
    if None in kinds:
        bad = ends[kinds.index(None)]
        raise ChainingFailure(
            f"ridge arc for pair {pair} ends at {bad.tolist()}, away from any vertex or junction; "
            "raise the grid resolution"
        )
    if kinds[0] == "vertex" or (kinds[0] == kinds[1] == "junction" and refs[0] > refs[1]):
        chain = chain[::-1]
        kinds.reverse()
        refs.reverse()
    parts = []
    if kinds[0] == "junction":
        parts.append(junctions[refs[0]][None, :])
    parts.append(chain)
    if kinds[1] == "junction":
        parts.append(junctions[refs[1]][None, :])
    else:
        v = poly.vertices[refs[1]]
        r_end = float(np.linalg.norm(chain[-1] - v))
        tip = trace_to_vertex(fields, pair, refs[1], r_end, r_trunc)
        if len(tip):
            ok = _in_ridge(fields, tip, np.full(len(tip), pair[0]), np.full(len(tip), pair[1]), 1e-8)
            tip = tip[ok]
        parts.append(tip)
        parts.append(v[None, :])
    return RidgeArc(pair=tuple(pair), points=np.vstack(parts), endpoint_kinds=tuple(kinds), endpoint_refs=tuple(refs))


def _short_junction_links(fields, arcs, junctions, h) -> list[RidgeArc]:
    """Straight arcs between nearby junctions whose shared pair left no grid crossings."""
    extra = []
    if len(junctions) < 2:
        return extra
    for p, q in combinations(range(len(junctions)), 2):
        jp, jq = junctions[p], junctions[q]
        if np.linalg.norm(jp - jq) > 3.0 * h:
            continue
        top_p = set(np.nonzero(_near_top(fields, jp))[0].tolist())
        top_q = set(np.nonzero(_near_top(fields, jq))[0].tolist())
        shared = sorted(top_p & top_q)
        if len(shared) != 2:
            continue
        pair = tuple(shared)
        linked = any(
            a.pair == pair and set(a.endpoint_refs) == {p, q} and a.endpoint_kinds == ("junction", "junction")
            for a in arcs
        )
        if not linked:
            extra.append(
                RidgeArc(pair=pair, points=np.vstack([jp, jq]), endpoint_kinds=("junction", "junction"),
                         endpoint_refs=(p, q))
            )
    return extra


def _near_top(fields, x, tol=1e-8):
    v = fields.values(x)
    return v >= v.max() - tol


def rasterize(grid: LabelGrid, skel: Skeleton) -> np.ndarray:
    """Boolean mask of cells touched by any ridge arc (dense sampling, 8-connected traces)."""
    mask = np.zeros(grid.shape, bool)
    step = grid.h / 4.0
    for arc in skel.arcs:
        P = arc.points
        for a, b in zip(P[:-1], P[1:]):
            n = max(2, int(math.ceil(np.linalg.norm(b - a) / step)) + 1)
            t = np.linspace(0.0, 1.0, n)[:, None]
            r, c = grid.cell_of(a + t * (b - a))
            ok = (r >= 0) & (r < grid.shape[0]) & (c >= 0) & (c < grid.shape[1])
            mask[r[ok], c[ok]] = True
    return mask


@dataclass
class ConnectivityReport:
    n_regions: int
    regions_per_label: dict[int, int]
    touches_own_face: dict[int, bool]
    complement_components: int
    n_junctions: int
    n_arcs: int
    tip_cells_ignored: int = 0

    @property
    def complement_connected(self) -> bool:
        return self.complement_components == 1

    def as_dict(self) -> dict:
        return {
            "n_regions": self.n_regions,
            "regions_per_label": {str(k): v for k, v in sorted(self.regions_per_label.items())},
            "touches_own_face": {str(k): v for k, v in sorted(self.touches_own_face.items())},
            "complement_components": self.complement_components,
            "complement_connected": self.complement_connected,
            "n_junctions": self.n_junctions,
            "n_arcs": self.n_arcs,
            "tip_cells_ignored": self.tip_cells_ignored,
        }


_FOUR = ndimage.generate_binary_structure(2, 1)
_EIGHT = ndimage.generate_binary_structure(2, 2)


def tip_mask(poly: ConvexPolygon, grid: LabelGrid, cells: float = 3.0) -> np.ndarray:
    """Cells near a vertex where the wedge is narrower than about 2*`cells` grid cells.

    Cell-centre sampling chops such a wedge into fragments that say nothing
    about the continuum regions, so region counting skips them.
    """
    C = grid.centers()
    mask = np.zeros(grid.shape, bool)
    sides = np.array([f.length for f in poly.faces])
    for k, ang in enumerate(poly.interior_angles):
        r = cells * grid.h / math.sin(0.5 * ang)
        r = min(r, 0.25 * min(sides[k], sides[k - 1]))
        mask |= np.linalg.norm(C - poly.vertices[k], axis=-1) < r
    return mask


def connectivity_report(fields: ReflectedFieldSet, grid: LabelGrid, skel: Skeleton) -> ConnectivityReport:
    """Flood-fill the label regions and the complement of the rasterized ridge set."""
    poly = fields.polygon
    C = grid.centers()
    tips = tip_mask(poly, grid)
    per_label: dict[int, int] = {}
    touches: dict[int, bool] = {}
    total = 0
    for j in range(fields.count):
        # diagonal contacts count: single cells at sharp tips otherwise split off
        comp, k = ndimage.label((grid.labels == j) & ~tips, structure=_EIGHT)
        per_label[j] = k
        total += k
        if k == 0:
            touches[j] = False
            continue
        f = poly.faces[j]
        rel = C - f.origin
        t = np.clip(rel @ f.unit_tangent, 0.0, f.length)
        dist = np.linalg.norm(rel - t[..., None] * f.unit_tangent, axis=-1)
        near = dist <= 1.5 * grid.h
        # every component of label j must reach side j
        touches[j] = all(np.any(near & (comp == c)) for c in range(1, k + 1))

    ridge = rasterize(grid, skel)
    free = np.pad(~ridge, 1, constant_values=True)
    _, n_comp = ndimage.label(free, structure=_FOUR)
    return ConnectivityReport(
        n_regions=total,
        regions_per_label=per_label,
        touches_own_face=touches,
        complement_components=n_comp,
        n_junctions=len(skel.junctions),
        n_arcs=len(skel.arcs),
        tip_cells_ignored=int((tips & (grid.labels != EXTERIOR)).sum()),
    )
