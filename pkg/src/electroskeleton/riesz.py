"""Riesz measure of the subharmonic max, carried by the ridge arcs.

Across a ridge where w switches from u_j to u_i the Laplacian of w is a line
density equal to the jump of the normal derivative, |grad(u_i - u_j)|/(2 pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibrium import GRADIENT_STANDOFF, EquilibriumSolution, grading_parameters
from .errors import TooCloseToJunction, TooCloseToVertex
from .geom2d import distance_to_boundary
from .reflections import ReflectedFieldSet
from .skeleton import RidgeArc, Skeleton

ENDPOINT_EXCLUSION = 1e-3  # relative to diameter
_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RieszMeasure:
    points: np.ndarray  # (K, 2)
    weights: np.ndarray  # (K,) masses
    density: np.ndarray  # (K,) mass per unit length
    pair: np.ndarray  # (K, 2) tying faces
    arc_index: np.ndarray  # (K,)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def arc_masses(self) -> np.ndarray:
        return np.bincount(self.arc_index, weights=self.weights)

    def scaled_arcs(self, factors) -> "RieszMeasure":
        """Copy with each arc's mass multiplied by factors[arc] (negative controls)."""
        f = np.asarray(factors, dtype=float)[self.arc_index]
        return RieszMeasure(self.points, self.weights * f, self.density * f, self.pair, self.arc_index)

    def rows(self):
        for p, w, d, pr in zip(self.points, self.weights, self.density, self.pair):
            yield float(p[0]), float(p[1]), float(w), float(d), f"{pr[0]}-{pr[1]}"


def _check_clear(fields: ReflectedFieldSet, skel: Skeleton | None, p, limit: float):
    poly = fields.polygon
    dv = np.linalg.norm(poly.vertices - p, axis=1)
    if dv.min() < limit:
        raise TooCloseToVertex(f"{np.asarray(p).tolist()} is {dv.min():.3g} from a vertex")
    if skel is not None and skel.junctions:
        dj = np.linalg.norm(np.array([j.location for j in skel.junctions]) - p, axis=1)
        if dj.min() < limit:
            raise TooCloseToJunction(f"{np.asarray(p).tolist()} is {dj.min():.3g} from a junction")


def ridge_density(fields: ReflectedFieldSet, p, pair, normal=None, skel: Skeleton | None = None) -> float:
    """Line density (1/2pi)|(grad u_i - grad u_j) . n| at a ridge point.

    With `normal` omitted the tie-curve normal grad(u_i - u_j)/|...| is used.
    """
    p = np.asarray(p, dtype=float)
    _check_clear(fields, skel, p, ENDPOINT_EXCLUSION * fields.polygon.diameter)
    g = fields.gradients(p, list(pair))
    jump = g[0] - g[1]
    if normal is None:
        return float(np.linalg.norm(jump) / _TWO_PI)
    return float(abs(jump @ np.asarray(normal, dtype=float)) / _TWO_PI)


def project_to_ridge(fields: ReflectedFieldSet, pts: np.ndarray, pair, steps: int = 3) -> np.ndarray:
    """Newton steps along grad(u_a - u_b) onto the tie curve."""
    a, b = pair
    x = np.array(pts, dtype=float)
    for _ in range(steps):
        v = fields.values(x, [a, b])
        g = fields.gradients(x, [a, b])
        f = v[..., 0] - v[..., 1]
        gf = g[..., 0, :] - g[..., 1, :]
        x = x - (f / (gf**2).sum(-1))[..., None] * gf
    return x


class _Polyline:
    def __init__(self, pts: np.ndarray):
        self.pts = pts
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        self.s = np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def length(self) -> float:
        return float(self.s[-1])

    def at(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return np.column_stack([np.interp(s, self.s, self.pts[:, 0]), np.interp(s, self.s, self.pts[:, 1])])


def _usable_range(fields: ReflectedFieldSet, arc: RidgeArc, line: _Polyline, skel: Skeleton):
    """Arclength window where densities can be evaluated (endpoint and standoff clearance)."""
    poly = fields.polygon
    diam = poly.diameter
    excl = ENDPOINT_EXCLUSION * diam * 1.02
    standoff = GRADIENT_STANDOFF * diam * 1.05
    s = line.s
    pts = line.pts
    refl = fields.reflected_points(pts, list(arc.pair))
    clear = distance_to_boundary(poly, refl).min(axis=-1)
    ok = clear > standoff
    for kind, ref in zip(arc.endpoint_kinds, arc.endpoint_refs):
        anchor = poly.vertices[ref] if kind == "vertex" else skel.junctions[ref].location
        ok &= np.linalg.norm(pts - anchor, axis=1) > excl
    # contiguous window around the arc's middle
    idx = np.nonzero(ok)[0]
    if len(idx) == 0:
        return None
    lo, hi = s[idx[0]], s[idx[-1]]
    if idx[0] > 0:
        lo = _refine_edge(fields, arc, line, skel, lo, s[idx[0] - 1], excl, standoff)
    if idx[-1] < len(s) - 1:
        hi = _refine_edge(fields, arc, line, skel, hi, s[idx[-1] + 1], excl, standoff)
    return (lo, hi) if hi > lo else None


def _refine_edge(fields, arc, line, skel, s_good, s_bad, excl, standoff):
    """Bisect between a usable and an unusable arclength for the window boundary."""
    poly = fields.polygon
    anchors = [
        poly.vertices[ref] if kind == "vertex" else skel.junctions[ref].location
        for kind, ref in zip(arc.endpoint_kinds, arc.endpoint_refs)
    ]

    def good(sv):
        p = line.at([sv])
        refl = fields.reflected_points(p, list(arc.pair))
        if distance_to_boundary(poly, refl).min() <= standoff:
            return False
        return all(np.linalg.norm(p[0] - q) > excl for q in anchors)

    for _ in range(40):
        mid = 0.5 * (s_good + s_bad)
        if good(mid):
            s_good = mid
        else:
            s_bad = mid
    return s_good


def _vertex_cap(r_cut: float, r: np.ndarray, rho: np.ndarray) -> tuple[float, float]:
    """Mass and centroid distance of a power-law density A r^p on [0, r_cut], fit from samples."""
    sel = (r > 0) & (r <= 4.0 * r_cut) & (rho > 0)
    if sel.sum() < 3:
        sel = np.argsort(r)[:4]
    p, logA = np.polyfit(np.log(r[sel]), np.log(rho[sel]), 1)
    p = float(np.clip(p, -0.95, 4.0))
    A = math.exp(logA)
    mass = A * r_cut ** (p + 1) / (p + 1)
    return mass, r_cut * (p + 1) / (p + 2)


def assemble_measure(fields: ReflectedFieldSet, skel: Skeleton, samples_per_arc: int = 256) -> RieszMeasure:
    """Trapezoid quadrature of the ridge density along every arc plus end caps."""
    if samples_per_arc < 16:
        raise ValueError("samples_per_arc must be at least 16")
    P, W, D, PR, AI = [], [], [], [], []
    for k, arc in enumerate(skel.arcs):
        pts, w, dens = _assemble_arc(fields, skel, arc, samples_per_arc)
        P.append(pts)
        W.append(w)
        D.append(dens)
        PR.append(np.tile(arc.pair, (len(w), 1)))
        AI.append(np.full(len(w), k))
    if not P:
        z = np.zeros((0, 2))
        return RieszMeasure(z, np.zeros(0), np.zeros(0), np.zeros((0, 2), int), np.zeros(0, int))
    return RieszMeasure(np.vstack(P), np.concatenate(W), np.concatenate(D), np.vstack(PR), np.concatenate(AI))


def _assemble_arc(fields, skel, arc: RidgeArc, n: int):
    line = _Polyline(arc.points)
    window = _usable_range(fields, arc, line, skel)
    if window is None:
        # too short to keep clear of its endpoints: one midpoint sample
        mid = project_to_ridge(fields, line.at([0.5 * line.length]), arc.pair)
        g = fields.gradients(mid, list(arc.pair), standoff=0.0)
        rho = float(np.linalg.norm(g[0, 0] - g[0, 1]) / _TWO_PI)
        return mid, np.array([rho * line.length]), np.array([rho])

    lo, hi = window
    s = lo + (hi - lo) * grading_parameters(n - 1, 2.0)
    pts = project_to_ridge(fields, line.at(s), arc.pair)
    g = fields.gradients(pts, list(arc.pair))
    rho = np.linalg.norm(g[:, 0] - g[:, 1], axis=1) / _TWO_PI
    ds = np.diff(s)
    w = rho * np.concatenate([[ds[0] / 2], (ds[:-1] + ds[1:]) / 2, [ds[-1] / 2]])

    cap_pts, cap_w = [], []
    L = line.length
    for end, (kind, gap) in enumerate(zip(arc.endpoint_kinds, (lo, L - hi))):
        if gap <= 0:
            continue
        if kind == "junction":
            # density is smooth through a triple point: linear extrapolation
            i0, i1 = (0, 1) if end == 0 else (-1, -2)
            slope = (rho[i1] - rho[i0]) / abs(s[i1] - s[i0])
            mass = rho[i0] * gap - 0.5 * slope * gap * gap
            centre = 0.5 * gap
        else:
            r = (L - s) if end == 1 else s
            mass, centre = _vertex_cap(gap, r, rho)
        if mass <= 0:
            continue
        sc = centre if end == 0 else L - centre
        cap_pts.append(line.at([sc])[0])
        cap_w.append((mass, mass / gap))
    if cap_pts:
        pts = np.vstack([pts, np.array(cap_pts)])
        w = np.concatenate([w, [c[0] for c in cap_w]])
        rho = np.concatenate([rho, [c[1] for c in cap_w]])
    return pts, w, rho


def potential_of_measure(mu: RieszMeasure, z) -> np.ndarray | float:
    """sum_k weight_k log|z - point_k|."""
    z = np.asarray(z, dtype=float)
    d = z[..., None, :] - mu.points
    val = (mu.weights * 0.5 * np.log((d**2).sum(-1))).sum(-1)
    return float(val) if val.ndim == 0 else val


def complex_moments(m, k_max: int = 6, center=0.0) -> np.ndarray:
    """m_k = int (zeta - center)^k dmeasure for k = 0..k_max.

    For an EquilibriumSolution the piecewise-constant density is integrated
    exactly over each panel.
    """
    if k_max > 12:
        raise ValueError("k_max above 12 is not meaningful at this resolution")
    c = complex(center[0], center[1]) if np.ndim(center) else complex(center)
    ks = np.arange(k_max + 1)
    if isinstance(m, EquilibriumSolution):
        a = m.mesh.a[:, 0] + 1j * m.mesh.a[:, 1] - c
        b = m.mesh.b[:, 0] + 1j * m.mesh.b[:, 1] - c
        # int_panel zeta^k ds = |b - a| (b^{k+1} - a^{k+1}) / ((k+1)(b - a))
        L = np.abs(b - a)
        per = (b[:, None] ** (ks + 1) - a[:, None] ** (ks + 1)) / ((ks + 1) * (b - a)[:, None])
        return (m.density[:, None] * L[:, None] * per).sum(0)
    zeta = m.points[:, 0] + 1j * m.points[:, 1] - c
    return (m.weights[:, None] * zeta[:, None] ** ks).sum(0)
