"""Compiled single-layer kernels for piecewise-constant densities on polygon sides.

Panels on one side share a line, so the antiderivative is evaluated once per
breakpoint and differenced. Layout: for side f, breakpoints sit at arclength
positions pos[f, 0..n] from origin[f] along tangent[f]; density[f, k] lives
on [pos[f, k], pos[f, k+1]].
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _F(x, h2, ah):
    r2 = x * x + h2
    val = -x
    if r2 > 0.0:
        val += 0.5 * x * math.log(r2)
    if ah > 0.0:
        val += ah * math.atan2(x, ah)
    return val


@njit(cache=True)
def potential(points, origin, tangent, pos, density):
    npts = points.shape[0]
    nf, nb = pos.shape
    out = np.zeros(npts)
    for p in range(npts):
        zx = points[p, 0]
        zy = points[p, 1]
        acc = 0.0
        for f in range(nf):
            rx = zx - origin[f, 0]
            ry = zy - origin[f, 1]
            tx = tangent[f, 0]
            ty = tangent[f, 1]
            s0 = rx * tx + ry * ty
            h = ry * tx - rx * ty
            h2 = h * h
            ah = abs(h)
            prev = _F(pos[f, 0] - s0, h2, ah)
            for k in range(nb - 1):
                cur = _F(pos[f, k + 1] - s0, h2, ah)
                acc += density[f, k] * (cur - prev)
                prev = cur
        out[p] = acc
    return out


@njit(cache=True)
def gradient(points, origin, tangent, pos, density):
    npts = points.shape[0]
    nf, nb = pos.shape
    out = np.zeros((npts, 2))
    for p in range(npts):
        zx = points[p, 0]
        zy = points[p, 1]
        gx = 0.0
        gy = 0.0
        for f in range(nf):
            rx = zx - origin[f, 0]
            ry = zy - origin[f, 1]
            tx = tangent[f, 0]
            ty = tangent[f, 1]
            s0 = rx * tx + ry * ty
            h = ry * tx - rx * ty
            h2 = h * h
            ah = abs(h)
            sg = 1.0 if h > 0 else (-1.0 if h < 0 else 0.0)
            x = pos[f, 0] - s0
            lprev = math.log(x * x + h2)
            aprev = math.atan2(x, ah)
            along = 0.0
            normal = 0.0
            for k in range(nb - 1):
                x = pos[f, k + 1] - s0
                lcur = math.log(x * x + h2)
                acur = math.atan2(x, ah)
                along -= 0.5 * density[f, k] * (lcur - lprev)
                normal += sg * density[f, k] * (acur - aprev)
                lprev = lcur
                aprev = acur
            # left normal of the tangent is (-ty, tx)
            gx += along * tx - normal * ty
            gy += along * ty + normal * tx
        out[p, 0] = gx
        out[p, 1] = gy
    return out
