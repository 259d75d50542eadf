"""Exact geometric measure helpers: polygon areas, disk and ball clipping.

The disk/ball intersection routines back the tiling invariant, which demands
that the cells of a diagram partition the observation ball to 1e-6 relative
accuracy; Monte-Carlo estimates are far too weak for that, so everything here
is closed-form except the 3D ball volume, which integrates exact 2D sections
with adaptive quadrature.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

__all__ = [
    "polygon_area",
    "polygon_perimeter",
    "disk_polygon_area",
    "ball_polytope_volume",
    "polytope_distance_to_origin",
]


def polygon_area(xs, ys) -> float:
    s = 0.0
    n = len(xs)
    for i in range(n):
        j = (i + 1) % n
        s += xs[i] * ys[j] - xs[j] * ys[i]
    return 0.5 * s


def polygon_perimeter(xs, ys) -> float:
    s = 0.0
    n = len(xs)
    for i in range(n):
        j = (i + 1) % n
        s += math.hypot(xs[j] - xs[i], ys[j] - ys[i])
    return s


def _edge_disk_area(px, py, qx, qy, r) -> float:
    """Signed area of triangle (origin, p, q) intersected with the disk of
    radius ``r`` centred at the origin."""
    dx = qx - px
    dy = qy - py
    a = dx * dx + dy * dy
    if a == 0.0:
        return 0.0
    bb = px * dx + py * dy
    c = px * px + py * py - r * r
    disc = bb * bb - a * c
    if disc <= 0.0:
        # chord misses the circle: pure sector
        return 0.5 * r * r * math.atan2(px * qy - py * qx, px * qx + py * qy)
    sq = math.sqrt(disc)
    t1 = (-bb - sq) / a
    t2 = (-bb + sq) / a
    if t2 <= 0.0 or t1 >= 1.0:
        return 0.5 * r * r * math.atan2(px * qy - py * qx, px * qx + py * qy)
    ta = max(t1, 0.0)
    tb = min(t2, 1.0)
    axp = px + ta * dx
    ayp = py + ta * dy
    bxp = px + tb * dx
    byp = py + tb * dy
    total = 0.5 * (axp * byp - ayp * bxp)
    if ta > 0.0:
        total += 0.5 * r * r * math.atan2(px * ayp - py * axp, px * axp + py * ayp)
    if tb < 1.0:
        total += 0.5 * r * r * math.atan2(bxp * qy - byp * qx, bxp * qx + byp * qy)
    return total


def disk_polygon_area(xs, ys, r, cx: float = 0.0, cy: float = 0.0) -> float:
    """Exact area of (CCW polygon) intersect (disk of radius r at (cx, cy))."""
    n = len(xs)
    total = 0.0
    for i in range(n):
        j = (i + 1) % n
        total += _edge_disk_area(xs[i] - cx, ys[i] - cy, xs[j] - cx, ys[j] - cy, r)
    return total


def _cross_section(poly, z: float):
    """Cross-section polygon (as xs, ys lists) of a convex Polytope3 at height z."""
    verts = poly.verts
    pts = []
    seen = set()
    for _, loop in poly.faces:
        nl = len(loop)
        for m in range(nl):
            u = loop[m]
            w = loop[(m + 1) % nl]
            key = (u, w) if u < w else (w, u)
            if key in seen:
                continue
            seen.add(key)
            zu = verts[u][2]
            zw = verts[w][2]
            if (zu - z) * (zw - z) < 0.0:
                t = (z - zu) / (zw - zu)
                pts.append((verts[u][0] + t * (verts[w][0] - verts[u][0]),
                            verts[u][1] + t * (verts[w][1] - verts[u][1])))
    if len(pts) < 3:
        return None
    mx = sum(p[0] for p in pts) / len(pts)
    my = sum(p[1] for p in pts) / len(pts)
    pts.sort(key=lambda p: math.atan2(p[1] - my, p[0] - mx))
    return [p[0] for p in pts], [p[1] for p in pts]


def ball_polytope_volume(poly, r: float, abs_tol: float = 1e-10) -> float:
    """Volume of (convex Polytope3) intersect (ball of radius r at origin).

    Integrates exact section-disk areas over z, splitting at vertex heights
    where the area function has kinks.
    """
    zs = [v[2] for v in poly.verts]
    z_lo = max(min(zs), -r)
    z_hi = min(max(zs), r)
    if z_hi <= z_lo:
        return 0.0

    def section_area(z):
        rz2 = r * r - z * z
        if rz2 <= 0.0:
            return 0.0
        sec = _cross_section(poly, z)
        if sec is None:
            return 0.0
        return disk_polygon_area(sec[0], sec[1], math.sqrt(rz2))

    brk = sorted({z for z in zs if z_lo < z < z_hi})
    val, _ = quad(section_area, z_lo, z_hi, points=brk or None,
                  limit=200, epsabs=abs_tol, epsrel=1e-10)
    return val


def _point_segment_distance3(p, a, b) -> float:
    ab = (b[0] - a[0], b[1] - a[1], b[2] - a[2])
    ap = (p[0] - a[0], p[1] - a[1], p[2] - a[2])
    denom = ab[0] ** 2 + ab[1] ** 2 + ab[2] ** 2
    t = 0.0 if denom == 0.0 else max(0.0, min(1.0, (ap[0] * ab[0] + ap[1] * ab[1] + ap[2] * ab[2]) / denom))
    q = (a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2])
    return math.dist(p, q)


def polytope_distance_to_origin(poly, halfspaces) -> float:
    """Distance from the origin to a convex Polytope3.

    ``halfspaces`` is an iterable of (a, b) with the polytope equal to the
    intersection of ``a . x <= b``; used for the inside test.
    """
    # origin inside <=> a . 0 <= b for every facet half-space
    if all(b >= -1e-12 for _, b in halfspaces):
        return 0.0
    best = math.inf
    verts = poly.verts
    for _, loop in poly.faces:
        # plane through the face
        n = _face_normal(verts, loop)
        norm = math.sqrt(n[0] ** 2 + n[1] ** 2 + n[2] ** 2)
        if norm == 0.0:
            continue
        v0 = verts[loop[0]]
        dist_plane = (n[0] * v0[0] + n[1] * v0[1] + n[2] * v0[2]) / norm
        foot = (dist_plane * n[0] / norm, dist_plane * n[1] / norm, dist_plane * n[2] / norm)
        if _point_in_face(foot, verts, loop, n):
            best = min(best, abs(dist_plane))
        else:
            nl = len(loop)
            for m in range(nl):
                best = min(best, _point_segment_distance3(
                    (0.0, 0.0, 0.0), verts[loop[m]], verts[loop[(m + 1) % nl]]))
    return best


def _face_normal(verts, loop):
    nx = ny = nz = 0.0
    nl = len(loop)
    for m in range(nl):
        x1, y1, z1 = verts[loop[m]]
        x2, y2, z2 = verts[loop[(m + 1) % nl]]
        nx += (y1 - y2) * (z1 + z2)
        ny += (z1 - z2) * (x1 + x2)
        nz += (x1 - x2) * (y1 + y2)
    return (nx, ny, nz)


def _point_in_face(p, verts, loop, normal) -> bool:
    """Point (assumed on the face plane) inside the convex face polygon."""
    nl = len(loop)
    sign = 0
    for m in range(nl):
        a = verts[loop[m]]
        b = verts[loop[(m + 1) % nl]]
        e = (b[0] - a[0], b[1] - a[1], b[2] - a[2])
        w = (p[0] - a[0], p[1] - a[1], p[2] - a[2])
        cx = e[1] * w[2] - e[2] * w[1]
        cy = e[2] * w[0] - e[0] * w[2]
        cz = e[0] * w[1] - e[1] * w[0]
        s = cx * normal[0] + cy * normal[1] + cz * normal[2]
        if s > 1e-12:
            if sign < 0:
                return False
            sign = 1
        elif s < -1e-12:
            if sign > 0:
                return False
            sign = -1
    return True
