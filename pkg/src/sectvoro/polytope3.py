"""Convex 3D polytope with per-face provenance, clipped by half-spaces.

The polytope is a vertex array plus a list of faces; each face is a planar
loop of vertex indices together with an integer source code (the generating
nucleus for bisector planes, negative codes for window box sides).  Clipping
against ``a . x <= b`` rebuilds the cut faces and closes the section with a
new face carrying the clip's code.  Random inputs are in general position, so
each cut face meets the clip plane in exactly two points; anything else
raises :class:`DegenerateGeometryError`.
"""

from __future__ import annotations

import math

__all__ = ["Polytope3", "DegenerateGeometryError", "box_polytope"]


class DegenerateGeometryError(RuntimeError):
    """Clip produced a face/edge structure outside tolerance guarantees."""


class Polytope3:
    __slots__ = ("verts", "faces")

    def __init__(self, verts, faces):
        self.verts = verts          # list of (x, y, z)
        self.faces = faces          # list of (code, [vertex indices])

    def clip(self, a, b, code, tol):
        """Clip in place by ``a . x <= b``; returns False when the polytope
        becomes empty (within predicate tolerance ``tol``)."""
        ax, ay, az = a
        verts = self.verts
        s = [ax * v[0] + ay * v[1] + az * v[2] - b for v in verts]
        smax = max(s)
        if smax <= tol:
            return True
        smin = min(s)
        if smin >= -tol:
            return False

        cut_cache: dict = {}

        def cut_point(u, w):
            key = (u, w) if u < w else (w, u)
            idx = cut_cache.get(key)
            if idx is None:
                su, sw = s[u], s[w]
                t = su / (su - sw)
                vu, vw = verts[u], verts[w]
                verts.append((vu[0] + t * (vw[0] - vu[0]),
                              vu[1] + t * (vw[1] - vu[1]),
                              vu[2] + t * (vw[2] - vu[2])))
                idx = len(verts) - 1
                cut_cache[key] = idx
            return idx

        on_tol = tol
        new_faces = []
        section_edges = []
        for fcode, loop in self.faces:
            nl = len(loop)
            new_loop = []
            on_plane = []
            for m in range(nl):
                u = loop[m]
                w = loop[(m + 1) % nl]
                su, sw = s[u], s[w]
                if su <= 0.0:
                    new_loop.append(u)
                    if abs(su) <= on_tol:
                        on_plane.append(u)
                    if sw > 0.0:
                        c = cut_point(u, w)
                        new_loop.append(c)
                        on_plane.append(c)
                elif sw <= 0.0:
                    c = cut_point(u, w)
                    new_loop.append(c)
                    on_plane.append(c)
            if len(new_loop) >= 3:
                new_faces.append((fcode, new_loop))
                if on_plane:
                    uniq = list(dict.fromkeys(on_plane))
                    if len(uniq) == 2:
                        section_edges.append((uniq[0], uniq[1]))
                    elif len(uniq) > 2:
                        raise DegenerateGeometryError(
                            "face meets clip plane in more than two points")

        if not new_faces:
            return False
        if section_edges:
            loop = _chain_cycle(section_edges)
            new_faces.append((code, loop))
        elif cut_cache:
            raise DegenerateGeometryError("clip produced cuts but no section loop")

        self.faces = new_faces
        self._compact()
        return True

    def _compact(self):
        used = sorted({v for _, loop in self.faces for v in loop})
        remap = {old: new for new, old in enumerate(used)}
        self.verts = [self.verts[old] for old in used]
        self.faces = [(c, [remap[v] for v in loop]) for c, loop in self.faces]

    def interior_point(self):
        n = len(self.verts)
        sx = sum(v[0] for v in self.verts)
        sy = sum(v[1] for v in self.verts)
        sz = sum(v[2] for v in self.verts)
        return (sx / n, sy / n, sz / n)

    def volume(self):
        """Volume via signed pyramids over faces, orientation fixed per face."""
        cx, cy, cz = self.interior_point()
        total = 0.0
        for _, loop in self.faces:
            total += abs(_face_pyramid_volume(self.verts, loop, (cx, cy, cz)))
        return total

    def surface_area(self):
        return sum(_polygon_area3(self.verts, loop) for _, loop in self.faces)

    def f_vector(self):
        n_e2 = sum(len(loop) for _, loop in self.faces)
        if n_e2 % 2:
            raise DegenerateGeometryError("odd edge incidence count")
        return (len(self.verts), n_e2 // 2, len(self.faces), 1)


def _chain_cycle(edges):
    """Order undirected edges into one closed cycle of vertex indices."""
    adj: dict = {}
    for u, w in edges:
        adj.setdefault(u, []).append(w)
        adj.setdefault(w, []).append(u)
    for v, nb in adj.items():
        if len(nb) != 2:
            raise DegenerateGeometryError("section loop is not a simple cycle")
    start = min(adj)
    loop = [start]
    prev = None
    cur = start
    while True:
        a, b = adj[cur]
        nxt = b if a == prev else a
        if nxt == start:
            break
        loop.append(nxt)
        prev, cur = cur, nxt
        if len(loop) > len(adj):
            raise DegenerateGeometryError("section loop does not close")
    if len(loop) != len(adj):
        raise DegenerateGeometryError("section loop misses vertices")
    return loop


def _newell_normal(verts, loop):
    nx = ny = nz = 0.0
    nl = len(loop)
    for m in range(nl):
        x1, y1, z1 = verts[loop[m]]
        x2, y2, z2 = verts[loop[(m + 1) % nl]]
        nx += (y1 - y2) * (z1 + z2)
        ny += (z1 - z2) * (x1 + x2)
        nz += (x1 - x2) * (y1 + y2)
    return nx, ny, nz


def _polygon_area3(verts, loop):
    nx, ny, nz = _newell_normal(verts, loop)
    return 0.5 * math.sqrt(nx * nx + ny * ny + nz * nz)


def _face_pyramid_volume(verts, loop, apex):
    """Signed volume of the pyramid from ``apex`` over the face polygon."""
    ax, ay, az = apex
    x0, y0, z0 = verts[loop[0]]
    x0 -= ax; y0 -= ay; z0 -= az
    total = 0.0
    for m in range(1, len(loop) - 1):
        x1, y1, z1 = verts[loop[m]]
        x2, y2, z2 = verts[loop[m + 1]]
        x1 -= ax; y1 -= ay; z1 -= az
        x2 -= ax; y2 -= ay; z2 -= az
        total += (x0 * (y1 * z2 - z1 * y2)
                  - y0 * (x1 * z2 - z1 * x2)
                  + z0 * (x1 * y2 - y1 * x2))
    return total / 6.0


def box_polytope(xmin, xmax, ymin, ymax, zmin, zmax):
    """Axis-aligned box with face codes -1..-6 (x-, x+, y-, y+, z-, z+).

    Face loops are oriented with outward normals.
    """
    v = [
        (xmin, ymin, zmin), (xmax, ymin, zmin), (xmax, ymax, zmin), (xmin, ymax, zmin),
        (xmin, ymin, zmax), (xmax, ymin, zmax), (xmax, ymax, zmax), (xmin, ymax, zmax),
    ]
    faces = [
        (-1, [0, 4, 7, 3]),  # x = xmin
        (-2, [1, 2, 6, 5]),  # x = xmax
        (-3, [0, 1, 5, 4]),  # y = ymin
        (-4, [3, 7, 6, 2]),  # y = ymax
        (-5, [0, 3, 2, 1]),  # z = zmin
        (-6, [4, 5, 6, 7]),  # z = zmax
    ]
    return Polytope3(list(v), faces)
