"""Independent brute-force construction of single Laguerre cells.

The oracle clips the window polytope by every bisector half-space in raw
index order with no candidate pruning, using separately written clipping code
(a plain Sutherland-Hodgman pass in 2D), and offers a grid membership audit:
each probe point must lie inside the cell of its minimum-power nucleus.  Used
to validate :func:`sectvoro.laguerre.build_diagram` cell by cell.
"""

from __future__ import annotations

import math

import numpy as np

from .laguerre import PREDICATE_TOL, LaguerreDiagram
from .polytope3 import box_polytope

__all__ = ["brute_force_cell", "hausdorff_vertex_distance", "grid_membership_audit"]


def _halfplane(pos, h, i, j):
    a = 2.0 * (pos[j] - pos[i])
    mid = 0.5 * (pos[i] + pos[j])
    b = float(a @ mid) + (h[j] - h[i])
    return a, b


def _clip_polygon(px, py, a0, a1, b, tol):
    s = [a0 * x + a1 * y - b for x, y in zip(px, py)]
    if max(s) <= tol:
        return px, py
    if min(s) >= -tol:
        return None
    nx, ny = [], []
    m = len(px)
    for u in range(m):
        w = (u + 1) % m
        su, sw = s[u], s[w]
        if su <= 0.0:
            nx.append(px[u])
            ny.append(py[u])
            if sw > 0.0:
                t = su / (su - sw)
                nx.append(px[u] + t * (px[w] - px[u]))
                ny.append(py[u] + t * (py[w] - py[u]))
        elif sw <= 0.0:
            t = su / (su - sw)
            nx.append(px[u] + t * (px[w] - px[u]))
            ny.append(py[u] + t * (py[w] - py[u]))
    if len(nx) < 3:
        return None
    return nx, ny


def brute_force_cell(index, points, box, predicate_tol: float = PREDICATE_TOL):
    """Vertex array of the cell of nucleus ``index``, or None when empty.

    Same box/tolerance conventions as the engine, different code path and
    clipping order (raw index order, no pruning).
    """
    from .laguerre import _as_arrays

    pos, h = _as_arrays(points)
    n, dim = pos.shape
    if dim == 1:
        lo, hi = box[0]
        for j in range(n):
            if j == index:
                continue
            a, b = _halfplane(pos, h, index, j)
            if a[0] > 0.0:
                hi = min(hi, b / a[0])
            elif a[0] < 0.0:
                lo = max(lo, b / a[0])
            elif b < -predicate_tol:
                return None
        if hi - lo <= predicate_tol:
            return None
        return np.array([[lo], [hi]])

    if dim == 2:
        px = [box[0][0], box[0][1], box[0][1], box[0][0]]
        py = [box[1][0], box[1][0], box[1][1], box[1][1]]
        for j in range(n):
            if j == index:
                continue
            a, b = _halfplane(pos, h, index, j)
            res = _clip_polygon(px, py, a[0], a[1], b, predicate_tol)
            if res is None:
                return None
            px, py = res
        return np.column_stack([px, py])

    poly = box_polytope(box[0][0], box[0][1], box[1][0], box[1][1], box[2][0], box[2][1])
    for j in range(n):
        if j == index:
            continue
        a, b = _halfplane(pos, h, index, j)
        if not poly.clip((a[0], a[1], a[2]), b, j, predicate_tol):
            return None
    return np.array(poly.verts)


def hausdorff_vertex_distance(verts_a, verts_b) -> float:
    """Symmetric Hausdorff distance between two vertex sets (inf if one is None)."""
    if verts_a is None and verts_b is None:
        return 0.0
    if verts_a is None or verts_b is None:
        return math.inf
    a = np.asarray(verts_a, dtype=float)
    b = np.asarray(verts_b, dtype=float)
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return max(d.min(axis=1).max(), d.min(axis=0).max())


def grid_membership_audit(diag: LaguerreDiagram, grid_n: int, tol: float = 1e-7) -> int:
    """Probe a regular grid: the minimum-power nucleus's cell must contain the
    probe point.  Returns the number of violations (0 for a correct diagram).

    Probes within ``tol`` of a power tie are skipped; containment is tested
    against the cell's stored facet half-spaces.
    """
    pos = diag.positions
    h = diag.heights
    axes = [np.linspace(lo, hi, grid_n + 2)[1:-1] for lo, hi in diag.box]
    mesh = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
    bad = 0
    for w in mesh:
        pw = np.einsum("ij,ij->i", pos - w, pos - w) + h
        order = np.argsort(pw, kind="stable")
        best = int(order[0])
        if pw[order[1]] - pw[best] < tol:
            continue
        cell = diag.cells[best]
        if cell is None:
            bad += 1
            continue
        ok = all(float(a @ w) <= b + tol for _, _, a, b in cell.facets)
        if not ok:
            bad += 1
    return bad
