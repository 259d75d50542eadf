"""Laguerre (power) diagram construction in 1, 2 and 3 dimensions.

Each cell is cut from the window box by the power bisector half-spaces of its
nucleus against the other marked points; candidates are processed in order of
increasing spatial distance with a conservative early stop (a candidate whose
best-possible power over the current polygon cannot beat the nucleus's worst
power can never cut).  The 2D inner loop is the hot path and runs in the
compiled ``sectvoro._clip2d`` kernel when available, with an equivalent
pure-Python fallback selected at import time (set ``SECTVORO_PURE_PYTHON=1``
to force the fallback).

Every facet carries the index of the generating nucleus (window sides use
negative codes), which makes the face lattice exact set arithmetic: a k-face
of the diagram is identified by the set of nuclei incident to it, so k-faces
can be deduplicated and counted across cells without geometric matching.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .measures import (
    ball_polytope_volume,
    disk_polygon_area,
    polygon_area,
    polygon_perimeter,
    polytope_distance_to_origin,
)
from .polytope3 import DegenerateGeometryError, Polytope3, box_polytope

if os.environ.get("SECTVORO_PURE_PYTHON"):
    from . import _clip2d_py as _clip2d

    USING_COMPILED = False
else:
    try:
        from . import _clip2d  # type: ignore[attr-defined]

        USING_COMPILED = True
    except ImportError:
        from . import _clip2d_py as _clip2d

        USING_COMPILED = False

__all__ = [
    "USING_COMPILED",
    "PREDICATE_TOL",
    "BoundaryContaminationError",
    "CellMeasures",
    "ConvexCell",
    "Face",
    "LaguerreDiagram",
    "build_diagram",
    "cell_measures",
    "restrict_interior_cells",
    "tiling_residual",
]

PREDICATE_TOL = 1e-9

_PARTIAL_CANDIDATES = 48


class BoundaryContaminationError(RuntimeError):
    """A cell or face selected by minus-sampling touches the sampling box."""


@dataclass(frozen=True)
class CellMeasures:
    volume: float
    boundary: float  # perimeter in 2D, surface area in 3D, 2.0 in 1D
    f_vector: tuple


@dataclass
class ConvexCell:
    """One nonempty Laguerre cell clipped to the window box.

    ``facets`` is a list of ``(code, vertex_ids, normal, offset)`` where the
    facet lies on ``normal . x = offset`` with ``normal . x <= offset`` inside;
    in 2D ``vertex_ids`` are consecutive vertex indices and in 3D an ordered
    loop.  ``code`` is the generating nucleus index or a negative window code.
    """

    nucleus_index: int
    dim: int
    vertices: np.ndarray
    facets: list
    _measures: Optional[CellMeasures] = field(default=None, repr=False)

    def centre(self) -> tuple:
        """Lexicographically smallest vertex; translation-covariant and in the cell."""
        return min(map(tuple, self.vertices))

    def touches_window(self) -> bool:
        return any(f[0] < 0 for f in self.facets)

    def measures(self) -> CellMeasures:
        if self._measures is None:
            self._measures = cell_measures(self)
        return self._measures

    def vertex_facet_codes(self):
        """For each vertex index, the sorted tuple of codes of facets containing it."""
        incident: dict = {v: [] for v in range(len(self.vertices))}
        for code, vids, _, _ in self.facets:
            for v in vids:
                incident[v].append(code)
        return {v: tuple(sorted(set(c))) for v, c in incident.items()}

    def as_polytope3(self) -> Polytope3:
        if self.dim != 3:
            raise ValueError("as_polytope3 requires a 3D cell")
        return Polytope3([tuple(v) for v in self.vertices],
                         [(code, list(vids)) for code, vids, _, _ in self.facets])


@dataclass(frozen=True)
class Face:
    """A k-face of the diagram, identified by its incident source codes.

    ``clipped`` marks faces whose observed geometry is cut off by the sampling
    box (some vertex lies on a window plane); their centre cannot be trusted.
    """

    dim: int
    key: tuple
    cells: tuple
    centre: tuple
    clipped: bool = False

    @property
    def interior(self) -> bool:
        return all(c >= 0 for c in self.key)


@dataclass
class LaguerreDiagram:
    dim: int
    positions: np.ndarray
    heights: np.ndarray
    box: tuple  # ((lo, hi), ...) per axis
    cells: list  # ConvexCell | None per nucleus
    _faces: Optional[dict] = field(default=None, repr=False)

    @property
    def nonempty_cells(self):
        return [c for c in self.cells if c is not None]

    def face_lattice(self) -> dict:
        """Faces per dimension k in {0, ..., dim-1}, deduplicated by key."""
        if self._faces is None:
            self._faces = _assemble_faces(self)
        return self._faces

    def normality_violations(self) -> int:
        """Interior k-faces whose incident-cell count differs from dim+1-k."""
        bad = 0
        for k, faces in self.face_lattice().items():
            want = self.dim + 1 - k
            for f in faces:
                if f.interior and len(f.cells) != want:
                    bad += 1
        return bad


def _halfplane(pos, h, i, j):
    """Coefficients (a, b) of pow(., i) <= pow(., j) as a . w <= b."""
    a = 2.0 * (pos[j] - pos[i])
    mid = 0.5 * (pos[i] + pos[j])
    b = float(a @ mid) + (h[j] - h[i])
    return a, b


def _window_facet(axis_lo_hi, code, dim):
    """Normal/offset of a window box side identified by its negative code."""
    # codes: 2D -1..-4 = bottom, right, top, left; 3D -1..-6 = x-,x+,y-,y+,z-,z+
    if dim == 2:
        mapping = {-1: (1, -1.0), -2: (0, +1.0), -3: (1, +1.0), -4: (0, -1.0)}
    elif dim == 3:
        mapping = {-1: (0, -1.0), -2: (0, +1.0), -3: (1, -1.0),
                   -4: (1, +1.0), -5: (2, -1.0), -6: (2, +1.0)}
    else:
        mapping = {-1: (0, -1.0), -2: (0, +1.0)}
    axis, sign = mapping[code]
    normal = np.zeros(dim)
    normal[axis] = sign
    offset = axis_lo_hi[axis][1] if sign > 0 else -axis_lo_hi[axis][0]
    return normal, offset


def build_diagram(points, box_or_window, predicate_tol: float = PREDICATE_TOL) -> LaguerreDiagram:
    """Laguerre diagram of marked points clipped to a box.

    ``points`` is anything with ``position`` (n, dim) and ``height`` (n,)
    attributes, or a ``(positions, heights)`` pair.  ``box_or_window`` is
    either an explicit ``((lo, hi), ...)`` box or an object exposing
    ``clip_box(dim)``.
    """
    pos, h = _as_arrays(points)
    n, dim = pos.shape
    if n < 1:
        raise ValueError("at least one marked point is required")
    if dim not in (1, 2, 3):
        raise ValueError(f"supported dimensions are 1, 2, 3; got {dim}")
    box = box_or_window.clip_box(dim) if hasattr(box_or_window, "clip_box") else tuple(
        (float(lo), float(hi)) for lo, hi in box_or_window)
    if len(box) != dim:
        raise ValueError(f"box has {len(box)} axes, expected {dim}")

    if dim == 1:
        cells = _build_cells_1d(pos, h, box, predicate_tol)
    elif dim == 2:
        cells = _build_cells_2d(pos, h, box, predicate_tol)
    else:
        cells = _build_cells_3d(pos, h, box, predicate_tol)
    return LaguerreDiagram(dim=dim, positions=pos, heights=h, box=box, cells=cells)


def _as_arrays(points):
    if hasattr(points, "position"):
        pos = np.asarray(points.position, dtype=np.float64)
        h = np.asarray(points.height, dtype=np.float64)
    else:
        pos, h = points
        pos = np.asarray(pos, dtype=np.float64)
        h = np.asarray(h, dtype=np.float64)
    if pos.ndim == 1:
        pos = pos[:, None]
    if pos.ndim != 2 or h.shape != (pos.shape[0],):
        raise ValueError("positions must be (n, dim) with heights (n,)")
    if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(h))):
        raise ValueError("positions and heights must be finite")
    return np.ascontiguousarray(pos), np.ascontiguousarray(h)


def _build_cells_1d(pos, h, box, tol):
    (xmin, xmax), = box
    x = pos[:, 0]
    n = x.size
    cells = []
    for i in range(n):
        a = 2.0 * (x - x[i])
        b = a * (0.5 * (x + x[i])) + (h - h[i])
        a[i] = 0.0
        b[i] = 1.0
        lo, hi = xmin, xmax
        lo_code, hi_code = -1, -2
        with np.errstate(divide="ignore", invalid="ignore"):
            cuts = b / a
        pos_mask = a > 0.0
        if np.any(pos_mask):
            ii = int(np.argmin(np.where(pos_mask, cuts, np.inf)))
            if cuts[ii] < hi:
                hi, hi_code = float(cuts[ii]), ii
        neg_mask = a < 0.0
        if np.any(neg_mask):
            ii = int(np.argmax(np.where(neg_mask, cuts, -np.inf)))
            if cuts[ii] > lo:
                lo, lo_code = float(cuts[ii]), ii
        zero_mask = (a == 0.0) & (b < -tol)
        if np.any(zero_mask) or hi - lo <= tol:
            cells.append(None)
            continue
        verts = np.array([[lo], [hi]])
        facets = [
            (lo_code, (0,), np.array([-1.0]), -lo),
            (hi_code, (1,), np.array([1.0]), hi),
        ]
        cells.append(ConvexCell(i, 1, verts, facets))
    return cells


def _candidate_order(d2, i, kth):
    n = d2.shape[0]
    if kth >= n - 1:
        order = np.argsort(d2, kind="stable")
        return order.astype(np.int64), True
    part = np.argpartition(d2, kth)[: kth + 1]
    order = part[np.lexsort((part, d2[part]))]
    return order.astype(np.int64), False


def _build_cells_2d(pos, h, box, tol):
    n = pos.shape[0]
    h_min = float(h.min())
    flat_box = (box[0][0], box[0][1], box[1][0], box[1][1])
    cells = []
    block = 1024
    for start in range(0, n, block):
        stop = min(start + block, n)
        diff = pos[start:stop, None, :] - pos[None, :, :]
        d2_block = np.einsum("ijk,ijk->ij", diff, diff)
        for i in range(start, stop):
            d2 = d2_block[i - start]
            order, complete = _candidate_order(d2, i, _PARTIAL_CANDIDATES)
            xs, ys, codes, status = _clip2d.clip_cell(
                i, pos[:, 0], pos[:, 1], h, order, flat_box, h_min, tol, complete)
            if status == 2:  # exhausted the partial candidate list: redo fully
                order = np.argsort(d2, kind="stable").astype(np.int64)
                xs, ys, codes, status = _clip2d.clip_cell(
                    i, pos[:, 0], pos[:, 1], h, order, flat_box, h_min, tol, True)
            if status == 1:
                cells.append(None)
                continue
            cells.append(_polygon_cell(i, xs, ys, codes, pos, h, box))
    return cells


def _polygon_cell(i, xs, ys, codes, pos, h, box):
    m = len(xs)
    verts = np.column_stack([xs, ys])
    facets = []
    for e in range(m):
        code = codes[e]
        vids = (e, (e + 1) % m)
        if code >= 0:
            a, b = _halfplane(pos, h, i, code)
        else:
            a, b = _window_facet(box, code, 2)
        facets.append((code, vids, a, b))
    return ConvexCell(i, 2, verts, facets)


def _build_cells_3d(pos, h, box, tol):
    n = pos.shape[0]
    h_min = float(h.min())
    (xmin, xmax), (ymin, ymax), (zmin, zmax) = box
    cells = []
    for i in range(n):
        diff = pos - pos[i]
        d2 = np.einsum("ij,ij->i", diff, diff)
        order, complete = _candidate_order(d2, i, _PARTIAL_CANDIDATES)
        cell = _clip_cell_3d(i, pos, h, order, box, h_min, tol, complete)
        if cell == "exhausted":
            order = np.argsort(d2, kind="stable").astype(np.int64)
            cell = _clip_cell_3d(i, pos, h, order, box, h_min, tol, True)
        cells.append(cell)
    return cells


def _clip_cell_3d(i, pos, h, order, box, h_min, tol, complete):
    poly = box_polytope(box[0][0], box[0][1], box[1][0], box[1][1], box[2][0], box[2][1])
    vi = pos[i]
    hi = h[i]
    r2max = max((vx - vi[0]) ** 2 + (vy - vi[1]) ** 2 + (vz - vi[2]) ** 2
                for vx, vy, vz in poly.verts)
    stopped = False
    for jj in order:
        jj = int(jj)
        if jj == i:
            continue
        dj = math.dist(pos[jj], vi)
        r = math.sqrt(r2max)
        if dj > r + math.sqrt(max(r2max + hi - h_min, 0.0)):
            stopped = True
            break
        if dj > r + math.sqrt(max(r2max + hi - h[jj], 0.0)):
            continue
        a, b = _halfplane(pos, h, i, jj)
        if not poly.clip((a[0], a[1], a[2]), b, jj, tol):
            return None
        r2max = max((vx - vi[0]) ** 2 + (vy - vi[1]) ** 2 + (vz - vi[2]) ** 2
                    for vx, vy, vz in poly.verts)
    if not stopped and not complete:
        return "exhausted"

    verts = np.array(poly.verts)
    facets = []
    for code, loop in poly.faces:
        if code >= 0:
            a, b = _halfplane(pos, h, i, code)
        else:
            a, b = _window_facet(box, code, 3)
        facets.append((code, tuple(loop), a, b))
    return ConvexCell(i, 3, verts, facets)


def cell_measures(cell: ConvexCell) -> CellMeasures:
    """Volume, boundary measure and f-vector of a nonempty cell."""
    if cell.dim == 1:
        length = float(cell.vertices[1, 0] - cell.vertices[0, 0])
        return CellMeasures(length, 2.0, (2, 1))
    if cell.dim == 2:
        xs = cell.vertices[:, 0].tolist()
        ys = cell.vertices[:, 1].tolist()
        m = len(xs)
        return CellMeasures(polygon_area(xs, ys), polygon_perimeter(xs, ys), (m, m, 1))
    poly = cell.as_polytope3()
    return CellMeasures(poly.volume(), poly.surface_area(), poly.f_vector())


def _assemble_faces(diag: LaguerreDiagram) -> dict:
    dim = diag.dim
    found: dict = {k: {} for k in range(dim)}

    def add(k, key, cell_idx, centre, clipped):
        entry = found[k].get(key)
        if entry is None:
            found[k][key] = [set([cell_idx]), centre, clipped]
        else:
            entry[0].add(cell_idx)
            if centre < entry[1]:
                entry[1] = centre
            entry[2] = entry[2] or clipped

    for cell in diag.cells:
        if cell is None:
            continue
        i = cell.nucleus_index
        verts = cell.vertices
        vcodes = cell.vertex_facet_codes()
        on_window = {v for v, codes in vcodes.items() if any(c < 0 for c in codes)}
        # vertices (k = 0) via incident facet codes
        for v, codes in vcodes.items():
            key = tuple(sorted(set(codes) | {i}))
            add(0, key, i, tuple(verts[v]), v in on_window)
        # facets (k = dim-1)
        if dim >= 2:
            for code, vids, _, _ in cell.facets:
                key = tuple(sorted({i, code}))
                centre = min(tuple(verts[v]) for v in vids)
                add(dim - 1, key, i, centre, any(v in on_window for v in vids))
        # 3D edges (k = 1): an edge of the cell lies in exactly two facets
        if dim == 3:
            edge_faces: dict = {}
            for code, vids, _, _ in cell.facets:
                nl = len(vids)
                for m in range(nl):
                    u, w = vids[m], vids[(m + 1) % nl]
                    ekey = (u, w) if u < w else (w, u)
                    edge_faces.setdefault(ekey, []).append(code)
            for (u, w), fcodes in edge_faces.items():
                key = tuple(sorted(set(fcodes) | {i}))
                centre = min(tuple(verts[u]), tuple(verts[w]))
                add(1, key, i, centre, u in on_window or w in on_window)

    return {
        k: [Face(dim=k, key=key, cells=tuple(sorted(cands)), centre=centre, clipped=clipped)
            for key, (cands, centre, clipped) in sorted(entries.items())]
        for k, entries in found.items()
    }


def restrict_interior_cells(diag: LaguerreDiagram, r_obs: float):
    """Cells whose centre lies in the closed observation ball.

    Raises :class:`BoundaryContaminationError` if a selected cell touches the
    sampling box: such a cell cannot be trusted to equal the infinite-process
    cell and indicates an undersized window rather than an estimand.
    """
    out = []
    r2 = r_obs * r_obs
    for cell in diag.cells:
        if cell is None:
            continue
        c = cell.centre()
        if sum(x * x for x in c) <= r2:
            if cell.touches_window():
                raise BoundaryContaminationError(
                    f"cell of nucleus {cell.nucleus_index} has centre in the "
                    f"observation ball but touches the sampling boundary")
            out.append(cell)
    return out


def tiling_residual(diag: LaguerreDiagram, r_obs: float) -> float:
    """Relative defect of sum(vol(cell ∩ B_r)) against vol(B_r)."""
    dim = diag.dim
    if dim == 1:
        total = sum(max(0.0, min(c.vertices[1, 0], r_obs) - max(c.vertices[0, 0], -r_obs))
                    for c in diag.nonempty_cells)
        ref = 2.0 * r_obs
    elif dim == 2:
        total = 0.0
        for c in diag.nonempty_cells:
            xs = c.vertices[:, 0].tolist()
            ys = c.vertices[:, 1].tolist()
            total += disk_polygon_area(xs, ys, r_obs)
        ref = math.pi * r_obs * r_obs
    else:
        total = 0.0
        for c in diag.nonempty_cells:
            norms = np.sqrt(np.einsum("ij,ij->i", c.vertices, c.vertices))
            if norms.max() <= r_obs:
                total += c.measures().volume
                continue
            poly = c.as_polytope3()
            halfspaces = [(a, b) for _, _, a, b in c.facets]
            if polytope_distance_to_origin(poly, halfspaces) >= r_obs:
                continue
            total += ball_polytope_volume(poly, r_obs)
        ref = 4.0 / 3.0 * math.pi * r_obs ** 3
    return abs(total - ref) / ref
