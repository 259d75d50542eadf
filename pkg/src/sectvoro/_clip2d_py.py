"""Pure-Python 2D Laguerre cell clipping kernel.

Fallback twin of the compiled ``sectvoro._clip2d`` extension: same algorithm,
same arithmetic, same candidate order, so both produce identical cells.  The
kernel cuts the window rectangle by power bisectors

    2*(v_j - v_i) . w  <=  2*(v_j - v_i) . (v_i + v_j)/2 + (h_j - h_i)

processed in the caller-supplied candidate order (increasing spatial distance
from the nucleus), with a conservative early stop: once every remaining
candidate is too far to cut the current polygon, the cell is final.

Edge m of the returned polygon runs from vertex m to vertex m+1 and carries
the index of the generating nucleus, or a negative code (-1..-4) for the
window rectangle sides.

Status codes: 0 cell finished, 1 cell empty, 2 candidate list exhausted
before the early-stop bound was reached (caller retries with more
candidates).
"""

from __future__ import annotations

import math

STATUS_OK = 0
STATUS_EMPTY = 1
STATUS_EXHAUSTED = 2


def clip_cell(i, px, py, h, order, box, h_min, tol, complete):
    """Clip the cell of nucleus ``i`` against candidates ``order``.

    Parameters mirror the compiled kernel: ``px, py, h`` are float64 arrays
    over all nuclei, ``order`` an int64 array of candidate indices sorted by
    increasing distance from nucleus ``i`` (``i`` itself is skipped),
    ``box = (xmin, xmax, ymin, ymax)``, ``h_min`` the global height minimum
    and ``complete`` whether ``order`` holds every other nucleus.

    Returns ``(xs, ys, codes, status)`` with CCW vertices.
    """
    xmin, xmax, ymin, ymax = box
    xi = px[i]
    yi = py[i]
    hi = h[i]

    xs = [xmin, xmax, xmax, xmin]
    ys = [ymin, ymin, ymax, ymax]
    codes = [-1, -2, -3, -4]

    # max squared distance from nucleus to current polygon
    r2max = 0.0
    for m in range(4):
        dx = xs[m] - xi
        dy = ys[m] - yi
        d2 = dx * dx + dy * dy
        if d2 > r2max:
            r2max = d2

    stopped = False
    for t in range(len(order)):
        jj = order[t]
        if jj == i:
            continue
        dxj = px[jj] - xi
        dyj = py[jj] - yi
        dj = math.sqrt(dxj * dxj + dyj * dyj)
        r = math.sqrt(r2max)
        rem = r2max + hi - h_min
        if rem < 0.0:
            rem = 0.0
        if dj > r + math.sqrt(rem):
            stopped = True
            break
        gap = r2max + hi - h[jj]
        if gap < 0.0:
            gap = 0.0
        if dj > r + math.sqrt(gap):
            continue

        ax = 2.0 * dxj
        ay = 2.0 * dyj
        mx = 0.5 * (px[jj] + xi)
        my = 0.5 * (py[jj] + yi)
        b = ax * mx + ay * my + (h[jj] - hi)

        nv = len(xs)
        smax = -math.inf
        smin = math.inf
        svals = [0.0] * nv
        for m in range(nv):
            s = ax * xs[m] + ay * ys[m] - b
            svals[m] = s
            if s > smax:
                smax = s
            if s < smin:
                smin = s
        if smax <= tol:
            continue
        if smin >= -tol:
            return [], [], [], STATUS_EMPTY

        new_xs = []
        new_ys = []
        new_codes = []
        for m in range(nv):
            m2 = m + 1
            if m2 == nv:
                m2 = 0
            si = svals[m]
            sj = svals[m2]
            if si <= 0.0:
                new_xs.append(xs[m])
                new_ys.append(ys[m])
                new_codes.append(codes[m])
                if sj > 0.0:
                    tt = si / (si - sj)
                    new_xs.append(xs[m] + tt * (xs[m2] - xs[m]))
                    new_ys.append(ys[m] + tt * (ys[m2] - ys[m]))
                    new_codes.append(jj)
            elif sj <= 0.0:
                tt = si / (si - sj)
                new_xs.append(xs[m] + tt * (xs[m2] - xs[m]))
                new_ys.append(ys[m] + tt * (ys[m2] - ys[m]))
                new_codes.append(codes[m])
        if len(new_xs) < 3:
            return [], [], [], STATUS_EMPTY
        xs, ys, codes = new_xs, new_ys, new_codes

        r2max = 0.0
        for m in range(len(xs)):
            dx = xs[m] - xi
            dy = ys[m] - yi
            d2 = dx * dx + dy * dy
            if d2 > r2max:
                r2max = d2

    if not stopped and not complete:
        return xs, ys, codes, STATUS_EXHAUSTED
    return xs, ys, codes, STATUS_OK
