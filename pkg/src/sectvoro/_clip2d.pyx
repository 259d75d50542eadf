# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled 2D Laguerre cell clipping kernel.

Twin of ``sectvoro._clip2d_py`` (see there for the algorithm contract); kept
in lockstep so the compiled and pure-Python paths return identical cells.
"""

from libc.math cimport sqrt, INFINITY as C_INF

import numpy as np
cimport numpy as cnp

STATUS_OK = 0
STATUS_EMPTY = 1
STATUS_EXHAUSTED = 2

DEF MAXV = 512


def clip_cell(Py_ssize_t i,
              cnp.float64_t[::1] px,
              cnp.float64_t[::1] py,
              cnp.float64_t[::1] h,
              cnp.int64_t[::1] order,
              box,
              double h_min,
              double tol,
              bint complete):
    """See ``sectvoro._clip2d_py.clip_cell``."""
    cdef double xmin = box[0], xmax = box[1], ymin = box[2], ymax = box[3]
    cdef double xi = px[i], yi = py[i], hi = h[i]

    cdef double bx[MAXV]
    cdef double by[MAXV]
    cdef long bc[MAXV]
    cdef double cx[MAXV]
    cdef double cy[MAXV]
    cdef long cc[MAXV]
    cdef double sv[MAXV]

    bx[0] = xmin; by[0] = ymin; bc[0] = -1
    bx[1] = xmax; by[1] = ymin; bc[1] = -2
    bx[2] = xmax; by[2] = ymax; bc[2] = -3
    bx[3] = xmin; by[3] = ymax; bc[3] = -4
    cdef Py_ssize_t nv = 4

    cdef double r2max = 0.0, d2, dx, dy
    cdef Py_ssize_t m, m2, t, jj, nn
    for m in range(4):
        dx = bx[m] - xi
        dy = by[m] - yi
        d2 = dx * dx + dy * dy
        if d2 > r2max:
            r2max = d2

    cdef bint stopped = False
    cdef double dxj, dyj, dj, r, rem, gap, ax, ay, mx, my, b
    cdef double smax, smin, s, si, sj, tt
    cdef Py_ssize_t ncand = order.shape[0]

    for t in range(ncand):
        jj = order[t]
        if jj == i:
            continue
        dxj = px[jj] - xi
        dyj = py[jj] - yi
        dj = sqrt(dxj * dxj + dyj * dyj)
        r = sqrt(r2max)
        rem = r2max + hi - h_min
        if rem < 0.0:
            rem = 0.0
        if dj > r + sqrt(rem):
            stopped = True
            break
        gap = r2max + hi - h[jj]
        if gap < 0.0:
            gap = 0.0
        if dj > r + sqrt(gap):
            continue

        ax = 2.0 * dxj
        ay = 2.0 * dyj
        mx = 0.5 * (px[jj] + xi)
        my = 0.5 * (py[jj] + yi)
        b = ax * mx + ay * my + (h[jj] - hi)

        smax = -C_INF
        smin = C_INF
        for m in range(nv):
            s = ax * bx[m] + ay * by[m] - b
            sv[m] = s
            if s > smax:
                smax = s
            if s < smin:
                smin = s
        if smax <= tol:
            continue
        if smin >= -tol:
            return [], [], [], STATUS_EMPTY

        nn = 0
        for m in range(nv):
            m2 = m + 1
            if m2 == nv:
                m2 = 0
            si = sv[m]
            sj = sv[m2]
            if si <= 0.0:
                if nn >= MAXV - 2:
                    raise OverflowError("cell vertex buffer overflow")
                cx[nn] = bx[m]; cy[nn] = by[m]; cc[nn] = bc[m]; nn += 1
                if sj > 0.0:
                    tt = si / (si - sj)
                    cx[nn] = bx[m] + tt * (bx[m2] - bx[m])
                    cy[nn] = by[m] + tt * (by[m2] - by[m])
                    cc[nn] = jj
                    nn += 1
            elif sj <= 0.0:
                if nn >= MAXV - 1:
                    raise OverflowError("cell vertex buffer overflow")
                tt = si / (si - sj)
                cx[nn] = bx[m] + tt * (bx[m2] - bx[m])
                cy[nn] = by[m] + tt * (by[m2] - by[m])
                cc[nn] = bc[m]
                nn += 1
        if nn < 3:
            return [], [], [], STATUS_EMPTY
        for m in range(nn):
            bx[m] = cx[m]
            by[m] = cy[m]
            bc[m] = cc[m]
        nv = nn

        r2max = 0.0
        for m in range(nv):
            dx = bx[m] - xi
            dy = by[m] - yi
            d2 = dx * dx + dy * dy
            if d2 > r2max:
                r2max = d2

    xs = [0.0] * nv
    ys = [0.0] * nv
    codes = [0] * nv
    for m in range(nv):
        xs[m] = bx[m]
        ys[m] = by[m]
        codes[m] = bc[m]
    if not stopped and not complete:
        return xs, ys, codes, STATUS_EXHAUSTED
    return xs, ys, codes, STATUS_OK
