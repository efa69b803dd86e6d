# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled geometry kernels. Mirrors py_impl operation-for-operation so both
backends produce identical floats."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY

cnp.import_array()

BRANCH_START = 0
BRANCH_END = 1
BRANCH_INTERIOR = 2

TIE_EPS = 1e-9
HULL_EPS = 1e-12

cdef double _TIE_EPS = 1e-9
cdef double _HULL_EPS = 1e-12


cdef inline double _edge_dist(double ax, double ay, double bx, double by,
                              double x, double y, double* t_out) nogil:
    cdef double ex = bx - ax
    cdef double ey = by - ay
    cdef double qax = x - ax
    cdef double qay = y - ay
    cdef double qbx = x - bx
    cdef double qby = y - by
    cdef double ee = ex * ex + ey * ey
    cdef double t = (qax * ex + qay * ey) / ee
    t_out[0] = t
    if t < 0.0:
        return sqrt(qax * qax + qay * qay)
    elif t > 1.0:
        return sqrt(qbx * qbx + qby * qby)
    else:
        return fabs(ex * qay - ey * qax) / sqrt(ee)


def segment_distances(const double[:, ::1] verts, double x, double y):
    cdef Py_ssize_t n = verts.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dist = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t = np.empty(n)
    cdef Py_ssize_t k, k1
    cdef double tk
    for k in range(n):
        k1 = (k + 1) % n
        dist[k] = _edge_dist(verts[k, 0], verts[k, 1], verts[k1, 0], verts[k1, 1],
                             x, y, &tk)
        t[k] = tk
    return dist, t


def polygon_distance(const double[:, ::1] verts, double x, double y):
    cdef Py_ssize_t n = verts.shape[0]
    cdef double dmin = INFINITY
    cdef double d, tk
    cdef Py_ssize_t k, k1, kbest
    for k in range(n):
        k1 = (k + 1) % n
        d = _edge_dist(verts[k, 0], verts[k, 1], verts[k1, 0], verts[k1, 1], x, y, &tk)
        if d < dmin:
            dmin = d
    kbest = 0
    for k in range(n):
        k1 = (k + 1) % n
        d = _edge_dist(verts[k, 0], verts[k, 1], verts[k1, 0], verts[k1, 1], x, y, &tk)
        if d <= dmin + _TIE_EPS:
            kbest = k
            break
    k1 = (kbest + 1) % n
    d = _edge_dist(verts[kbest, 0], verts[kbest, 1], verts[k1, 0], verts[k1, 1],
                   x, y, &tk)
    cdef int branch
    if tk < 0.0:
        branch = BRANCH_START
    elif tk > 1.0:
        branch = BRANCH_END
    else:
        branch = BRANCH_INTERIOR
    return d, kbest, branch


cdef inline bint _contains(const double[:, ::1] verts, Py_ssize_t n,
                           double x, double y) nogil:
    cdef bint inside = False
    cdef Py_ssize_t i, j
    cdef double xa, ya, xb, yb, xs
    for i in range(n):
        j = (i + 1) % n
        xa = verts[i, 0]
        ya = verts[i, 1]
        xb = verts[j, 0]
        yb = verts[j, 1]
        if (ya > y) != (yb > y):
            xs = (xb - xa) * (y - ya) / (yb - ya) + xa
            if x < xs:
                inside = not inside
    return inside


def polygon_contains(const double[:, ::1] verts, double x, double y):
    return bool(_contains(verts, verts.shape[0], x, y))


def polygon_contains_many(const double[:, ::1] verts, const double[:, ::1] pts):
    cdef Py_ssize_t n = verts.shape[0]
    cdef Py_ssize_t m = pts.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, cast=True] out = np.empty(m, dtype=bool)
    cdef Py_ssize_t i
    for i in range(m):
        out[i] = _contains(verts, n, pts[i, 0], pts[i, 1])
    return out


def raycast(const double[:, ::1] segments, const double[:, ::1] dirs,
            double max_range):
    cdef Py_ssize_t m = segments.shape[0]
    cdef Py_ssize_t nb = dirs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.full(nb, np.inf)
    if m == 0 or nb == 0:
        return out
    cdef Py_ssize_t b, k
    cdef double dx, dy, x1, y1, ex, ey, det, t, s, best
    for b in range(nb):
        dx = dirs[b, 0]
        dy = dirs[b, 1]
        best = INFINITY
        for k in range(m):
            x1 = segments[k, 0]
            y1 = segments[k, 1]
            ex = segments[k, 2] - x1
            ey = segments[k, 3] - y1
            det = ex * dy - ey * dx
            if det == 0.0:
                continue
            t = (ex * y1 - ey * x1) / det
            s = (dx * y1 - dy * x1) / det
            if s >= 0.0 and s <= 1.0 and t > 1e-12 and t <= max_range:
                if t < best:
                    best = t
        out[b] = best
    return out


def hull_chain(const double[:, ::1] pts):
    cdef Py_ssize_t n = pts.shape[0]
    if n < 3:
        return np.arange(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] lower = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] upper = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t nl = 0, nu = 0
    cdef Py_ssize_t i, o, a
    cdef double cr
    for i in range(n):
        while nl >= 2:
            o = lower[nl - 2]
            a = lower[nl - 1]
            cr = (pts[a, 0] - pts[o, 0]) * (pts[i, 1] - pts[o, 1]) - \
                 (pts[a, 1] - pts[o, 1]) * (pts[i, 0] - pts[o, 0])
            if cr <= _HULL_EPS:
                nl -= 1
            else:
                break
        lower[nl] = i
        nl += 1
    for i in range(n - 1, -1, -1):
        while nu >= 2:
            o = upper[nu - 2]
            a = upper[nu - 1]
            cr = (pts[a, 0] - pts[o, 0]) * (pts[i, 1] - pts[o, 1]) - \
                 (pts[a, 1] - pts[o, 1]) * (pts[i, 0] - pts[o, 0])
            if cr <= _HULL_EPS:
                nu -= 1
            else:
                break
        upper[nu] = i
        nu += 1
    return np.concatenate([lower[: nl - 1], upper[: nu - 1]])
