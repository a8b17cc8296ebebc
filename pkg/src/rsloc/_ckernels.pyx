# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: ray/scene first-hit casting and L-shape closeness scores.

Signatures and results match :mod:`rsloc._pykernels` exactly.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs, INFINITY

cnp.import_array()


def cast_rays(const double[::1] origin, const double[:, ::1] dirs, const double[:, ::1] boxes,
              bint ground, double max_range):
    cdef Py_ssize_t n = dirs.shape[0], m = boxes.shape[0]
    cdef Py_ssize_t i, j
    cdef double ox = origin[0], oy = origin[1], oz = origin[2]
    cdef double dx, dy, dz, best, t, lox, loy, ldx, ldy, c, s
    cdef double tnear, tfar, t1, t2, tmp, hx, hy, z0, z1
    cdef int tag
    t_out = np.full(n, np.inf)
    tag_out = np.full(n, -1, dtype=np.int32)
    cdef double[::1] tv = t_out
    cdef int[::1] gv = tag_out

    for i in range(n):
        dx = dirs[i, 0]
        dy = dirs[i, 1]
        dz = dirs[i, 2]
        best = INFINITY
        tag = -1
        if ground and dz < 0.0:
            t = -oz / dz
            if t > 0.0:
                best = t
                tag = 0
        for j in range(m):
            c = boxes[j, 2]
            s = boxes[j, 3]
            hx = boxes[j, 4]
            hy = boxes[j, 5]
            z0 = boxes[j, 6]
            z1 = boxes[j, 7]
            lox = c * (ox - boxes[j, 0]) + s * (oy - boxes[j, 1])
            loy = -s * (ox - boxes[j, 0]) + c * (oy - boxes[j, 1])
            ldx = c * dx + s * dy
            ldy = -s * dx + c * dy
            tnear = -INFINITY
            tfar = INFINITY
            # x slab
            if fabs(ldx) < 1e-300:
                if lox < -hx or lox > hx:
                    continue
            else:
                t1 = (-hx - lox) / ldx
                t2 = (hx - lox) / ldx
                if t1 > t2:
                    tmp = t1; t1 = t2; t2 = tmp
                if t1 > tnear: tnear = t1
                if t2 < tfar: tfar = t2
            # y slab
            if fabs(ldy) < 1e-300:
                if loy < -hy or loy > hy:
                    continue
            else:
                t1 = (-hy - loy) / ldy
                t2 = (hy - loy) / ldy
                if t1 > t2:
                    tmp = t1; t1 = t2; t2 = tmp
                if t1 > tnear: tnear = t1
                if t2 < tfar: tfar = t2
            # z slab
            if fabs(dz) < 1e-300:
                if oz < z0 or oz > z1:
                    continue
            else:
                t1 = (z0 - oz) / dz
                t2 = (z1 - oz) / dz
                if t1 > t2:
                    tmp = t1; t1 = t2; t2 = tmp
                if t1 > tnear: tnear = t1
                if t2 < tfar: tfar = t2
            if tnear <= tfar and tnear > 0.0 and tnear < best:
                best = tnear
                tag = <int>(j + 1)
        if tag >= 0 and best <= max_range:
            tv[i] = best
            gv[i] = tag
    return t_out, tag_out


def closeness_scores(const double[:, ::1] points, const double[::1] thetas, double clamp):
    cdef Py_ssize_t n = points.shape[0], k = thetas.shape[0]
    cdef Py_ssize_t i, a
    cdef double c, s, p1, p2, lo1, hi1, lo2, hi2, d1, d2, acc
    out = np.zeros(k)
    cdef double[::1] ov = out
    buf = np.empty((2, n))
    cdef double[:, ::1] b = buf
    for a in range(k):
        c = cos(thetas[a])
        s = sin(thetas[a])
        lo1 = INFINITY; hi1 = -INFINITY; lo2 = INFINITY; hi2 = -INFINITY
        for i in range(n):
            p1 = points[i, 0] * c + points[i, 1] * s
            p2 = -points[i, 0] * s + points[i, 1] * c
            b[0, i] = p1
            b[1, i] = p2
            if p1 < lo1: lo1 = p1
            if p1 > hi1: hi1 = p1
            if p2 < lo2: lo2 = p2
            if p2 > hi2: hi2 = p2
        acc = 0.0
        for i in range(n):
            d1 = hi1 - b[0, i]
            if b[0, i] - lo1 < d1: d1 = b[0, i] - lo1
            d2 = hi2 - b[1, i]
            if b[1, i] - lo2 < d2: d2 = b[1, i] - lo2
            if d1 < clamp: d1 = clamp
            if d2 < clamp: d2 = clamp
            acc += 1.0 / d1 + 1.0 / d2
        ov[a] = acc
    return out
