# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot per-frame kernels.

Semantics match ``numpy_backend`` exactly (same formulas, same edge
rules); the parity test suite asserts agreement on random inputs.
"""

from libc.math cimport M_PI, acos, fmod, isnan, sqrt

import numpy as np

DEF TWO_PI_C = 6.283185307179586476925286766559

TWO_PI = 2.0 * np.pi
DEGENERATE_NORM = 1e-9

cdef double DEG_NORM = 1e-9


def central_diff(values, double dt):
    """Central difference (x[t+1] - x[t-1]) / (2 dt) over interior samples."""
    v = np.ascontiguousarray(values, dtype=np.float64)
    squeeze = v.ndim == 1
    if squeeze:
        v = v[:, None]
    cdef double[:, ::1] vv = v
    cdef Py_ssize_t T = vv.shape[0]
    cdef Py_ssize_t D = vv.shape[1]
    if T < 3:
        raise ValueError("central_diff needs at least 3 samples")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    out = np.empty((T - 2, D), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t t, d
    for t in range(T - 2):
        for d in range(D):
            o[t, d] = (vv[t + 2, d] - vv[t, d]) / (2.0 * dt)
    return out[:, 0] if squeeze else out


def angle_series(a, b, c):
    """Per-frame angle at vertex b between rays (a-b) and (c-b), radians."""
    aa = np.ascontiguousarray(a, dtype=np.float64)
    bb = np.ascontiguousarray(b, dtype=np.float64)
    cc = np.ascontiguousarray(c, dtype=np.float64)
    cdef double[:, ::1] av = aa
    cdef double[:, ::1] bv = bb
    cdef double[:, ::1] cv = cc
    cdef Py_ssize_t T = av.shape[0]
    out = np.empty(T, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t t
    cdef double ux, uy, uz, wx, wy, wz, nu, nw, cosang
    for t in range(T):
        ux = av[t, 0] - bv[t, 0]
        uy = av[t, 1] - bv[t, 1]
        uz = av[t, 2] - bv[t, 2]
        wx = cv[t, 0] - bv[t, 0]
        wy = cv[t, 1] - bv[t, 1]
        wz = cv[t, 2] - bv[t, 2]
        nu = sqrt(ux * ux + uy * uy + uz * uz)
        nw = sqrt(wx * wx + wy * wy + wz * wz)
        if nu < DEG_NORM or nw < DEG_NORM:
            o[t] = float("nan")
            continue
        cosang = (ux * wx + uy * wy + uz * wz) / (nu * nw)
        if cosang > 1.0:
            cosang = 1.0
        elif cosang < -1.0:
            cosang = -1.0
        o[t] = acos(cosang)
    return out


def unwrap_angles(theta):
    """Unwrap an angle series so successive differences lie in (-pi, pi]."""
    th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef double[::1] tv = th
    cdef Py_ssize_t T = tv.shape[0]
    out = np.empty(T, dtype=np.float64)
    cdef double[::1] o = out
    if T == 0:
        return out
    cdef Py_ssize_t i
    cdef double d, m, acc = 0.0
    o[0] = tv[0]
    for i in range(1, T):
        d = tv[i] - tv[i - 1]
        m = fmod(d + M_PI, TWO_PI_C)
        if m < 0.0:
            m += TWO_PI_C
        m -= M_PI
        if m == -M_PI:
            m = M_PI
        acc += m
        o[i] = tv[0] + acc
    return out


def fill_gaps(values):
    """Fill NaN entries per column by linear interpolation (edges held)."""
    v = np.array(values, dtype=np.float64, order="C")
    squeeze = v.ndim == 1
    if squeeze:
        v = v[:, None]
    cdef double[:, ::1] vv = v
    cdef Py_ssize_t T = vv.shape[0]
    cdef Py_ssize_t D = vv.shape[1]
    idx = np.empty(T, dtype=np.intp)
    cdef Py_ssize_t[::1] finite = idx
    cdef Py_ssize_t d, t, n, k, i0, i1
    cdef double v0, v1, frac
    for d in range(D):
        n = 0
        for t in range(T):
            if not isnan(vv[t, d]):
                finite[n] = t
                n += 1
        if n == 0:
            raise ValueError(f"column {d} has no finite samples")
        if n == T:
            continue
        # leading / trailing holds
        for t in range(finite[0]):
            vv[t, d] = vv[finite[0], d]
        for t in range(finite[n - 1] + 1, T):
            vv[t, d] = vv[finite[n - 1], d]
        # interior gaps
        for k in range(n - 1):
            i0 = finite[k]
            i1 = finite[k + 1]
            if i1 - i0 < 2:
                continue
            v0 = vv[i0, d]
            v1 = vv[i1, d]
            for t in range(i0 + 1, i1):
                frac = <double>(t - i0) / <double>(i1 - i0)
                vv[t, d] = v0 + (v1 - v0) * frac
    out = np.asarray(v)
    return out[:, 0] if squeeze else out
