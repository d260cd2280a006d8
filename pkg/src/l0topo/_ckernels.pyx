# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the cellwise kernels in ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

cdef enum:
    BINARY = 1


def p1_triplets(const double[:, ::1] nodes, const long long[:, ::1] cells):
    cdef Py_ssize_t nc = cells.shape[0]
    cdef Py_ssize_t e, a, b, pos
    cdef double bb[3]
    cdef double cc[3]
    cdef double xs[3]
    cdef double ys[3]
    cdef double area, mdiag, moff
    rows_arr = np.empty(9 * nc, dtype=np.int64)
    cols_arr = np.empty(9 * nc, dtype=np.int64)
    k_arr = np.empty(9 * nc, dtype=np.float64)
    m_arr = np.empty(9 * nc, dtype=np.float64)
    cdef long long[::1] rows = rows_arr
    cdef long long[::1] cols = cols_arr
    cdef double[::1] kv = k_arr
    cdef double[::1] mv = m_arr
    for e in range(nc):
        for a in range(3):
            xs[a] = nodes[cells[e, a], 0]
            ys[a] = nodes[cells[e, a], 1]
        for a in range(3):
            bb[a] = ys[(a + 1) % 3] - ys[(a + 2) % 3]
            cc[a] = xs[(a + 2) % 3] - xs[(a + 1) % 3]
        area = 0.5 * (bb[0] * cc[1] - bb[1] * cc[0])
        mdiag = area / 6.0
        moff = area / 12.0
        pos = 9 * e
        for a in range(3):
            for b in range(3):
                rows[pos] = cells[e, a]
                cols[pos] = cells[e, b]
                kv[pos] = (bb[a] * bb[b] + cc[a] * cc[b]) / (4.0 * area)
                mv[pos] = mdiag if a == b else moff
                pos += 1
    return rows_arr, cols_arr, k_arr, m_arr


cdef inline double _clip(double v, double lo, double hi) nogil:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


def pointwise_minimizer(p, double alpha, double ua, double ub):
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64).ravel()
    out_arr = np.empty(pv.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    for i in range(pv.shape[0]):
        out[i] = _clip(-pv[i] / alpha, ua, ub)
    return out_arr.reshape(np.shape(p))


def hbar(p, int law, double alpha, double ua, double ub):
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64).ravel()
    out_arr = np.empty(pv.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double u
    for i in range(pv.shape[0]):
        if law == BINARY:
            out[i] = pv[i]
        else:
            u = _clip(-pv[i] / alpha, ua, ub)
            out[i] = pv[i] * u + 0.5 * alpha * u * u
    return out_arr.reshape(np.shape(p))


def topo_derivative(p, in_set, beta, int law, double alpha, double ua, double ub):
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef const cnp.uint8_t[::1] inside = np.ascontiguousarray(in_set, dtype=np.uint8)
    cdef const double[::1] bv = np.ascontiguousarray(
        np.broadcast_to(np.asarray(beta, dtype=np.float64), (pv.shape[0],)))
    cdef Py_ssize_t n = pv.shape[0]
    dj_arr = np.empty(n, dtype=np.float64)
    rho_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] dj = dj_arr
    cdef double[::1] rho = rho_arr
    cdef Py_ssize_t i
    cdef double u, h, val
    for i in range(n):
        if law == BINARY:
            h = pv[i]
        else:
            u = _clip(-pv[i] / alpha, ua, ub)
            h = pv[i] * u + 0.5 * alpha * u * u
        val = bv[i] + h
        dj[i] = -val if inside[i] else val
        rho[i] = dj[i] if dj[i] < 0.0 else 0.0
    return dj_arr, rho_arr


def box_residual(u, p, mask, double alpha, double ua, double ub):
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef const cnp.uint8_t[::1] mv = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t i
    cdef double r, best = 0.0
    for i in range(uv.shape[0]):
        if mv[i]:
            r = fabs(uv[i] - _clip(-pv[i] / alpha, ua, ub))
            if r > best:
                best = r
    return best
