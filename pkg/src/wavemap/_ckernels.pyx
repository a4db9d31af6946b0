# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: reflective fourth-order stencils and RATTLE stages.

Mirrors ``wavemap._kernels_py`` operation for operation.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, copysign, NAN

cnp.import_array()

NAME = "cython"


cdef void _reflect_tables(Py_ssize_t n, double inner, double outer,
                          Py_ssize_t[:, ::1] idx, double[:, ::1] sgn) noexcept nogil:
    # idx[k, i], sgn[k, i] for stencil offsets k - 2 in {-2, ..., 2}
    cdef Py_ssize_t i, k, j
    for k in range(5):
        for i in range(n):
            j = i + k - 2
            if j < 0:
                idx[k, i] = -j
                sgn[k, i] = inner
            elif j > n - 1:
                idx[k, i] = 2 * (n - 1) - j
                sgn[k, i] = outer
            else:
                idx[k, i] = j
                sgn[k, i] = 1.0


cdef void _dx(const double[:, ::1] f, double[:, ::1] out, double inner, double outer,
              double inv12h, Py_ssize_t[:, ::1] idx, double[:, ::1] sgn) noexcept nogil:
    cdef Py_ssize_t n0 = f.shape[0], n1 = f.shape[1], i, j
    cdef Py_ssize_t a, b, c, d
    cdef double sa, sb, sc, sd
    _reflect_tables(n0, inner, outer, idx, sgn)
    for i in range(n0):
        a = idx[0, i]; b = idx[1, i]; c = idx[3, i]; d = idx[4, i]
        sa = sgn[0, i]; sb = sgn[1, i]; sc = sgn[3, i]; sd = sgn[4, i]
        for j in range(n1):
            out[i, j] = (((sa * f[a, j]) - 8.0 * (sb * f[b, j]))
                         + 8.0 * (sc * f[c, j]) - (sd * f[d, j])) * inv12h


cdef void _dy(const double[:, ::1] f, double[:, ::1] out, double inner, double outer,
              double inv12h, Py_ssize_t[:, ::1] idx, double[:, ::1] sgn) noexcept nogil:
    cdef Py_ssize_t n0 = f.shape[0], n1 = f.shape[1], i, j
    _reflect_tables(n1, inner, outer, idx, sgn)
    for i in range(n0):
        for j in range(n1):
            out[i, j] = (((sgn[0, j] * f[i, idx[0, j]]) - 8.0 * (sgn[1, j] * f[i, idx[1, j]]))
                         + 8.0 * (sgn[3, j] * f[i, idx[3, j]])
                         - (sgn[4, j] * f[i, idx[4, j]])) * inv12h


def gradient(f, int axis, double inner, double outer, double inv12h):
    cdef double[:, ::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef Py_ssize_t n = fv.shape[axis]
    out = np.empty((fv.shape[0], fv.shape[1]), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t[:, ::1] idx = np.empty((5, n), dtype=np.intp)
    cdef double[:, ::1] sgn = np.empty((5, n), dtype=np.float64)
    with nogil:
        if axis == 0:
            _dx(fv, ov, inner, outer, inv12h, idx, sgn)
        else:
            _dy(fv, ov, inner, outer, inv12h, idx, sgn)
    return out


cdef void _lap(const double[:, ::1] f, double[:, ::1] out, double[:, ::1] g,
               double[:, ::1] lxx, double px, double py, double inv12h,
               Py_ssize_t[:, ::1] idx, double[:, ::1] sgn) noexcept nogil:
    cdef Py_ssize_t n0 = f.shape[0], n1 = f.shape[1], i, j
    _dx(f, g, px, 1.0, inv12h, idx, sgn)
    _dx(g, lxx, -px, -1.0, inv12h, idx, sgn)
    _dy(f, g, py, 1.0, inv12h, idx, sgn)
    _dy(g, out, -py, -1.0, inv12h, idx, sgn)
    for i in range(n0):
        for j in range(n1):
            out[i, j] = lxx[i, j] + out[i, j]


def laplacian(f, double px, double py, double inv12h):
    cdef double[:, ::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef Py_ssize_t n0 = fv.shape[0], n1 = fv.shape[1]
    out = np.empty((n0, n1), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef double[:, ::1] g = np.empty((n0, n1), dtype=np.float64)
    cdef double[:, ::1] lxx = np.empty((n0, n1), dtype=np.float64)
    cdef Py_ssize_t[:, ::1] idx = np.empty((5, max(n0, n1)), dtype=np.intp)
    cdef double[:, ::1] sgn = np.empty((5, max(n0, n1)), dtype=np.float64)
    with nogil:
        _lap(fv, ov, g, lxx, px, py, inv12h, idx, sgn)
    return out


def laplacian3(q, parities_x, parities_y, double inv12h):
    cdef double[:, :, ::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef Py_ssize_t nc = qv.shape[0], n0 = qv.shape[1], n1 = qv.shape[2], c
    out = np.empty((nc, n0, n1), dtype=np.float64)
    cdef double[:, :, ::1] ov = out
    cdef double[:, ::1] g = np.empty((n0, n1), dtype=np.float64)
    cdef double[:, ::1] lxx = np.empty((n0, n1), dtype=np.float64)
    cdef Py_ssize_t[:, ::1] idx = np.empty((5, max(n0, n1)), dtype=np.intp)
    cdef double[:, ::1] sgn = np.empty((5, max(n0, n1)), dtype=np.float64)
    cdef double[::1] pxs = np.asarray(parities_x, dtype=np.float64)
    cdef double[::1] pys = np.asarray(parities_y, dtype=np.float64)
    with nogil:
        for c in range(nc):
            _lap(qv[c], ov[c], g, lxx, pxs[c], pys[c], inv12h, idx, sgn)
    return out


def rattle_position(q, p, force, double dt):
    cdef double[:, :, ::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef double[:, :, ::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef double[:, :, ::1] fv = np.ascontiguousarray(force, dtype=np.float64)
    cdef Py_ssize_t n0 = qv.shape[1], n1 = qv.shape[2], i, j, k
    q_new = np.empty((3, n0, n1), dtype=np.float64)
    p_half = np.empty((3, n0, n1), dtype=np.float64)
    c_arr = np.empty((n0, n1), dtype=np.float64)
    disc_arr = np.empty((n0, n1), dtype=np.float64)
    cdef double[:, :, ::1] qn = q_new
    cdef double[:, :, ::1] ph = p_half
    cdef double[:, ::1] cv = c_arr
    cdef double[:, ::1] dv = disc_arr
    cdef double half_dt2 = 0.5 * dt * dt
    cdef double half_dt = 0.5 * dt
    cdef double a0, a1, a2, qq, aq, aa, disc, c, cdt
    with nogil:
        for i in range(n0):
            for j in range(n1):
                a0 = qv[0, i, j] + dt * pv[0, i, j] + half_dt2 * fv[0, i, j]
                a1 = qv[1, i, j] + dt * pv[1, i, j] + half_dt2 * fv[1, i, j]
                a2 = qv[2, i, j] + dt * pv[2, i, j] + half_dt2 * fv[2, i, j]
                qq = qv[0, i, j] * qv[0, i, j] + qv[1, i, j] * qv[1, i, j] + qv[2, i, j] * qv[2, i, j]
                aq = a0 * qv[0, i, j] + a1 * qv[1, i, j] + a2 * qv[2, i, j]
                aa = a0 * a0 + a1 * a1 + a2 * a2
                disc = aq * aq - qq * (aa - 1.0)
                if disc >= 0.0:
                    c = (1.0 - aa) / (aq + copysign(sqrt(disc), aq))
                else:
                    c = NAN
                cv[i, j] = c
                dv[i, j] = disc
                qn[0, i, j] = a0 + c * qv[0, i, j]
                qn[1, i, j] = a1 + c * qv[1, i, j]
                qn[2, i, j] = a2 + c * qv[2, i, j]
                cdt = c / dt
                for k in range(3):
                    ph[k, i, j] = pv[k, i, j] + half_dt * fv[k, i, j] + cdt * qv[k, i, j]
    return q_new, p_half, c_arr, disc_arr


def rattle_velocity(q_new, p_half, force_new, double dt):
    cdef double[:, :, ::1] qv = np.ascontiguousarray(q_new, dtype=np.float64)
    cdef double[:, :, ::1] pv = np.ascontiguousarray(p_half, dtype=np.float64)
    cdef double[:, :, ::1] fv = np.ascontiguousarray(force_new, dtype=np.float64)
    cdef Py_ssize_t n0 = qv.shape[1], n1 = qv.shape[2], i, j
    p_new = np.empty((3, n0, n1), dtype=np.float64)
    d_arr = np.empty((n0, n1), dtype=np.float64)
    cdef double[:, :, ::1] pn = p_new
    cdef double[:, ::1] dv = d_arr
    cdef double half_dt = 0.5 * dt
    cdef double b0, b1, b2, d
    with nogil:
        for i in range(n0):
            for j in range(n1):
                b0 = pv[0, i, j] + half_dt * fv[0, i, j]
                b1 = pv[1, i, j] + half_dt * fv[1, i, j]
                b2 = pv[2, i, j] + half_dt * fv[2, i, j]
                d = -(b0 * qv[0, i, j] + b1 * qv[1, i, j] + b2 * qv[2, i, j]) / (
                    qv[0, i, j] * qv[0, i, j] + qv[1, i, j] * qv[1, i, j] + qv[2, i, j] * qv[2, i, j])
                dv[i, j] = d
                pn[0, i, j] = b0 + d * qv[0, i, j]
                pn[1, i, j] = b1 + d * qv[1, i, j]
                pn[2, i, j] = b2 + d * qv[2, i, j]
    return p_new, d_arr
