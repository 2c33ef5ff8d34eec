# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_kernels_py``.

Signatures and arithmetic order match the pure-Python versions.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, fabs, NAN
from libc.stdlib cimport malloc, free, realloc

cnp.import_array()


cdef inline double _horner(const double[::1] c, double u) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(c.shape[0] - 1, -1, -1):
        acc = acc * u + c[i]
    return acc


def rational_eval_real(num, den, u):
    cdef const double[::1] p = np.ascontiguousarray(num, dtype=np.float64)
    cdef const double[::1] q = np.ascontiguousarray(den, dtype=np.float64)
    arr = np.asarray(u, dtype=np.float64)
    cdef const double[::1] x = np.ascontiguousarray(arr.ravel())
    out = np.empty(x.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t j
    with nogil:
        for j in range(x.shape[0]):
            o[j] = _horner(p, x[j]) / _horner(q, x[j])
    return out.reshape(arr.shape)


def cf_truncate_array(double m, int depth, u):
    arr = np.asarray(u, dtype=np.float64)
    cdef const double[::1] x = np.ascontiguousarray(arr.ravel())
    out = np.empty(x.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t j
    cdef int level
    cdef double t
    with nogil:
        for j in range(x.shape[0]):
            t = 2.0 * m
            for level in range(depth - 1):
                t = 2.0 * m + x[j] / t
            o[j] = m + x[j] / t
    return out.reshape(arr.shape)


def chain_omega(diag_a, diag_z, off_a, off_z, a, z, c, u):
    cdef const double complex[::1] da = np.ascontiguousarray(diag_a, dtype=np.complex128)
    cdef const double complex[::1] dz = np.ascontiguousarray(diag_z, dtype=np.complex128)
    cdef const double complex[::1] oa = np.ascontiguousarray(off_a, dtype=np.complex128)
    cdef const double complex[::1] oz = np.ascontiguousarray(off_z, dtype=np.complex128)
    cdef const double complex[::1] va = np.ascontiguousarray(a, dtype=np.complex128)
    cdef const double complex[::1] vz = np.ascontiguousarray(z, dtype=np.complex128)
    cdef double complex cc = complex(c)
    arr = np.asarray(u, dtype=np.float64)
    cdef const double[::1] x = np.ascontiguousarray(arr.ravel())
    out = np.empty(x.shape[0], dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef Py_ssize_t n = da.shape[0]
    cdef Py_ssize_t j, alpha
    cdef double uj
    cdef double complex g, w, acc, b, w_prev, g_prev
    cdef bint ok
    with nogil:
        for j in range(x.shape[0]):
            uj = x[j]
            g = da[n - 1] + dz[n - 1] * uj
            w = va[n - 1] + vz[n - 1] * uj
            acc = cc
            ok = True
            alpha = n - 1
            while alpha >= 0:
                if g == 0:
                    ok = False
                    break
                acc = acc + 0.5 * w * w / g
                if alpha == 0:
                    break
                b = oa[alpha - 1] + oz[alpha - 1] * uj
                w_prev = va[alpha - 1] + vz[alpha - 1] * uj
                g_prev = da[alpha - 1] + dz[alpha - 1] * uj
                w = w_prev - b * w / g
                g = g_prev - b * b / g
                alpha -= 1
            if ok:
                o[j] = acc
            else:
                o[j] = NAN + 1j * NAN
    return out.reshape(arr.shape)


def log_overlap_sum(w1, w2):
    cdef const double[::1] x = np.ascontiguousarray(np.asarray(w1, dtype=np.float64).ravel())
    cdef const double[::1] y = np.ascontiguousarray(np.asarray(w2, dtype=np.float64).ravel())
    cdef Py_ssize_t j
    cdef double total = 0.0
    with nogil:
        for j in range(x.shape[0]):
            total += 0.5 * log(2.0 * sqrt(x[j] * y[j]) / (x[j] + y[j]))
    return total


cdef struct Interval:
    double lo
    double hi
    double est


cdef inline double _radial_point(const double[::1] p, const double[::1] q,
                                 double mu, int d, double upper, double t) noexcept nogil:
    cdef double k = upper * t * t
    cdef double u, w, r, val, kp
    cdef int i
    if k <= 0.0:
        return 0.0
    u = k * k
    w = _horner(p, u) / _horner(q, u)
    r = sqrt(mu * mu + u)
    val = 0.5 * log(2.0 * sqrt(fabs(w) * r) / fabs(w + r))
    kp = 1.0
    for i in range(d - 1):
        kp = kp * k
    return 2.0 * upper * t * kp * val


cdef inline double _rule(const double[::1] p, const double[::1] q, double mu, int d,
                         double upper, const double[::1] nodes, const double[::1] weights,
                         double lo, double hi) noexcept nogil:
    cdef double half = 0.5 * (hi - lo)
    cdef double mid = 0.5 * (hi + lo)
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(nodes.shape[0]):
        acc += weights[i] * _radial_point(p, q, mu, d, upper, mid + half * nodes[i])
    return half * acc


def radial_log_overlap(num, den, double mu, int d, double upper, nodes, weights,
                       double tol, long max_eval):
    cdef const double[::1] p = np.ascontiguousarray(num, dtype=np.float64)
    cdef const double[::1] q = np.ascontiguousarray(den, dtype=np.float64)
    cdef const double[::1] xn = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const double[::1] xw = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t npts = xn.shape[0]
    cdef Py_ssize_t cap = 64, top = 0
    cdef Interval* stack = <Interval*> malloc(cap * sizeof(Interval))
    cdef Interval* grown
    cdef Interval cur
    cdef double value = 0.0, err = 0.0, left, right, diff, mid
    cdef long n_eval
    cdef bint ok = True
    if stack == NULL:
        raise MemoryError()
    try:
        with nogil:
            stack[0].lo = 0.0
            stack[0].hi = 1.0
            stack[0].est = _rule(p, q, mu, d, upper, xn, xw, 0.0, 1.0)
            top = 1
            n_eval = npts
            while top > 0:
                top -= 1
                cur = stack[top]
                mid = 0.5 * (cur.lo + cur.hi)
                left = _rule(p, q, mu, d, upper, xn, xw, cur.lo, mid)
                right = _rule(p, q, mu, d, upper, xn, xw, mid, cur.hi)
                n_eval += 2 * npts
                diff = fabs(left + right - cur.est)
                if diff <= tol * (cur.hi - cur.lo) or (cur.hi - cur.lo) < 1e-13:
                    value += left + right
                    err += diff
                    continue
                if n_eval > max_eval:
                    ok = False
                    break
                if top + 2 > cap:
                    cap *= 2
                    grown = <Interval*> realloc(stack, cap * sizeof(Interval))
                    if grown == NULL:
                        ok = False
                        break
                    stack = grown
                stack[top].lo = mid
                stack[top].hi = cur.hi
                stack[top].est = right
                stack[top + 1].lo = cur.lo
                stack[top + 1].hi = mid
                stack[top + 1].est = left
                top += 2
    finally:
        free(stack)
    return value, err, n_eval, bool(ok)
