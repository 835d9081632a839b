# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scalar kernels; see ``_fallback.py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, tan, tanh

cnp.import_array()

cdef double _TINY = 2.2250738585072014e-308
cdef double _EPS = 2.220446049250313e-16


cdef double _pivmin(const double[:] e) nogil:
    cdef double m = 1.0
    cdef Py_ssize_t i
    for i in range(e.shape[0]):
        if e[i] * e[i] > m:
            m = e[i] * e[i]
    return _TINY * m / _EPS


cdef int _count(const double[:] d, const double[:] e, double x, double pivmin) nogil:
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t i
    cdef int count = 0
    cdef double q = d[0] - x
    if fabs(q) < pivmin:
        q = -pivmin
    if q < 0:
        count += 1
    for i in range(1, n):
        q = d[i] - x - e[i - 1] * e[i - 1] / q
        if fabs(q) < pivmin:
            q = -pivmin
        if q < 0:
            count += 1
    return count


def sturm_count(d, e, double x):
    cdef const double[:] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef const double[:] ev = np.ascontiguousarray(e, dtype=np.float64)
    return _count(dv, ev, x, _pivmin(ev))


def tridiag_eigvalsh(d, e, int maxiter=200):
    cdef const double[:] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef const double[:] ev = np.ascontiguousarray(e, dtype=np.float64)
    cdef Py_ssize_t n = dv.shape[0]
    out_arr = np.empty(n)
    if n == 0:
        return out_arr
    cdef double[:] out = out_arr
    cdef double lo = dv[0]
    cdef double hi = dv[0]
    cdef double r, a, b, m, span
    cdef double pivmin = _pivmin(ev)
    cdef Py_ssize_t i, k
    cdef int it
    with nogil:
        for i in range(n):
            r = 0.0
            if i > 0:
                r += fabs(ev[i - 1])
            if i < n - 1:
                r += fabs(ev[i])
            if dv[i] - r < lo:
                lo = dv[i] - r
            if dv[i] + r > hi:
                hi = dv[i] + r
        span = fabs(lo) if fabs(lo) > fabs(hi) else fabs(hi)
        if span < 1e-300:
            span = 1e-300
        lo -= 2 * _EPS * span + _TINY
        hi += 2 * _EPS * span + _TINY
        for k in range(n):
            a = lo
            b = hi
            for it in range(maxiter):
                m = 0.5 * (a + b)
                if m <= a or m >= b or (b - a) <= 2 * _EPS * (fabs(a) if fabs(a) > fabs(b) else fabs(b)) + _TINY:
                    break
                if _count(dv, ev, m, pivmin) > k:
                    b = m
                else:
                    a = m
            out[k] = 0.5 * (a + b)
            lo = a
    return out_arr


cdef inline double _residual(double lam, double t) nogil:
    cdef double s = sqrt(lam)
    cdef double k = sqrt(lam * t)
    return s * tan(s) - k * tanh(k)


def matching_residual(double lam, double t):
    return _residual(lam, t)


def shooting_bisect(double t, double lo, double hi, double tol=1e-12, int maxiter=400):
    cdef double flo = _residual(lo, t)
    cdef double fhi = _residual(hi, t)
    cdef double mid, fm
    cdef int it
    if flo * fhi > 0:
        raise ValueError("interval does not bracket a root")
    for it in range(maxiter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        fm = _residual(mid, t)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo = mid
            flo = fm
        else:
            hi = mid
            fhi = fm
    return 0.5 * (lo + hi)
