"""Pure-Python versions of the scalar kernels in ``_core.pyx``.

Both modules expose the same four functions with identical semantics.
"""
import math

import numpy as np

_TINY = 2.2250738585072014e-308
_EPS = 2.220446049250313e-16


def _pivmin(e):
    m = 1.0
    for v in e:
        if v * v > m:
            m = v * v
    return _TINY * m / _EPS


def sturm_count(d, e, x):
    """Number of eigenvalues of the symmetric tridiagonal matrix
    ``(d, e)`` that are strictly less than ``x``."""
    n = len(d)
    pivmin = _pivmin(e)
    count = 0
    q = d[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0:
        count += 1
    for i in range(1, n):
        q = d[i] - x - e[i - 1] * e[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0:
            count += 1
    return count


def tridiag_eigvalsh(d, e, maxiter=200):
    """All eigenvalues of a symmetric tridiagonal matrix by Sturm bisection,
    ascending."""
    d = [float(v) for v in d]
    e = [float(v) for v in e]
    n = len(d)
    if n == 0:
        return np.empty(0)
    lo = hi = d[0]
    for i in range(n):
        r = (abs(e[i - 1]) if i > 0 else 0.0) + (abs(e[i]) if i < n - 1 else 0.0)
        lo = min(lo, d[i] - r)
        hi = max(hi, d[i] + r)
    span = max(abs(lo), abs(hi), 1e-300)
    lo -= 2 * _EPS * span + _TINY
    hi += 2 * _EPS * span + _TINY
    out = np.empty(n)
    for k in range(n):
        a, b = lo, hi
        for _ in range(maxiter):
            m = 0.5 * (a + b)
            if m <= a or m >= b or (b - a) <= 2 * _EPS * max(abs(a), abs(b)) + _TINY:
                break
            if sturm_count(d, e, m) > k:
                b = m
            else:
                a = m
        out[k] = 0.5 * (a + b)
        lo = a
    return out


def matching_residual(lam, t):
    """Log-derivative mismatch at the interface for the principal branch."""
    s = math.sqrt(lam)
    k = math.sqrt(lam * t)
    return s * math.tan(s) - k * math.tanh(k)


def shooting_bisect(t, lo, hi, tol=1e-12, maxiter=400):
    """Root of ``matching_residual(., t)`` bracketed by ``[lo, hi]``."""
    flo = matching_residual(lo, t)
    fhi = matching_residual(hi, t)
    if flo * fhi > 0:
        raise ValueError("interval does not bracket a root")
    for _ in range(maxiter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        fm = matching_residual(mid, t)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return 0.5 * (lo + hi)
