# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops.

Every function here has a numpy twin in ``_kernels_py`` with the same
signature and the same floating-point operation order.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, fabs
from libc.stdlib cimport malloc, free

cnp.import_array()

DEF GROWTH_LIMIT = 5
DEF SETTLE_COUNT = 3


cdef inline Py_ssize_t _start_index(double x, Py_ssize_t kmax) noexcept nogil:
    return <Py_ssize_t>sqrt(<double>(kmax * kmax) + 80.0 * x) + 10


cdef void _bessel_scaled(double x, Py_ssize_t kmax, double* out) noexcept nogil:
    # Backward ratio recurrence r_j = I_j/I_{j-1}; normalised with
    # exp(-x) * (I_0 + 2 * sum_{k>=1} I_k) = 1.
    cdef Py_ssize_t n = _start_index(x, kmax)
    cdef Py_ssize_t j
    cdef double r = 0.0
    cdef double tail = 0.0
    for j in range(n, 0, -1):
        r = x / (2.0 * j + x * r)
        tail = r * (1.0 + tail)
        if j <= kmax:
            out[j] = r
    out[0] = 1.0 / (1.0 + 2.0 * tail)
    for j in range(1, kmax + 1):
        out[j] = out[j - 1] * out[j]


def bessel_i_scaled_table(double[::1] x, Py_ssize_t kmax):
    """Rows of exp(-x) I_k(x) for k = 0..kmax."""
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t i
    out = np.empty((m, kmax + 1), dtype=np.float64)
    cdef double[:, ::1] ov = out
    with nogil:
        for i in range(m):
            _bessel_scaled(x[i], kmax, &ov[i, 0])
    return out


def series_sum(double[::1] xa, double[::1] xb, double[::1] xc,
               Py_ssize_t kmax, double term_tol):
    """sum_k eps_k (-1)^k Is_k(xa) Is_k(xb) Is_k(xc) with early termination.

    Returns ``(sums, status)``; status 0 settled, 1 hit kmax, 2 terms grew.
    """
    cdef Py_ssize_t m = xa.shape[0]
    sums = np.empty(m, dtype=np.float64)
    status = np.zeros(m, dtype=np.int8)
    cdef double[::1] sv = sums
    cdef signed char[::1] st = status
    cdef double* ba = <double*>malloc(3 * (kmax + 1) * sizeof(double))
    if ba == NULL:
        raise MemoryError()
    cdef double* bb = ba + (kmax + 1)
    cdef double* bc = bb + (kmax + 1)
    cdef Py_ssize_t i, k
    cdef double s, t, eps, prev
    cdef int small, grow
    try:
        with nogil:
            for i in range(m):
                _bessel_scaled(xa[i], kmax, ba)
                _bessel_scaled(xb[i], kmax, bb)
                _bessel_scaled(xc[i], kmax, bc)
                s = 0.0
                prev = 0.0
                small = 0
                grow = 0
                st[i] = 1
                for k in range(kmax + 1):
                    eps = 1.0 if k == 0 else 2.0
                    if k & 1:
                        eps = -eps
                    t = eps * ba[k] * bb[k] * bc[k]
                    s = s + t
                    if k > 0 and fabs(t) > fabs(prev):
                        grow += 1
                    else:
                        grow = 0
                    if grow >= GROWTH_LIMIT:
                        st[i] = 2
                        break
                    if fabs(t) <= term_tol * fabs(s):
                        small += 1
                    else:
                        small = 0
                    if small >= SETTLE_COUNT:
                        st[i] = 0
                        break
                    prev = t
                sv[i] = s
    finally:
        free(ba)
    return sums, status


def tour_products(double[:, :, ::1] pts, bint closed):
    """Product of consecutive step lengths for each tour in ``pts``.

    ``pts`` has shape (samples, points, d); a closed tour adds the step
    from the last point back to the first.
    """
    cdef Py_ssize_t m = pts.shape[0]
    cdef Py_ssize_t npts = pts.shape[1]
    cdef Py_ssize_t d = pts.shape[2]
    cdef Py_ssize_t nsteps = npts if closed else npts - 1
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, s, j, a, b
    cdef double prod, acc, diff
    with nogil:
        for i in range(m):
            prod = 1.0
            for s in range(nsteps):
                a = s
                b = s + 1 if s + 1 < npts else 0
                acc = 0.0
                for j in range(d):
                    diff = pts[i, b, j] - pts[i, a, j]
                    acc = acc + diff * diff
                prod = prod * sqrt(acc)
            ov[i] = prod
    return out


def tour_log_products(double[:, :, ::1] pts, bint closed):
    """Sum of log step lengths; the overflow-safe twin of ``tour_products``."""
    cdef Py_ssize_t m = pts.shape[0]
    cdef Py_ssize_t npts = pts.shape[1]
    cdef Py_ssize_t d = pts.shape[2]
    cdef Py_ssize_t nsteps = npts if closed else npts - 1
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, s, j, a, b
    cdef double total, acc, diff
    with nogil:
        for i in range(m):
            total = 0.0
            for s in range(nsteps):
                a = s
                b = s + 1 if s + 1 < npts else 0
                acc = 0.0
                for j in range(d):
                    diff = pts[i, b, j] - pts[i, a, j]
                    acc = acc + diff * diff
                total = total + 0.5 * log(acc)
            ov[i] = total
    return out
