"""Pure numpy fallback for the compiled kernels in ``_kernels.pyx``.

Operation order mirrors the Cython loops, so ``tour_products`` agrees
bit-for-bit and the Bessel routines agree to rounding.
"""

import numpy as np

GROWTH_LIMIT = 5
SETTLE_COUNT = 3


def _start_index(x, kmax):
    return (np.sqrt(float(kmax * kmax) + 80.0 * x)).astype(np.int64) + 10


def bessel_i_scaled_table(x, kmax):
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = _start_index(x, kmax)
    out = np.empty((x.shape[0], kmax + 1))
    r = np.zeros_like(x)
    tail = np.zeros_like(x)
    top = int(n.max()) if x.size else 0
    for j in range(top, 0, -1):
        active = j <= n
        r = np.where(active, x / (2.0 * j + x * r), 0.0)
        tail = np.where(active, r * (1.0 + tail), 0.0)
        if j <= kmax:
            out[:, j] = r
    out[:, 0] = 1.0 / (1.0 + 2.0 * tail)
    for j in range(1, kmax + 1):
        out[:, j] = out[:, j - 1] * out[:, j]
    return out


def series_sum(xa, xb, xc, kmax, term_tol):
    ta = bessel_i_scaled_table(xa, kmax)
    tb = bessel_i_scaled_table(xb, kmax)
    tc = bessel_i_scaled_table(xc, kmax)
    m = ta.shape[0]
    s = np.zeros(m)
    prev = np.zeros(m)
    small = np.zeros(m, dtype=np.int64)
    grow = np.zeros(m, dtype=np.int64)
    status = np.ones(m, dtype=np.int8)
    live = np.ones(m, dtype=bool)
    for k in range(kmax + 1):
        if not live.any():
            break
        eps = 1.0 if k == 0 else 2.0
        if k & 1:
            eps = -eps
        t = eps * ta[:, k] * tb[:, k] * tc[:, k]
        s = np.where(live, s + t, s)
        if k > 0:
            grow = np.where(np.abs(t) > np.abs(prev), grow + 1, 0)
        diverged = live & (grow >= GROWTH_LIMIT)
        status[diverged] = 2
        live &= ~diverged
        small = np.where(np.abs(t) <= term_tol * np.abs(s), small + 1, 0)
        settled = live & (small >= SETTLE_COUNT)
        status[settled] = 0
        live &= ~settled
        prev = t
    return s, status


def _step_sq(pts, closed):
    npts = pts.shape[1]
    nsteps = npts if closed else npts - 1
    for s in range(nsteps):
        b = s + 1 if s + 1 < npts else 0
        acc = np.zeros(pts.shape[0])
        for j in range(pts.shape[2]):
            diff = pts[:, b, j] - pts[:, s, j]
            acc = acc + diff * diff
        yield acc


def tour_products(pts, closed):
    prod = np.ones(pts.shape[0])
    for acc in _step_sq(pts, closed):
        prod = prod * np.sqrt(acc)
    return prod


def tour_log_products(pts, closed):
    total = np.zeros(pts.shape[0])
    for acc in _step_sq(pts, closed):
        total = total + 0.5 * np.log(acc)
    return total
