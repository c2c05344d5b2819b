"""Special functions used across the engines.

Elliptic integrals take the *modulus* xi (``xi**2`` multiplies ``sin**2``),
not the parameter ``m = xi**2`` used by scipy and many tables.
"""

import math

import numpy as np

from . import kernels
from .errors import DomainError

__all__ = [
    "elliptic_k_modulus",
    "elliptic_e_modulus",
    "bessel_i_scaled",
    "bessel_i_scaled_sequence",
    "gaussian_step_mean",
]

_AGM_MAX_ITER = 64


def _agm_terms(xi):
    """Run the AGM of (1, sqrt(1 - xi^2)).

    Returns the mean and ``sum 2^(n-1) c_n^2`` over the iteration, which
    gives E/K.
    """
    a = 1.0
    b = math.sqrt((1.0 - xi) * (1.0 + xi))
    c = xi
    weighted = 0.5 * c * c
    power = 0.5
    for _ in range(_AGM_MAX_ITER):
        if abs(a - b) <= 1e-16 * a:
            break
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        power *= 2.0
        weighted += power * c * c
    return a, weighted


def elliptic_k_modulus(xi):
    r"""Complete elliptic integral of the first kind, K(xi).

    .. math:: K(\xi) = \int_0^{\pi/2} \frac{d\theta}{\sqrt{1 - \xi^2 \sin^2\theta}}

    Computed as ``pi / (2 AGM(1, sqrt(1 - xi^2)))``.
    """
    xi = float(xi)
    if not 0.0 <= xi < 1.0:
        raise DomainError(f"K(xi) needs 0 <= xi < 1, got {xi!r}")
    mean, _ = _agm_terms(xi)
    return math.pi / (2.0 * mean)


def elliptic_e_modulus(xi):
    r"""Complete elliptic integral of the second kind, E(xi).

    .. math:: E(\xi) = \int_0^{\pi/2} \sqrt{1 - \xi^2 \sin^2\theta}\, d\theta
    """
    xi = float(xi)
    if not 0.0 <= xi <= 1.0:
        raise DomainError(f"E(xi) needs 0 <= xi <= 1, got {xi!r}")
    if xi == 1.0:
        return 1.0
    mean, weighted = _agm_terms(xi)
    return math.pi / (2.0 * mean) * (1.0 - weighted)


def bessel_i_scaled_sequence(x, kmax):
    """``exp(-x) * I_k(x)`` for ``k = 0..kmax`` at a single argument.

    Miller-style backward recurrence on the ratios ``I_k / I_{k-1}``,
    normalised by the generating-function identity
    ``exp(-x) (I_0 + 2 sum I_k) = 1``; never recurs forward.
    """
    x = float(x)
    kmax = int(kmax)
    if x < 0.0 or not math.isfinite(x):
        raise DomainError(f"Bessel argument must be finite and >= 0, got {x!r}")
    if kmax < 0:
        raise DomainError(f"Bessel order must be >= 0, got {kmax}")
    return kernels.bessel_i_scaled_table(np.array([x]), kmax)[0]


def bessel_i_scaled(k, x):
    """``exp(-x) * I_k(x)`` for integer ``k >= 0`` and ``x >= 0``.

    Accepts an array ``x``; the result has the same shape.
    """
    k = int(k)
    if k < 0:
        raise DomainError(f"Bessel order must be >= 0, got {k}")
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
        raise DomainError("Bessel argument must be finite and >= 0")
    flat = np.ascontiguousarray(arr.ravel())
    vals = kernels.bessel_i_scaled_table(flat, k)[:, k]
    if arr.ndim == 0:
        return float(vals[0])
    return vals.reshape(arr.shape)


def gaussian_step_mean(d):
    """E|r2 - r1| for independent standard Gaussian points in R^d.

    Equals ``2 Gamma((d+1)/2) / Gamma(d/2)``, evaluated through log-gamma so
    large ``d`` does not overflow.
    """
    if isinstance(d, bool) or int(d) != d:
        raise DomainError(f"dimension must be an integer, got {d!r}")
    d = int(d)
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    return 2.0 * math.exp(math.lgamma(0.5 * (d + 1)) - math.lgamma(0.5 * d))
