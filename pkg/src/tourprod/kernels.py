"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy twin.
Set ``TOURPROD_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("TOURPROD_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

bessel_i_scaled_table = _impl.bessel_i_scaled_table
series_sum = _impl.series_sum
tour_products = _impl.tour_products
tour_log_products = _impl.tour_log_products

__all__ = [
    "BACKEND",
    "bessel_i_scaled_table",
    "series_sum",
    "tour_products",
    "tour_log_products",
]
