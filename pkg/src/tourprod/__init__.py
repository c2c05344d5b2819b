"""Expected products of step lengths of tours through Gaussian points.

For ``n + 1`` independent standard Gaussian points in R^d, ``mu[d,n]`` is
the expected product of the ``n`` step lengths of the open tour through
them. ``nu[d,n]`` is the same for the closed tour over ``n`` points.
Four engines compute these values and check one another:

* ``closed_forms``: exact expressions where they are known
* ``correlation``: arcsin formulas over step correlations (d = 1)
* ``quadrature``: Bessel-density and triangle-side integrals (d = 2, 3)
* ``montecarlo``: seeded simulation for any (d, n)
"""

from .closed_forms import catalogue, exact_value
from .correlation import mu1_open, orthant_probability_gamma
from .kernels import BACKEND
from .montecarlo import (
    Estimate,
    estimate_correlated_product,
    estimate_sign_expectation,
    estimate_tour,
)
from .quadrature import (
    QuadratureConfig,
    SeriesParams,
    mu22_quadrature,
    mu23_at_rho,
    mu23_extrapolated,
    nu23_quadrature,
    nu33_quadrature,
)
from .special import gaussian_step_mean
from .tours import Topology, TourSpec

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Estimate",
    "QuadratureConfig",
    "SeriesParams",
    "Topology",
    "TourSpec",
    "catalogue",
    "estimate_correlated_product",
    "estimate_sign_expectation",
    "estimate_tour",
    "exact_value",
    "gaussian_step_mean",
    "mu1_open",
    "mu22_quadrature",
    "mu23_at_rho",
    "mu23_extrapolated",
    "nu23_quadrature",
    "nu33_quadrature",
    "orthant_probability_gamma",
]
