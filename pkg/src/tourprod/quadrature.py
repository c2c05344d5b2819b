"""Deterministic integrals for planar and spatial tours.

Integration rule
----------------
Every integral is a tensor product of composite Gauss-Legendre rules with
``m`` equal panels per axis. ``m`` walks through 1, 2, 3, 4, 6, 8, 12, 16, ...
and stops once two consecutive estimates differ by at most ``tol`` relative.
That difference is reported as the error estimate. Semi-infinite axes are
cut at a radius ``R`` that is enlarged, if needed, until the Gaussian tail
bound ``exp(-c R^2) R^8`` falls below ``tol`` times the estimate.

Three-step planar density
-------------------------
The moduli ``a, b, c`` of three correlated complex Gaussian steps with
covariance ``Psi(rho) = 4 [[1, rho, 0], [rho, 1, rho], [0, rho, 1]]`` have
the joint density::

    8 Delta a b c exp(-phi11 a^2 - phi22 b^2 - phi33 c^2)
        * sum_k eps_k (-1)^k I_k(2ab|phi12|) I_k(2bc|phi23|) I_k(2ac|phi13|)

with ``Phi = Psi^-1``, ``Delta = det Phi``, ``eps_0 = 1`` and ``eps_k = 2``.
``F(rho) = E[a b c]`` under this density. At ``rho = -1/2``, ``Psi`` is the
covariance of consecutive planar tour steps, so ``F(-1/2) = mu[2,3]``. Here
F is *defined* as this triple integral of ``abc * f``.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import kernels
from .errors import (
    ConvergenceError,
    DomainError,
    IllConditionedFitError,
    SeriesDivergenceError,
)
from .special import bessel_i_scaled

__all__ = [
    "QuadratureConfig",
    "SeriesParams",
    "ComplexCovariance",
    "QuadratureResult",
    "ExtrapolationResult",
    "complex_covariance",
    "two_step_covariance",
    "two_step_density",
    "mu22_quadrature",
    "nu23_quadrature",
    "nu33_quadrature",
    "joint_density_3step",
    "mu23_at_rho",
    "mu23_extrapolated",
    "density_normalisation",
    "extrapolate_to_half",
    "DEFAULT_RHO_GRID",
]

_RHO_MIN = -1.0 / math.sqrt(2.0)
DEFAULT_RHO_GRID = (-0.40, -0.43, -0.45, -0.47, -0.48)
_PANEL_STEPS = (1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64)
_CHUNK_POINTS = 1 << 16


@dataclass(frozen=True)
class QuadratureConfig:
    tol: float = 1e-8
    truncation_radius: float = 14.0
    max_subdivisions: int = 16
    order: int = 16
    workers: int = 1

    def __post_init__(self):
        if not self.tol > 0:
            raise DomainError(f"tol must be > 0, got {self.tol!r}")
        if not self.truncation_radius > 0:
            raise DomainError(f"truncation_radius must be > 0, got {self.truncation_radius!r}")
        if self.max_subdivisions < 1:
            raise DomainError(f"max_subdivisions must be >= 1, got {self.max_subdivisions!r}")
        if self.order < 2:
            raise DomainError(f"order must be >= 2, got {self.order!r}")

    def snapshot(self):
        """Config fields that determine the numbers; ``workers`` does not."""
        d = asdict(self)
        d.pop("workers")
        return d


@dataclass(frozen=True)
class SeriesParams:
    rho: float
    k_max: int = 80
    term_tol: float = 1e-15

    def __post_init__(self):
        if not _RHO_MIN < self.rho < 0.0:
            raise DomainError(f"rho must lie in (-1/sqrt(2), 0), got {self.rho!r}")
        if self.k_max < 0:
            raise DomainError(f"k_max must be >= 0, got {self.k_max!r}")
        if not self.term_tol > 0:
            raise DomainError(f"term_tol must be > 0, got {self.term_tol!r}")


@dataclass(frozen=True, eq=False)
class ComplexCovariance:
    psi: np.ndarray
    phi: np.ndarray
    delta: float


def complex_covariance(rho):
    """``Psi(rho)``, its inverse ``Phi(rho)`` and ``Delta(rho) = det Phi``."""
    rho = float(rho)
    s = 1.0 - 2.0 * rho * rho
    if not s > 0.0:
        raise DomainError(f"Psi(rho) is singular or indefinite for rho={rho!r}")
    psi = 4.0 * np.array([[1.0, rho, 0.0], [rho, 1.0, rho], [0.0, rho, 1.0]])
    phi = np.array(
        [
            [1.0 - rho * rho, -rho, rho * rho],
            [-rho, 1.0, -rho],
            [rho * rho, -rho, 1.0 - rho * rho],
        ]
    ) / (4.0 * s)
    return ComplexCovariance(psi, phi, 1.0 / (64.0 * s))


def two_step_covariance():
    """Complex covariance of two consecutive planar steps and its inverse."""
    psi = np.array([[4.0, -2.0], [-2.0, 4.0]])
    det = psi[0, 0] * psi[1, 1] - psi[0, 1] * psi[1, 0]
    phi = np.array([[psi[1, 1], -psi[0, 1]], [-psi[1, 0], psi[0, 0]]]) / det
    return ComplexCovariance(psi, phi, 1.0 / det)


@dataclass
class QuadratureResult:
    quantity: str
    value: float
    error: float
    evaluations: int
    panels: int
    radius: float
    config: dict
    extra: dict = field(default_factory=dict)
    method: str = "quadrature"

    def __float__(self):
        return self.value

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


# -- tensor Gauss-Legendre machinery -------------------------------------


def _composite_gl(lo, hi, panels, order):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _tail_bound(radius, decay):
    return math.exp(-decay * radius * radius) * radius**8


def _converge(name, rule, steps, radius, cfg):
    prev = None
    evals = 0
    for m in steps:
        value, n = rule(m, radius)
        evals += n
        if prev is not None:
            err = abs(value - prev)
            if err <= cfg.tol * abs(value):
                return value, err, m, evals
        prev = value
    raise ConvergenceError(
        f"{name}: no convergence to tol={cfg.tol:g} within {cfg.max_subdivisions} panels"
    )


def _refine(name, rule, cfg, decay, extra=None):
    """Run ``rule(panels, radius) -> (value, evaluations)`` to convergence.

    Panels grow until two consecutive estimates agree to ``cfg.tol``. The
    radius then grows until the tail bound is below ``tol * |value|``.
    """
    radius = float(cfg.truncation_radius)
    steps = [m for m in _PANEL_STEPS if m <= cfg.max_subdivisions]
    while True:
        value, err, m, evals = _converge(name, rule, steps, radius, cfg)
        target = cfg.tol * max(abs(value), 1e-300)
        if _tail_bound(radius, decay) < target:
            return QuadratureResult(
                quantity=name,
                value=float(value),
                error=float(err),
                evaluations=int(evals),
                panels=m,
                radius=radius,
                config=cfg.snapshot(),
                extra=dict(extra or {}),
            )
        while _tail_bound(radius, decay) >= target:
            radius += 1.0


# -- two-step planar tour ---------------------------------------------------


def two_step_density(a, b):
    """Joint density of the lengths of two consecutive planar tour steps.

    ``4 Delta a b exp(-phi11 a^2 - phi22 b^2) I_0(2 a b |phi12|)``, evaluated
    with the Bessel scaling folded into the exponent.
    """
    cov = two_step_covariance()
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    if np.any(a < 0) or np.any(b < 0):
        raise DomainError("lengths must be non-negative")
    p = cov.phi
    arg = 2.0 * a * b * abs(p[0, 1])
    expo = -p[0, 0] * a * a - p[1, 1] * b * b + arg
    return 4.0 * cov.delta * a * b * np.exp(expo) * bessel_i_scaled(0, arg)


def mu22_quadrature(cfg=QuadratureConfig()):
    """E|step1| |step2| for an open planar tour, as a double integral."""

    def rule(m, radius):
        t, w = _composite_gl(0.0, radius, m, cfg.order)
        a, b = t[:, None], t[None, :]
        f = a * b * two_step_density(a, b)
        return float(w @ f @ w), t.size**2

    return _refine("mu[2,2]", rule, cfg, decay=1.0 / 6.0)


# -- closed three-step tours (triangle side integrals) ---------------------


def _weighted_sum3(g, w0, w1, w2):
    return float(np.einsum("ijk,i,j,k->", g, w0, w1, w2))


def nu23_quadrature(cfg=QuadratureConfig()):
    r"""E of the product of the three side lengths of a planar Gaussian triangle.

    The integral over sides (x, y, z) with weight
    ``x^2 y^2 z^2 exp(-(x^2+y^2+z^2)/6) / sqrt(Heron)`` and prefactor
    ``4/(3 pi)`` over ``{0 < y < x, x-y < z < x+y}``. The Heron factor is
    removed by the law of cosines. The integrand is symmetric in the three
    sides, so we integrate over triangles whose longest side is x, using the
    angle theta opposite x::

        x^2 = y^2 + z^2 - 2 y z cos(theta),   dx / sqrt(Heron) = dtheta / (2x)

    with z <= y <= x, i.e. z = s y, s in [0, 1], theta in [acos(s/2), pi].
    That region holds a third of the original one. The only degenerate
    triangle with a kink (z -> 0 at x = y) has x > y there, so the
    integrand is smooth.
    """
    pref = 3.0 * 4.0 / (3.0 * math.pi)

    def rule(m, radius):
        yn, yw = _composite_gl(0.0, radius, m, cfg.order)
        sn, sw = _composite_gl(0.0, 1.0, m, cfg.order)
        un, uw = _composite_gl(0.0, 1.0, m, cfg.order)
        y = yn[:, None, None]
        s = sn[None, :, None]
        u = un[None, None, :]
        z = s * y
        th0 = np.arccos(0.5 * s)
        theta = th0 + (math.pi - th0) * u
        x = np.sqrt(y * y + z * z - 2.0 * y * z * np.cos(theta))
        g = 0.5 * x * y * y * z * z * np.exp(-(x * x + y * y + z * z) / 6.0)
        g = g * y * (math.pi - th0)  # Jacobians of z = s y and of theta(u)
        return pref * _weighted_sum3(g, yw, sw, uw), g.size

    return _refine("nu[2,3]", rule, cfg, decay=1.0 / 6.0)


def nu33_quadrature(cfg=QuadratureConfig()):
    """E of the product of the three side lengths of a spatial Gaussian triangle.

    Prefactor ``2 sqrt(3) / (9 pi)`` times the integral of
    ``x^2 y^2 z^2 exp(-(x^2+y^2+z^2)/6)`` over ``{0 < y < x, x-y < z < x+y}``,
    nested dz dy dx. The integrand is smooth, so the bounds are mapped
    linearly: y = s x and z = (x - y) + 2 y u.
    """
    pref = 2.0 * math.sqrt(3.0) / (9.0 * math.pi)

    def rule(m, radius):
        xn, xw = _composite_gl(0.0, radius, m, cfg.order)
        sn, sw = _composite_gl(0.0, 1.0, m, cfg.order)
        x = xn[:, None, None]
        y = x * sn[None, :, None]
        z = (x - y) + 2.0 * y * sn[None, None, :]
        g = (x * y * z) ** 2 * np.exp(-(x * x + y * y + z * z) / 6.0) * x * 2.0 * y
        return pref * _weighted_sum3(g, xw, sw, sw), g.size

    return _refine("nu[3,3]", rule, cfg, decay=1.0 / 6.0)


# -- three-step planar density and F(rho) ----------------------------------


def _series_terms(cov, a, b, c):
    p = cov.phi
    xab = 2.0 * a * b * abs(p[0, 1])
    xbc = 2.0 * b * c * abs(p[1, 2])
    xac = 2.0 * a * c * abs(p[0, 2])
    expo = -(p[0, 0] * a * a + p[1, 1] * b * b + p[2, 2] * c * c) + xab + xbc + xac
    return xab, xbc, xac, expo


def _checked_series(xab, xbc, xac, p):
    sums, status = kernels.series_sum(
        np.ascontiguousarray(xab, dtype=np.float64),
        np.ascontiguousarray(xbc, dtype=np.float64),
        np.ascontiguousarray(xac, dtype=np.float64),
        int(p.k_max),
        float(p.term_tol),
    )
    bad = status != 0
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        why = "terms kept growing" if status[i] == 2 else f"not settled by k_max={p.k_max}"
        raise SeriesDivergenceError(
            f"Bessel series at rho={p.rho}: {why} "
            f"(args {xab[i]:.4g}, {xbc[i]:.4g}, {xac[i]:.4g}; {int(bad.sum())} points)"
        )
    return sums


def joint_density_3step(a, b, c, p):
    """Joint density f(a, b, c) of three consecutive correlated step lengths.

    Broadcasts over array arguments. The Bessel factors are exponentially
    scaled and their scale is folded into the Gaussian exponent, so large
    arguments do not overflow.
    """
    cov = complex_covariance(p.rho)
    a, b, c = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (a, b, c)))
    if np.any(a < 0) or np.any(b < 0) or np.any(c < 0):
        raise DomainError("lengths must be non-negative")
    shape = a.shape
    a, b, c = a.ravel(), b.ravel(), c.ravel()
    xab, xbc, xac, expo = _series_terms(cov, a, b, c)
    s = _checked_series(xab, xbc, xac, p)
    f = 8.0 * cov.delta * a * b * c * np.exp(expo) * s
    return f.reshape(shape) if shape else float(f[0])


def _density_moment(p, cfg, power, name):
    """Integral of (abc)^power * f(a, b, c) over [0, R]^3."""
    cov = complex_covariance(p.rho)

    def rule(m, radius):
        t, w = _composite_gl(0.0, radius, m, cfg.order)
        nt = t.size
        rows = max(1, _CHUNK_POINTS // (nt * nt))
        blocks = [(i, min(i + rows, nt)) for i in range(0, nt, rows)]
        b = t[None, :, None]
        c = t[None, None, :]

        def block(span):
            lo, hi = span
            a = t[lo:hi, None, None]
            aa, bb, cc = (v.ravel() for v in np.broadcast_arrays(a, b, c))
            xab, xbc, xac, expo = _series_terms(cov, aa, bb, cc)
            s = _checked_series(xab, xbc, xac, p)
            g = 8.0 * cov.delta * (aa * bb * cc) ** (power + 1) * np.exp(expo) * s
            g = g.reshape(hi - lo, nt, nt)
            return float(np.einsum("ijk,i,j,k->", g, w[lo:hi], w, w))

        if cfg.workers > 1 and len(blocks) > 1:
            with ThreadPoolExecutor(cfg.workers) as pool:
                parts = list(pool.map(block, blocks))
        else:
            parts = [block(span) for span in blocks]
        return math.fsum(parts), nt**3

    return _refine(name, rule, cfg, decay=0.25, extra=asdict(p))


def density_normalisation(p, cfg=QuadratureConfig()):
    """Integral of f(a, b, c); should be 1 when the series is summed correctly."""
    return _density_moment(p, cfg, 0, f"norm f(rho={p.rho})")


def mu23_at_rho(p, cfg=QuadratureConfig()):
    """F(rho) = E[a b c] under the three-step density at ``p.rho``."""
    return _density_moment(p, cfg, 1, f"F({p.rho})")


@dataclass
class ExtrapolationResult:
    value: float
    uncertainty: float
    degenerate: bool
    rho_grid: list
    f_values: list
    f_errors: list
    fits: dict
    series: dict
    config: dict
    method: str = "series-extrapolation"

    def to_dict(self):
        d = asdict(self)
        d["fits"] = {str(k): v for k, v in self.fits.items()}
        return d

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["fits"] = {int(k): v for k, v in data["fits"].items()}
        return cls(**data)


def _validate_grid(grid):
    if not grid:
        raise DomainError("rho grid is empty")
    for r in grid:
        if not _RHO_MIN < r:
            raise DomainError(f"rho {r} must exceed -1/sqrt(2)")
        if not r > -0.5:
            raise DomainError(f"rho {r} must lie strictly to the right of -1/2")
        if not r < 0:
            raise DomainError(f"rho {r} must be negative")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise DomainError("rho grid must be strictly decreasing toward -1/2")


def extrapolate_to_half(rho_grid, f_values, max_degree=3, cond_limit=1e10):
    """Polynomial fits of F against (rho + 1/2), evaluated at rho = -1/2.

    Returns ``(value, uncertainty, fits)``. ``fits`` maps each degree to its
    value at rho = -1/2. The top degree wins and its distance from the
    next-lower degree is the uncertainty. A single point is returned as-is
    with infinite uncertainty.
    """
    h = np.asarray(rho_grid, dtype=float) + 0.5
    f = np.asarray(f_values, dtype=float)
    if h.size == 1:
        return float(f[0]), math.inf, {0: float(f[0])}
    gaps = np.abs(np.diff(h))
    if gaps.min() < 1e-6 * max(np.ptp(h), 1e-300):
        raise IllConditionedFitError("rho grid points are nearly coincident")
    top = min(int(max_degree), h.size - 1)
    fits = {}
    for deg in range(0, top + 1):
        vander = np.vander(h, deg + 1)
        if deg > 0 and np.linalg.cond(vander) > cond_limit:
            raise IllConditionedFitError(
                f"degree-{deg} fit on this grid has condition number above {cond_limit:g}"
            )
        coef, *_ = np.linalg.lstsq(vander, f, rcond=None)
        fits[deg] = float(coef[-1])
    value = fits[top]
    return value, abs(value - fits[top - 1]), fits


def mu23_extrapolated(
    rho_grid=DEFAULT_RHO_GRID,
    p_template=SeriesParams(-0.4),
    cfg=QuadratureConfig(),
    max_degree=3,
):
    """Estimate mu[2,3] = lim F(rho) as rho -> -1/2 from the right."""
    grid = [float(r) for r in rho_grid]
    _validate_grid(grid)
    results = [mu23_at_rho(replace(p_template, rho=r), cfg) for r in grid]
    vals = [r.value for r in results]
    value, unc, fits = extrapolate_to_half(grid, vals, max_degree)
    return ExtrapolationResult(
        value=value,
        uncertainty=unc,
        degenerate=len(grid) == 1,
        rho_grid=grid,
        f_values=vals,
        f_errors=[r.error for r in results],
        fits=fits,
        series={"k_max": p_template.k_max, "term_tol": p_template.term_tol, "max_degree": max_degree},
        config=cfg.snapshot(),
    )
