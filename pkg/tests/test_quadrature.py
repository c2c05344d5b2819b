import math

import numpy as np
import pytest

from tourprod.errors import (
    ConvergenceError,
    DomainError,
    IllConditionedFitError,
    SeriesDivergenceError,
)
from tourprod.montecarlo import estimate_correlated_product
from tourprod.quadrature import (
    QuadratureConfig,
    SeriesParams,
    complex_covariance,
    density_normalisation,
    extrapolate_to_half,
    joint_density_3step,
    mu22_quadrature,
    mu23_at_rho,
    mu23_extrapolated,
    nu23_quadrature,
    nu33_quadrature,
    two_step_covariance,
    two_step_density,
)
from tourprod.special import elliptic_e_modulus, elliptic_k_modulus, gaussian_step_mean


def gl(n, lo, hi, panels):
    x, w = np.polynomial.legendre.leggauss(n)
    e = np.linspace(lo, hi, panels + 1)
    nodes = np.concatenate([(x + 1) / 2 * (b - a) + a for a, b in zip(e[:-1], e[1:])])
    weights = np.concatenate([w * (b - a) / 2 for a, b in zip(e[:-1], e[1:])])
    return nodes, weights


def nu23_original_nesting(panels=16, order=16, radius=16.0):
    """Original nesting (x outer, 0<y<x, z across the triangle) via z^2 = x^2+y^2-2xy cos t."""
    xn, xw = gl(order, 0, radius, panels)
    sn, sw = gl(order, 0, 1, panels)
    tn, tw = gl(order, 0, math.pi, panels)
    x = xn[:, None, None]
    y = x * sn[None, :, None]
    t = tn[None, None, :]
    z = np.sqrt(np.maximum(x * x + y * y - 2 * x * y * np.cos(t), 0.0))
    g = x * x * y * y * z / 2 * np.exp(-(x * x + y * y + z * z) / 6) * x
    return 4 / (3 * math.pi) * np.einsum("ijk,i,j,k->", g, xw, sw, tw)


def nu33_longest_side(panels=4, order=16, radius=16.0):
    """Symmetric route: triangles with longest side x, angle theta opposite it."""
    yn, yw = gl(order, 0, radius, panels)
    sn, sw = gl(order, 0, 1, panels)
    y = yn[:, None, None]
    z = y * sn[None, :, None]
    th0 = np.arccos(sn / 2)[None, :, None]
    theta = th0 + (math.pi - th0) * sn[None, None, :]
    x = np.sqrt(y * y + z * z - 2 * y * z * np.cos(theta))
    # x^2 y^2 z^2 dx = x y^3 z^3 sin(theta) dtheta
    g = x * y**3 * z**3 * np.sin(theta) * np.exp(-(x * x + y * y + z * z) / 6)
    g = g * y * (math.pi - th0)
    return 3 * 2 * math.sqrt(3) / (9 * math.pi) * np.einsum("ijk,i,j,k->", g, yw, sw, sw)


# -- covariance algebra -------------------------------------------------------


@pytest.mark.parametrize("rho", [-0.7, -0.5, -0.35, -0.1])
def test_complex_covariance_inverse_and_determinant(rho):
    cov = complex_covariance(rho)
    np.testing.assert_allclose(cov.psi @ cov.phi, np.eye(3), atol=1e-12)
    s = 1 - 2 * rho * rho
    assert cov.delta == pytest.approx(1 / (64 * s), rel=1e-15)
    assert np.linalg.det(cov.phi) == pytest.approx(cov.delta, rel=1e-12)
    displayed = np.array(
        [[1 - rho**2, -rho, rho**2], [-rho, 1, -rho], [rho**2, -rho, 1 - rho**2]]
    ) / (4 * s)
    np.testing.assert_allclose(cov.phi, displayed, atol=1e-14, rtol=0)


def test_covariance_at_physical_point():
    cov = complex_covariance(-0.5)
    assert cov.psi.tolist() == [[4, -2, 0], [-2, 4, -2], [0, -2, 4]]
    assert np.all(cov.phi > 0)


def test_two_step_covariance():
    cov = two_step_covariance()
    np.testing.assert_allclose(cov.phi, [[1 / 3, 1 / 6], [1 / 6, 1 / 3]], atol=1e-16)
    assert cov.delta == pytest.approx(1 / 12, rel=1e-15)


@pytest.mark.parametrize("rho", [-0.7072, -0.8, 0.75])
def test_complex_covariance_rejects_indefinite(rho):
    with pytest.raises(DomainError):
        complex_covariance(rho)


# -- configs ------------------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs", [{"tol": 0}, {"truncation_radius": -1}, {"max_subdivisions": 0}, {"order": 1}]
)
def test_quadrature_config_validation(kwargs):
    with pytest.raises(DomainError):
        QuadratureConfig(**kwargs)


@pytest.mark.parametrize(
    "kwargs",
    [{"rho": 0.0}, {"rho": 0.1}, {"rho": -0.71}, {"rho": -0.4, "k_max": -1}, {"rho": -0.4, "term_tol": 0}],
)
def test_series_params_validation(kwargs):
    with pytest.raises(DomainError):
        SeriesParams(**kwargs)


# -- mu[2,2] ------------------------------------------------------------------


def test_mu22_quadrature_matches_elliptic_identity():
    res = mu22_quadrature(QuadratureConfig(tol=1e-8))
    exact = 4 * elliptic_e_modulus(0.5) - 1.5 * elliptic_k_modulus(0.5)
    assert abs(res.value - exact) <= 1e-8
    assert abs(res.value - 3.341223) < 5e-7


def test_two_step_density_vanishes_on_axes():
    assert np.all(two_step_density(0.0, np.linspace(0, 5, 6)) == 0)
    assert np.all(two_step_density(np.linspace(0, 5, 6), 0.0) == 0)


def test_two_step_density_is_normalised():
    t, w = gl(32, 0, 16, 4)
    total = w @ two_step_density(t[:, None], t[None, :]) @ w
    assert total == pytest.approx(1.0, abs=1e-10)


def test_convergence_error_when_subdivisions_exhausted():
    with pytest.raises(ConvergenceError):
        nu23_quadrature(QuadratureConfig(tol=1e-14, max_subdivisions=1))


# -- triangle integrals -------------------------------------------------------


def test_nu23_value():
    res = nu23_quadrature()
    assert abs(res.value - 6.359) <= 0.002


def test_nu23_matches_original_nesting():
    assert nu23_quadrature().value == pytest.approx(nu23_original_nesting(), abs=1e-7)


def test_nu33_value():
    assert abs(nu33_quadrature().value - 12.708) <= 0.002


def test_nu33_matches_longest_side_route():
    assert nu33_quadrature().value == pytest.approx(nu33_longest_side(), rel=1e-10)


@pytest.mark.parametrize("fn", [nu23_quadrature, nu33_quadrature, mu22_quadrature])
def test_halving_tol_stays_within_error_estimate(fn):
    coarse = fn(QuadratureConfig(tol=1e-6))
    fine = fn(QuadratureConfig(tol=5e-7))
    assert abs(fine.value - coarse.value) <= max(coarse.error, 1e-15)


def test_truncation_radius_grows_to_meet_tail_bound():
    res = nu33_quadrature(QuadratureConfig(truncation_radius=6.0))
    assert res.radius > 6.0
    assert math.exp(-res.radius**2 / 6) * res.radius**8 < 1e-8 * res.value


def test_report_record_is_json_ready():
    import json

    res = nu33_quadrature()
    data = json.loads(json.dumps(res.to_dict()))
    assert data["value"] == res.value
    assert data["config"]["tol"] == 1e-8
    assert "workers" not in data["config"]


# -- three-step series density ------------------------------------------------


def test_joint_density_vanishes_with_any_zero_length():
    p = SeriesParams(-0.4)
    assert joint_density_3step(0.0, 1.0, 2.0, p) == 0.0
    assert joint_density_3step(1.0, 0.0, 2.0, p) == 0.0
    assert joint_density_3step(1.0, 2.0, 0.0, p) == 0.0


def test_joint_density_matches_phase_integral():
    # integrate the complex Gaussian over the two relative phases directly
    rho, a, b, c = -0.4, 1.3, 2.1, 0.7
    cov = complex_covariance(rho)
    phi = cov.phi
    n = 256
    th = 2 * math.pi * np.arange(n) / n
    al, be = np.meshgrid(th, th, indexing="ij")
    z = np.stack([a * np.ones_like(al), b * np.exp(1j * al), c * np.exp(1j * (al + be))])
    quad = np.einsum("i...,ij,j...->...", z.conj(), phi, z).real
    phase_avg = np.mean(np.exp(-quad))
    # density of moduli: (2pi)^3 a b c / (pi^3 det Psi) * <exp(-z* Phi z)>
    expected = 8 * a * b * c * cov.delta * phase_avg
    assert joint_density_3step(a, b, c, SeriesParams(rho)) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("rho", [-0.2, -0.35, -0.48])
def test_joint_density_is_normalised(rho):
    res = density_normalisation(SeriesParams(rho))
    assert abs(res.value - 1.0) <= 1e-4


def test_series_divergence_when_kmax_too_small():
    with pytest.raises(SeriesDivergenceError):
        joint_density_3step(12.0, 12.0, 12.0, SeriesParams(-0.49, k_max=5))


def test_f_at_minus_035_matches_correlated_monte_carlo():
    f = mu23_at_rho(SeriesParams(-0.35)).value
    est = estimate_correlated_product(-0.35, samples=10**6, seed=3)
    assert abs(f - est.value) < 3 * est.stderr


def test_f_near_zero_factorises():
    f = mu23_at_rho(SeriesParams(-1e-9)).value
    assert f == pytest.approx(gaussian_step_mean(2) ** 3, rel=1e-8)
    assert f == pytest.approx(math.pi**1.5, rel=1e-8)


def test_f_near_limit():
    assert abs(mu23_at_rho(SeriesParams(-0.49)).value - 6.25) < 0.05


def test_f_increases_toward_minus_half():
    grid = [-0.1, -0.2, -0.3, -0.4, -0.45, -0.48]
    values = [mu23_at_rho(SeriesParams(r)).value for r in grid]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_f_independent_of_worker_count():
    p = SeriesParams(-0.45)
    one = mu23_at_rho(p, QuadratureConfig(workers=1))
    many = mu23_at_rho(p, QuadratureConfig(workers=3))
    assert one.value == many.value


# -- extrapolation --------------------------------------------------------------


def test_extrapolated_limit():
    res = mu23_extrapolated([-0.40, -0.43, -0.45, -0.47, -0.48])
    assert abs(res.value - 6.25) <= 0.05
    assert res.uncertainty < 0.05
    assert not res.degenerate
    assert set(res.fits) == {0, 1, 2, 3}


def test_extrapolated_limit_matches_monte_carlo():
    res = mu23_extrapolated()
    est = estimate_correlated_product(-0.5, samples=10**6, seed=8)
    assert abs(res.value - est.value) < 3 * math.hypot(est.stderr, res.uncertainty)


def test_single_point_grid_is_degenerate():
    res = mu23_extrapolated([-0.45])
    assert res.degenerate
    assert math.isinf(res.uncertainty)
    assert res.value == res.f_values[0]


def test_extrapolation_recovers_cubic_exactly():
    grid = [-0.40, -0.42, -0.44, -0.46, -0.48]
    poly = lambda r: 6.0 + 2.0 * (r + 0.5) - 3.0 * (r + 0.5) ** 2 + 0.5 * (r + 0.5) ** 3
    value, unc, fits = extrapolate_to_half(grid, [poly(r) for r in grid])
    assert value == pytest.approx(6.0, abs=1e-10)


def test_clustered_grid_is_ill_conditioned():
    with pytest.raises(IllConditionedFitError):
        extrapolate_to_half([-0.45, -0.45 - 1e-12, -0.46], [6.1, 6.1, 6.12])
    with pytest.raises(IllConditionedFitError):
        extrapolate_to_half([-0.4, -0.4001, -0.4002, -0.4003], [6.0, 6.0, 6.0, 6.0], cond_limit=1e6)


@pytest.mark.parametrize(
    "grid", [[-0.45, -0.40], [-0.40, -0.5], [-0.4, -0.4], [0.1], []]
)
def test_grid_validation(grid):
    with pytest.raises(DomainError):
        mu23_extrapolated(grid)
