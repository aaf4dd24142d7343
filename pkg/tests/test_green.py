import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fspd_errors import AsymmetryError, DomainError
from fspd_green import (default_scale, green_closed_form_right, green_max_asym,
                        green_max_asym_grid, green_mb, green_mb_grid, green_normalization)
from fspd_risk_neutral import mu_stable
from fspd_special import gauss_legendre_panels
from fspd_types import ModelParams


def heat_kernel(x, t, D):
    return np.exp(-x ** 2 / (4 * D * t)) / np.sqrt(4 * math.pi * D * t)


@pytest.mark.parametrize("t", [0.5, 1.0])
def test_gaussian_limit(t):
    params = ModelParams(alpha=2, gamma=1, sigma=0.2)
    x = np.array([-1.2, -0.3, 0.2, 0.8, 2.0])
    assert_allclose(green_mb_grid(x, t, params, scale=0.3), heat_kernel(x, t, 0.3), atol=1e-6)


def test_default_scale_gives_black_scholes_variance():
    params = ModelParams(alpha=2, gamma=1, sigma=0.2)
    assert default_scale(params) == pytest.approx(0.02)
    assert_allclose(green_mb(0.1, 1.0, params), heat_kernel(0.1, 1.0, 0.02), atol=1e-6)


def test_zero_argument_rejected():
    params = ModelParams(alpha=1.7, gamma=0.9, sigma=0.2)
    with pytest.raises(DomainError):
        green_mb(0.0, 1.0, params)
    with pytest.raises(DomainError):
        green_mb(0.5, 0.0, params)


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [1.5, 1.7, 2.0])
@pytest.mark.parametrize("gamma", [0.8, 0.9, 1.0])
def test_normalization(alpha, gamma):
    params = ModelParams(alpha=alpha, gamma=gamma, sigma=0.2)
    assert abs(green_normalization(1.0, params, scale=1.0) - 1.0) < 1e-5


@pytest.mark.parametrize("alpha, gamma", [(1.5, 0.8), (1.7, 0.9), (2.0, 1.0)])
def test_scaling_law(alpha, gamma):
    params = ModelParams(alpha=alpha, gamma=gamma, sigma=0.2)
    omega = params.omega
    values = [t ** omega * green_mb(0.5 * t ** omega, t, params, scale=1.0) for t in (0.5, 1.0, 2.0)]
    assert_allclose(values, values[1], atol=1e-6)


def test_general_theta_density_is_positive():
    params = ModelParams(alpha=1.5, gamma=0.9, sigma=0.2, theta=0.2)
    x = np.linspace(-3, 3, 12)
    g = green_mb_grid(x, 1.0, params, scale=1.0)
    assert np.all(g > -1e-8)


def test_reflection():
    params = ModelParams(alpha=1.5, gamma=0.9, sigma=0.2, theta=0.3)
    mirrored = params.replace(theta=-0.3)
    assert_allclose(green_mb(-0.7, 1.0, params, scale=1.0), green_mb(0.7, 1.0, mirrored, scale=1.0),
                    rtol=1e-12)


@pytest.mark.parametrize("y", [0.3, -0.3])
def test_reduced_kernel_matches_general_form(table1_params, table1_mu, y):
    # an asymmetry 1e-11 away from alpha - 2 goes through the full six-Gamma kernel
    general = table1_params.replace(theta=table1_params.theta + 1e-11)
    assert_allclose(green_max_asym(y, 1.0, table1_params, table1_mu),
                    green_mb(y, 1.0, general, scale=-table1_mu), atol=1e-8)


def test_max_asym_needs_extremal_theta(table1_mu):
    with pytest.raises(AsymmetryError):
        green_max_asym(0.3, 1.0, ModelParams(alpha=1.7, gamma=0.9, sigma=0.2, theta=0.0), table1_mu)
    with pytest.raises(DomainError):
        green_max_asym(0.3, 1.0, ModelParams(alpha=1.7, gamma=0.9, sigma=0.2), 0.01)


def test_wright_form_on_the_right(table1_params, table1_mu):
    y = np.array([0.05, 0.2, 0.5, 1.0])
    assert_allclose(green_closed_form_right(y, 1.0, table1_params, table1_mu),
                    green_max_asym_grid(y, 1.0, table1_params, table1_mu), rtol=1e-7, atol=1e-9)


def test_exponential_moment_gives_mu():
    params = ModelParams(alpha=1.7, gamma=1.0, sigma=0.2)
    mu = mu_stable(1.7, 0.2)
    left_y, left_w = gauss_legendre_panels(-40.0, 0.0, 160, 16)
    right_y, right_w = gauss_legendre_panels(0.0, 8.0, 32, 16)
    y = np.concatenate([left_y, right_y])
    w = np.concatenate([left_w, right_w])
    moment = np.sum(w * np.exp(y) * green_max_asym_grid(y, 1.0, params, mu))
    assert abs(moment - math.exp(-mu)) < 1e-5


def test_right_tail_is_lighter_than_exponential():
    params = ModelParams(alpha=1.7, gamma=0.9, sigma=0.2)
    y = np.arange(5.0, 11.0)
    weighted = np.exp(y) * green_mb_grid(y, 1.0, params, scale=1.0)
    assert np.all(np.diff(weighted) < 0)
