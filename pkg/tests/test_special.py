import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import special

from fspd_errors import DomainError, NoConvergence, PoleError
from fspd_special import (complex_log_gamma, folded_rule, gauss_legendre_panels, is_gamma_pole,
                          line_rule, log_gamma_signed, log_reciprocal_gamma, mittag_leffler,
                          mittag_leffler_mellin_barnes, ray_reach, reciprocal_gamma, wright_m,
                          wright_m_array, wright_m_mellin_barnes)
from fspd_types import ContourSpec


@pytest.mark.parametrize("x", [0.0, -1.0, -3.0, -10.0])
def test_reciprocal_gamma_zero_on_poles(x):
    assert reciprocal_gamma(x) == 0.0
    assert is_gamma_pole(x)
    log_abs, sign = log_reciprocal_gamma(np.array([x]))
    assert sign[0] == 0


def test_log_gamma_signed():
    value = log_gamma_signed(-0.5)
    assert value.sign == -1
    assert value.value == pytest.approx(-2 * math.sqrt(math.pi))
    assert (log_gamma_signed(0.5) * log_gamma_signed(-0.5)).value == pytest.approx(-2 * math.pi)
    with pytest.raises(PoleError):
        log_gamma_signed(-2.0)


def test_log_reciprocal_gamma_large_argument():
    log_abs, sign = log_reciprocal_gamma(np.array([200.5, -200.5]))
    assert np.all(np.isfinite(log_abs))
    assert_allclose(log_abs[0], -special.gammaln(200.5))
    assert sign[1] == special.gammasgn(-200.5)


def test_complex_log_gamma_known_values():
    assert complex_log_gamma(1.0) == pytest.approx(0.0, abs=1e-15)
    assert complex_log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), abs=1e-15)


@pytest.mark.parametrize("x", [0.3, 2.5, 7.0, -0.5, -2.7])
def test_complex_log_gamma_on_real_axis(x):
    value = complex_log_gamma(x)
    assert_allclose(value.real, log_gamma_signed(x).log_abs, atol=1e-12)
    if x > 0:
        assert abs(value.imag) < 1e-15


@pytest.mark.parametrize("z", [0.5 + 10j, -2.3 + 1.7j, 3.0 - 4.0j])
def test_complex_log_gamma_recurrence(z):
    assert_allclose(np.exp(complex_log_gamma(z + 1) - complex_log_gamma(z)), z, rtol=1e-12)


def test_complex_log_gamma_decay_on_critical_line():
    # |Gamma(1/2 + it)|^2 = pi / cosh(pi t)
    t = 10.0
    assert_allclose(np.exp(complex_log_gamma(0.5 + 1j * t).real),
                    math.sqrt(math.pi / math.cosh(math.pi * t)), rtol=1e-12)


def test_complex_log_gamma_array_and_poles():
    values = complex_log_gamma(np.array([1.0, 2.0 + 0j, 4.0]))
    assert_allclose(values.real, [0.0, 0.0, math.log(6.0)], atol=1e-14)
    for z in (0.0, -3.0 + 0j):
        with pytest.raises(PoleError):
            complex_log_gamma(z)


@pytest.mark.parametrize("z", [-2.0, -0.3, 0.7, 1.5])
def test_mittag_leffler_exponential(z):
    assert_allclose(mittag_leffler(1.0, z), math.exp(z), rtol=1e-10)


@pytest.mark.parametrize("x", [0.5, 1.0, 2.5])
def test_mittag_leffler_cosine(x):
    assert_allclose(mittag_leffler(2.0, -x * x), math.cos(x), atol=1e-10)


def test_mittag_leffler_half():
    # E_{1/2}(-z) = exp(z^2) erfc(z)
    assert_allclose(mittag_leffler(0.5, -1.0), math.e * math.erfc(1.0), rtol=1e-10)


def test_mittag_leffler_caps():
    with pytest.raises(DomainError):
        mittag_leffler(0.0, 1.0)
    with pytest.raises(NoConvergence):
        mittag_leffler(1.0, 500.0, max_terms=50)


@pytest.mark.parametrize("z", [-20.0, -30.0, -50.0])
def test_mittag_leffler_large_negative_argument(z):
    assert_allclose(mittag_leffler(1.0, z), math.exp(z), atol=1e-10)
    assert_allclose(mittag_leffler(0.5, z), special.erfcx(-z), atol=1e-10)


def test_mittag_leffler_cancellation_without_quadrature():
    # a = 2 has no Mellin-Barnes fallback; cos(30) would come out as noise
    with pytest.raises(NoConvergence):
        mittag_leffler(2.0, -900.0)


@pytest.mark.parametrize("a, z", [(0.5, -1.0), (0.9, -1.0), (1.5, -2.0)])
def test_mittag_leffler_quadrature_matches_series(a, z):
    assert_allclose(mittag_leffler_mellin_barnes(a, z), mittag_leffler(a, z), atol=1e-9)


@pytest.mark.parametrize("z", [0.0, 0.1, 1.0, 3.0, 6.0])
def test_wright_m_half_is_gaussian(z):
    # M_{1/2}(z) = exp(-z^2/4)/sqrt(pi)
    assert_allclose(wright_m(0.5, z), math.exp(-z * z / 4) / math.sqrt(math.pi), atol=1e-9)


def test_wright_m_routes_agree():
    z = np.array([0.5, 1.0, 1.5])
    series = [wright_m(0.45, zi, method="series") for zi in z]
    assert_allclose(wright_m_mellin_barnes(0.45, z), series, rtol=1e-8)
    assert_allclose(wright_m_array(0.45, z), series, rtol=1e-10)


def test_wright_m_normalised():
    # int_0^inf M_nu(z) dz = 1
    z, w = gauss_legendre_panels(0.0, 30.0, 60, 16)
    assert_allclose(np.sum(w * wright_m_array(0.6, z)), 1.0, atol=1e-8)


def test_wright_m_at_zero():
    assert wright_m(0.6, 0.0) == pytest.approx(1.0 / math.gamma(0.4), rel=1e-14)
    assert_allclose(wright_m_array(0.6, np.array([0.0])), [1.0 / math.gamma(0.4)], rtol=1e-14)


def test_wright_m_domain():
    with pytest.raises(DomainError):
        wright_m(1.0, 0.5)
    with pytest.raises(DomainError):
        wright_m(0.5, -0.5)


def test_gauss_legendre_panels_exact_for_polynomials():
    x, w = gauss_legendre_panels(0.0, 2.0, 3, 8)
    assert_allclose(np.sum(w * x ** 5), 64 / 6, rtol=1e-14)


def test_line_rule_inverts_cahen_mellin():
    # 1/(2 pi i) int Gamma(s) z^-s ds = exp(-z)
    s, w = line_rule(ContourSpec(abscissa=0.5), rate=math.pi / 2)
    z = 1.3
    value = np.sum(w * np.exp(special.loggamma(s) - s * math.log(z)))
    assert_allclose(value.real, math.exp(-z), atol=1e-12)
    assert abs(value.imag) < 1e-12


def test_folded_rule_collects_left_residues():
    z = 1.3

    def log_f(s):
        return special.loggamma(s) - s * math.log(z)

    contour = ContourSpec(abscissa=0.5)
    reach = max(ray_reach(log_f, 0.5 + 1j, -1), ray_reach(log_f, 0.5 - 1j, -1))
    s, w = folded_rule(contour, -1, reach)
    value = np.sum(w * np.exp(log_f(s)))
    assert_allclose(value.real, math.exp(-z), atol=1e-12)
