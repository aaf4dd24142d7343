import math

import pytest
from numpy.testing import assert_allclose

from fspd_errors import DomainError
from fspd_oracle import bs_closed_form, price_by_convolution, price_by_mb2
from fspd_pricer import call_price_series
from fspd_risk_neutral import mu_series, mu_stable
from fspd_types import ContourSpec, MarketQuote, ModelParams


def test_bs_closed_form_at_the_money():
    quote = MarketQuote(spot=100, strike=100, maturity=1)
    assert bs_closed_form(quote, 0.2) == pytest.approx(7.96557, abs=1e-4)


def test_bs_closed_form_limits():
    quote = MarketQuote(spot=100, strike=90, rate=0.02, dividend=0.01, maturity=1)
    forward = 100 * math.exp(0.01)
    assert bs_closed_form(quote, 0.0) == pytest.approx(math.exp(-0.02) * (forward - 90))
    deep = quote.replace(strike=1e-8)
    assert bs_closed_form(deep, 0.2) == pytest.approx(100 * math.exp(-0.01), rel=1e-9)


def test_bs_call_above_discounted_forward_payoff():
    quote = MarketQuote(spot=100, strike=105, rate=0.03, dividend=0.02, maturity=2)
    call = bs_closed_form(quote, 0.25)
    assert call > 100 * math.exp(-0.04) - 105 * math.exp(-0.06)


@pytest.mark.slow
@pytest.mark.parametrize("alpha, gamma", [(1.7, 0.9), (1.5, 0.8)])
def test_convolution_matches_series(table1_quote, alpha, gamma):
    params = ModelParams(alpha=alpha, gamma=gamma, sigma=0.2)
    mu = mu_series(params).mu
    series = call_price_series(params, table1_quote, mu).price
    assert_allclose(price_by_convolution(params, table1_quote, mu), series, rtol=1e-3)


@pytest.mark.slow
def test_convolution_matches_black_scholes():
    params = ModelParams(alpha=2, gamma=1, sigma=0.2)
    quote = MarketQuote(spot=100, strike=105, rate=0.02, maturity=1)
    assert_allclose(price_by_convolution(params, quote, mu_stable(2.0, 0.2)),
                    bs_closed_form(quote, 0.2), rtol=1e-4)


def test_convolution_worthless_call(table1_params, table1_mu):
    quote = MarketQuote(spot=100, strike=1e6, rate=0.01, maturity=1)
    assert abs(price_by_convolution(table1_params, quote, table1_mu)) < 1e-8


@pytest.mark.slow
@pytest.mark.parametrize("alpha, gamma", [(1.7, 0.9), (1.5, 0.8)])
def test_mb2_matches_series(table1_quote, alpha, gamma):
    params = ModelParams(alpha=alpha, gamma=gamma, sigma=0.2)
    mu = mu_series(params).mu
    series = call_price_series(params, table1_quote, mu).price
    assert_allclose(price_by_mb2(params, table1_quote, mu), series, rtol=1e-3)


@pytest.mark.slow
def test_mb2_vertex_independent(table1_params, table1_quote, table1_mu):
    first = price_by_mb2(table1_params, table1_quote, table1_mu)
    second = price_by_mb2(table1_params, table1_quote, table1_mu,
                          (ContourSpec(abscissa=-1.2), ContourSpec(abscissa=0.6)))
    assert_allclose(first, second, rtol=1e-4)
    assert first == pytest.approx(290.13, abs=0.5)


@pytest.mark.slow
def test_mb2_matches_black_scholes():
    params = ModelParams(alpha=2, gamma=1, sigma=0.2)
    quote = MarketQuote(spot=100, strike=100, maturity=1)
    assert_allclose(price_by_mb2(params, quote, mu_stable(2.0, 0.2)),
                    bs_closed_form(quote, 0.2), rtol=1e-3)


@pytest.mark.parametrize("c1, c2", [(-1.6, 1.2), (-0.3, 0.4), (-1.6, 0.0)])
def test_mb2_vertex_outside_polyhedron(table1_params, table1_quote, table1_mu, c1, c2):
    with pytest.raises(DomainError):
        price_by_mb2(table1_params, table1_quote, table1_mu, (ContourSpec(abscissa=c1), ContourSpec(abscissa=c2)))
