import math

import pytest
from pydantic import ValidationError

from fspd_errors import AsymmetryError, DomainError, OutOfDomain, SeriesDivergenceError
from fspd_types import (ContourSpec, MarketQuote, ModelParams, PriceResult, SeriesControl,
                        log_moneyness, validate_model)


def test_theta_defaults_to_maximal_negative_asymmetry():
    params = ModelParams(alpha=1.7, gamma=0.9, sigma=0.2)
    assert params.theta == pytest.approx(-0.3)
    assert params.omega == pytest.approx(0.9 / 1.7)
    assert ModelParams(alpha=2, gamma=1, sigma=0.2).theta == 0.0


def test_explicit_theta_is_kept():
    assert ModelParams(alpha=1.5, gamma=1, sigma=0.2, theta=0.1).theta == 0.1


@pytest.mark.parametrize("fields", [
    dict(spot=-1, strike=100, maturity=1),
    dict(spot=100, strike=0, maturity=1),
    dict(spot=100, strike=100, maturity=0),
    dict(spot=float("nan"), strike=100, maturity=1),
])
def test_quote_structure_rejected(fields):
    with pytest.raises(ValidationError):
        MarketQuote(**fields)


def test_negative_sigma_rejected():
    with pytest.raises(ValidationError):
        ModelParams(alpha=1.7, gamma=0.9, sigma=-0.1)


def test_models_are_frozen():
    params = ModelParams(alpha=1.7, gamma=0.9, sigma=0.2)
    with pytest.raises(ValidationError):
        params.sigma = 0.3
    assert params.replace(sigma=0.3).sigma == 0.3


def test_controls_validate():
    with pytest.raises(ValidationError):
        SeriesControl(max_index=1)
    with pytest.raises(ValidationError):
        SeriesControl(tol=0)
    with pytest.raises(ValidationError):
        ContourSpec(nodes=10)
    assert set(SeriesControl.model_fields) == {"tol", "max_index"}


def test_series_divergence_names_constraint():
    params = ModelParams(alpha=1.7, gamma=0.1, sigma=0.2)
    validate_model(params)
    with pytest.raises(SeriesDivergenceError, match="1 - 1/alpha") as info:
        validate_model(params, for_pricing=True)
    assert info.value.field == "gamma"
    assert isinstance(info.value, ValueError)
    with pytest.raises(OutOfDomain):
        validate_model(params, for_pricing=True)


def test_pricing_needs_maximal_asymmetry():
    params = ModelParams(alpha=1.7, gamma=0.9, sigma=0.2, theta=0.0)
    assert validate_model(params) is params
    with pytest.raises(AsymmetryError):
        validate_model(params, for_pricing=True)


@pytest.mark.parametrize("alpha, gamma, theta", [
    (2.5, 1.0, 0.5),     # alpha > 2
    (1.5, 1.8, -0.5),    # gamma > alpha
    (1.7, 0.9, 0.5),     # outside the diamond
])
def test_domain_errors(alpha, gamma, theta):
    with pytest.raises(DomainError):
        validate_model(ModelParams(alpha=alpha, gamma=gamma, sigma=0.2, theta=theta))


def test_pricing_rejects_alpha_at_most_one():
    with pytest.raises(DomainError, match="1 < alpha"):
        validate_model(ModelParams(alpha=0.8, gamma=0.5, sigma=0.2, theta=-0.8), for_pricing=True)


def test_log_moneyness_includes_carry():
    quote = MarketQuote(spot=3800, strike=4000, rate=0.01, dividend=0.02, maturity=2)
    assert log_moneyness(quote) == pytest.approx(math.log(0.95) - 0.02)


def test_price_result_must_be_finite():
    with pytest.raises(ValueError):
        PriceResult(float("inf"), 1, 0.0, True)
