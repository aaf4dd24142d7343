"""
Independent price computations used to validate the double series.

bs_closed_form        Black-Scholes with dividend yield, the alpha = 2, gamma = 1 limit.
price_by_convolution  The discounted payoff integrated against the maximal-asymmetry
                      Green function.
price_by_mb2          Quadrature of the two-dimensional Mellin-Barnes representation
                      of the price.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy import special

from fspd_decorators import elapsed_time
from fspd_errors import ContourError, DomainError, NoConvergence
from fspd_green import green_max_asym_grid
from fspd_pricer import zero_vol_price
from fspd_special import folded_rule, gauss_legendre_panels, ray_reach
from fspd_types import ContourSpec, MarketQuote, ModelParams, log_moneyness, validate_model

logger = logging.getLogger(__name__)

CONVOLUTION_TOL = 1e-9
PANELS_PER_BATCH = 8
MAX_BATCHES = 64
MB2_CONTOURS = (ContourSpec(abscissa=-1.6), ContourSpec(abscissa=0.4))
MB2_REL_TOL = 1e-4


def bs_closed_form(quote: MarketQuote, sigma: float) -> float:
    """S e^(-q tau) N(d1) - K e^(-r tau) N(d2); sigma = 0 gives the forward intrinsic value."""
    if sigma < 0:
        raise DomainError("sigma", "sigma >= 0")
    if sigma == 0:
        return zero_vol_price(quote)
    S, K, tau = quote.spot, quote.strike, quote.maturity
    vol = sigma * math.sqrt(tau)
    d1 = (math.log(S / K) + (quote.rate - quote.dividend + 0.5 * sigma ** 2) * tau) / vol
    d2 = d1 - vol
    return (S * math.exp(-quote.dividend * tau) * special.ndtr(d1)
            - K * math.exp(-quote.rate * tau) * special.ndtr(d2))


def _payoff(y: np.ndarray, quote: MarketQuote, mu: float) -> np.ndarray:
    drift = quote.maturity * (quote.rate - quote.dividend + mu)
    return quote.spot * np.exp(drift + y) - quote.strike


@elapsed_time
def price_by_convolution(params: ModelParams, quote: MarketQuote, mu: float,
                         quad_spec: Optional[ContourSpec] = None,
                         tol: float = CONVOLUTION_TOL) -> float:
    """
    e^(-r tau) int_{y0}^{Ymax} [S e^(tau (r - q + mu) + y) - K] g(y, tau) dy,
    y0 = -[log] - mu tau, where the payoff turns positive.

    The range above max(y0, 0) is covered by Gauss-Legendre panels of width
    s = (-mu tau^gamma)^(1/alpha), a batch at a time, until a whole batch
    adds less than tol. A negative y0 gets its own panels on [y0, 0], so no
    node falls on y = 0.

    Raises:
        NoConvergence: the integrand has not decayed after MAX_BATCHES batches.
    """
    validate_model(params, for_pricing=True)
    if params.sigma == 0 or mu == 0:
        return zero_vol_price(quote)
    if mu > 0:
        raise DomainError("mu", "mu < 0 (sigma > 0)")
    tau = quote.maturity
    s = (-mu * tau ** params.gamma) ** (1.0 / params.alpha)
    y0 = -log_moneyness(quote) - mu * tau
    pieces = []
    if y0 < 0:
        y, w = gauss_legendre_panels(y0, 0.0, max(2, math.ceil(-y0 / s)), 16)
        pieces.append(np.sum(w * _payoff(y, quote, mu) * green_max_asym_grid(y, tau, params, mu, quad_spec)))
    start = max(y0, 0.0)
    for batch in range(MAX_BATCHES):
        lo = start + batch * PANELS_PER_BATCH * s
        y, w = gauss_legendre_panels(lo, lo + PANELS_PER_BATCH * s, PANELS_PER_BATCH, 16)
        integrand = _payoff(y, quote, mu) * green_max_asym_grid(y, tau, params, mu, quad_spec)
        if np.any(integrand < -1e-8 * quote.strike):
            raise ContourError("price_by_convolution: negative integrand")
        contribution = float(np.sum(w * integrand))
        pieces.append(contribution)
        if batch > 0 and abs(contribution) < tol:
            logger.debug("convolution stopped at y = %.4g after %d batches", lo + PANELS_PER_BATCH * s, batch + 1)
            return math.exp(-quote.rate * tau) * math.fsum(pieces)
    raise NoConvergence(f"price_by_convolution: integrand above {tol:g} at y = {start + MAX_BATCHES * PANELS_PER_BATCH * s:.4g}")


def _mb2_log_integrand(params: ModelParams, log_x: complex, log_y: float):
    a, g = params.alpha, params.gamma
    lg = special.loggamma

    def log_f(u1, u2):
        return (-1j * math.pi * u2 + lg(u2) + lg(1.0 - u2) + lg(u1)
                - lg(1.0 - g * (-1.0 + u2 - u1) / a)
                - u1 * log_x + (1.0 + u1 - u2) / a * log_y)
    return log_f


def _mb2_integral(log_f, c1: ContourSpec, c2: ContourSpec) -> complex:
    h1 = c1.half_length if c1.half_length is not None else 1.0
    h2 = c2.half_length if c2.half_length is not None else 1.0
    u1c, u2c = c1.abscissa, c2.abscissa
    reach1 = max(ray_reach(lambda u: log_f(u, u2c + 1j * sgn * h2), u1c + 1j * sgn * h1, -1)
                 for sgn in (1, -1))
    reach2 = max(ray_reach(lambda u: log_f(u1c + 1j * sgn * h1, u), u2c + 1j * sgn * h2, -1)
                 for sgn in (1, -1))
    u1, w1 = folded_rule(c1, -1, reach1)
    u2, w2 = folded_rule(c2, -1, reach2)
    total = 0j
    for row, weight in zip(u2, w2):
        total += weight * np.sum(w1 * np.exp(log_f(u1, row)))
    return total


@elapsed_time
def price_by_mb2(params: ModelParams, quote: MarketQuote, mu: float,
                 contour_pair: Tuple[ContourSpec, ContourSpec] = MB2_CONTOURS) -> float:
    """
    The price from its two-dimensional Mellin-Barnes integral.

    contour_pair carries the vertex (c1, c2) of the pair of lines in the
    original variables; it must lie in P = {0 < c2 < 1, c2 - c1 > 1}.
    The integral is evaluated in u1 = -1 - t1 + t2, u2 = t2 on two contours
    folded to the left, starting from (c2 - c1 - 1, c2), with
    (-1)^(-u2) = exp(-i pi u2). Panels are halved once and the two results
    must agree to MB2_REL_TOL.

    Raises:
        DomainError: (c1, c2) outside P or a zero base -[log] - mu tau.
        ContourError: imaginary part above 1e-6 |price|, or no agreement on refinement.
    """
    validate_model(params, for_pricing=True)
    if mu >= 0:
        raise DomainError("mu", "mu < 0 (sigma > 0)")
    first, second = contour_pair
    c1, c2 = first.abscissa, second.abscissa
    if not (0.0 < c2 < 1.0 and c2 - c1 > 1.0):
        raise DomainError("contour_pair", "0 < c2 < 1 and c2 - c1 > 1")
    X = -log_moneyness(quote) - mu * quote.maturity
    if X == 0:
        raise DomainError("spot", "-[log] - mu tau != 0 for the two-dimensional integral")
    log_x = complex(math.log(abs(X)), math.pi if X < 0 else 0.0)
    log_y = math.log(-mu * quote.maturity ** params.gamma)
    log_f = _mb2_log_integrand(params, log_x, log_y)
    u1_spec = first.replace(abscissa=c2 - c1 - 1.0)
    prefactor = quote.strike * math.exp(-quote.rate * quote.maturity) / params.alpha

    coarse = prefactor * _mb2_integral(log_f, u1_spec, second)
    fine = prefactor * _mb2_integral(log_f, u1_spec.replace(panel_width=u1_spec.panel_width / 2),
                                     second.replace(panel_width=second.panel_width / 2))
    if abs(fine.imag) > 1e-6 * max(abs(fine.real), 1.0):
        raise ContourError(f"price_by_mb2: imaginary part {fine.imag:.3g}")
    if abs(fine.real - coarse.real) > MB2_REL_TOL * max(abs(fine.real), 1.0):
        raise ContourError(f"price_by_mb2: refinement moved the price by {abs(fine.real - coarse.real):.3g}")
    return float(fine.real)
