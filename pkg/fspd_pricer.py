"""
European call price under space-time fractional diffusion.

With X = -[log] - mu tau, [log] = ln(S/K) + (r - q) tau, and Y = -mu tau^gamma,
the price is the absolutely convergent double series

    C = K e^(-r tau) / alpha * sum_{n >= 0, m >= 1} (-1)^n / (n! Gamma(1 - gamma (n - m)/alpha))
                                                     * X^n * Y^((m - n)/alpha).

Terms are built in log space (ln|.| plus a sign) and exponentiated once, so
n! and the Gamma ratio never overflow on their own. Terms on a pole of the
Gamma function in the denominator are exact zeros. The series is summed
over growing N x N squares (n < N, 1 <= m <= N) until two consecutive square
shells each add less than tol.

The special cases (FMLS, Black-Scholes, neural, time-fractional) pin the
orders and use their own coefficient forms; they must agree with the
general series.
"""

import dataclasses
import logging
import math
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import special

from fspd_decorators import log_call
from fspd_errors import DomainError, NegativePrice, NoConvergence
from fspd_risk_neutral import MuRoute, compute_mu, mu_stable
from fspd_special import log_reciprocal_gamma
from fspd_types import (BOUND_EPS, MarketQuote, ModelParams, PriceResult, SeriesControl,
                        log_moneyness, validate_model)

logger = logging.getLogger(__name__)

ATMF_EPS = 1e-12
FIRST_BLOCK = 16


@dataclasses.dataclass(frozen=True)
class TermGrid:
    """
    Individual summands of the price series.

    values[n, m - 1] holds term (n, m) for 0 <= n <= n_max, 1 <= m <= m_max.
    """
    values: np.ndarray
    n_max: int
    m_max: int

    def term(self, n: int, m: int) -> float:
        if not (0 <= n <= self.n_max and 1 <= m <= self.m_max):
            raise IndexError(f"term ({n}, {m}) outside the grid")
        return float(self.values[n, m - 1])


class SpecialCase(str, Enum):
    FMLS = "fmls"
    BLACK_SCHOLES_SERIES = "black_scholes_series"
    NEURAL = "neural"
    TIME_FRACTIONAL = "time_fractional"


# A coefficient rule maps index arrays (n, m) to (ln|c|, sign(c)) for
# c = (-1)^n / (n! Gamma(1 - gamma (n - m)/alpha)) or its pinned form.
CoefficientRule = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]


def _pole_free(arg: np.ndarray) -> np.ndarray:
    # Snap arguments that are integers up to rounding so rgamma sees the exact pole
    nearest = np.round(arg)
    close = np.abs(arg - nearest) < BOUND_EPS * np.maximum(1.0, np.abs(arg))
    return np.where(close & (nearest <= 0), nearest, arg)


def _general_rule(alpha: float, gamma: float) -> CoefficientRule:
    def rule(n, m):
        log_rg, sign_rg = log_reciprocal_gamma(_pole_free(1.0 - gamma * (n - m) / alpha))
        return log_rg - special.gammaln(n + 1.0), sign_rg * (1 - 2 * (n % 2))
    return rule


def _neural_rule(n, m):
    # alpha = gamma: 1/Gamma(1 - n + m) vanishes for n > m, leaving 1/(n! (m - n)!)
    keep = m >= n
    diff = np.where(keep, m - n, 0)
    log_c = np.where(keep, -special.gammaln(n + 1.0) - special.gammaln(diff + 1.0), -np.inf)
    return log_c, np.where(keep, 1 - 2 * (n % 2), 0)


def _terms(rule: CoefficientRule, alpha: float, quote: MarketQuote, X: float, Y: float,
           n_max: int, m_max: int) -> np.ndarray:
    n, m = np.meshgrid(np.arange(n_max + 1), np.arange(1, m_max + 1), indexing="ij")
    log_c, sign = rule(n, m)
    log_prefactor = math.log(quote.strike / alpha) - quote.rate * quote.maturity
    log_y_power = (m - n) / alpha * math.log(Y)
    if X == 0:
        # 0^0 = 1; every n >= 1 term vanishes
        sign = np.where(n == 0, sign, 0)
        log_x_power = np.zeros(n.shape)
    else:
        log_x_power = n * math.log(abs(X))
        if X < 0:
            sign = sign * (1 - 2 * (n % 2))
    with np.errstate(over="ignore", invalid="ignore"):
        values = np.exp(log_prefactor + log_c + log_x_power + log_y_power)
    return np.where(sign == 0, 0.0, sign * values)


def _bases(params: ModelParams, quote: MarketQuote, mu: float) -> Tuple[float, float]:
    if mu >= 0:
        raise DomainError("mu", "mu < 0 (sigma > 0)")
    X = -log_moneyness(quote) - mu * quote.maturity
    Y = -mu * quote.maturity ** params.gamma
    return X, Y


def _sum_squares(rule: CoefficientRule, alpha: float, quote: MarketQuote, X: float, Y: float,
                 control: SeriesControl) -> PriceResult:
    size = min(FIRST_BLOCK, control.max_index)
    while True:
        values = _terms(rule, alpha, quote, X, Y, size - 1, size)
        small_run = 0
        for N in range(1, size + 1):
            row, column = values[N - 1, :N], values[:N - 1, N - 1]
            if not (np.all(np.isfinite(row)) and np.all(np.isfinite(column))):
                raise NoConvergence(f"price series: terms overflow in shell N={N}")
            shell = math.fsum(row) + math.fsum(column)
            small_run = small_run + 1 if abs(shell) < control.tol else 0
            if small_run == 2:
                square = values[:N, :N]
                price = math.fsum(square.ravel())
                return PriceResult(price, int(np.count_nonzero(square)), abs(shell), True)
        if size >= control.max_index:
            raise NoConvergence(
                f"price series: square shells still above {control.tol:g} at N={size}")
        size = min(2 * size, control.max_index)


def zero_vol_price(quote: MarketQuote) -> float:
    """sigma -> 0 limit: the discounted intrinsic value of the forward."""
    forward = quote.spot * math.exp((quote.rate - quote.dividend) * quote.maturity)
    return math.exp(-quote.rate * quote.maturity) * max(forward - quote.strike, 0.0)


def _checked(result: PriceResult, control: SeriesControl) -> PriceResult:
    if result.price < -control.tol:
        raise NegativePrice(f"series converged to {result.price:.6g} < -{control.tol:g}")
    return result


@log_call
def call_price_series(params: ModelParams, quote: MarketQuote, mu: float,
                      control: Optional[SeriesControl] = None) -> PriceResult:
    """
    The double-series call price.

    Args:
        params: Pricing parameters (theta = alpha - 2, 1 < alpha <= 2,
            1 - 1/alpha < gamma <= alpha).
        quote: Contract and market state.
        mu: Risk-neutral factor for params, from fspd_risk_neutral; reused
            across a strike sweep.
        control: Tolerance and cap of the square truncation.

    Raises:
        DomainError: invalid parameters or mu > 0.
        NoConvergence: shells still above tol at control.max_index.
        NegativePrice: converged value below -tol.
    """
    control = control or SeriesControl()
    validate_model(params, for_pricing=True)
    if params.sigma == 0 or mu == 0:
        return PriceResult(zero_vol_price(quote), 0, 0.0, True)
    X, Y = _bases(params, quote, mu)
    result = _sum_squares(_general_rule(params.alpha, params.gamma), params.alpha, quote, X, Y, control)
    logger.debug("series price %.12g from %d terms", result.price, result.terms_used)
    return _checked(result, control)


def term_grid(params: ModelParams, quote: MarketQuote, mu: float, n_max: int, m_max: int) -> TermGrid:
    """The summands (n, m), 0 <= n <= n_max, 1 <= m <= m_max."""
    validate_model(params, for_pricing=True)
    if n_max < 0 or m_max < 1:
        raise DomainError("n_max/m_max", "n_max >= 0 and m_max >= 1")
    X, Y = _bases(params, quote, mu)
    values = _terms(_general_rule(params.alpha, params.gamma), params.alpha, quote, X, Y, n_max, m_max)
    return TermGrid(values, n_max, m_max)


def partial_sums(grid: TermGrid) -> np.ndarray:
    """Cumulative price over m <= 1, 2, ..., m_max with every n of the grid."""
    columns = [math.fsum(grid.values[:, j]) for j in range(grid.m_max)]
    return np.array([math.fsum(columns[:j + 1]) for j in range(grid.m_max)])


def _pinned(case: SpecialCase, params: ModelParams) -> None:
    a, g = params.alpha, params.gamma
    if case is SpecialCase.FMLS and abs(g - 1.0) > BOUND_EPS:
        raise DomainError("gamma", "gamma = 1 for the FMLS case")
    if case is SpecialCase.BLACK_SCHOLES_SERIES and (abs(a - 2.0) > BOUND_EPS or abs(g - 1.0) > BOUND_EPS):
        raise DomainError("alpha/gamma", "alpha = 2 and gamma = 1 for the Black-Scholes case")
    if case is SpecialCase.NEURAL and abs(a - g) > BOUND_EPS:
        raise DomainError("gamma", "gamma = alpha for the neural case")
    if case is SpecialCase.TIME_FRACTIONAL and abs(a - 2.0) > BOUND_EPS:
        raise DomainError("alpha", "alpha = 2 for the time-fractional case")


@log_call
def call_price_special(case: SpecialCase | str, params: ModelParams, quote: MarketQuote,
                       mu: Optional[float] = None,
                       control: Optional[SeriesControl] = None) -> PriceResult:
    """
    Price through one of the pinned-order reductions of the series.

      fmls                  gamma = 1:     1/Gamma(1 + (m - n)/alpha), Y = -mu tau
      black_scholes_series  alpha = 2, gamma = 1, mu = -sigma^2/2
      neural                gamma = alpha: 1/(n! (m - n)!) over m >= n
      time_fractional       alpha = 2

    mu defaults to the closed form when gamma = 1 and to the mu series otherwise.

    Raises:
        DomainError: parameters do not match the case's pinning.
    """
    case = SpecialCase(case)
    control = control or SeriesControl()
    validate_model(params, for_pricing=True)
    _pinned(case, params)
    if mu is None:
        if case in (SpecialCase.FMLS, SpecialCase.BLACK_SCHOLES_SERIES):
            mu = mu_stable(params.alpha, params.sigma)
        else:
            mu = compute_mu(params, MuRoute.SERIES).mu
    if params.sigma == 0 or mu == 0:
        return PriceResult(zero_vol_price(quote), 0, 0.0, True)
    X, Y = _bases(params, quote, mu)
    if case is SpecialCase.NEURAL:
        rule = _neural_rule
    elif case is SpecialCase.TIME_FRACTIONAL:
        rule = _general_rule(2.0, params.gamma)
    elif case is SpecialCase.BLACK_SCHOLES_SERIES:
        rule = _general_rule(2.0, 1.0)
    else:
        rule = _general_rule(params.alpha, 1.0)
    return _checked(_sum_squares(rule, params.alpha, quote, X, Y, control), control)


def atmf_leading_order(params: ModelParams, quote: MarketQuote, mu: Optional[float] = None) -> float:
    """
    Leading order in sigma of the at-the-money-forward price for alpha = 2:
    (S/2) sigma / Gamma(1 + gamma/2) sqrt(tau^gamma / Gamma(1 + 2 gamma)).
    For gamma = 1 this is S sigma sqrt(tau) / sqrt(2 pi).

    mu does not enter at this order and is ignored.
    """
    if abs(params.alpha - 2.0) > BOUND_EPS:
        raise DomainError("alpha", "alpha = 2")
    if abs(log_moneyness(quote)) > ATMF_EPS:
        raise DomainError("spot", "S = K exp(-(r - q) tau) (at the money forward)")
    g, tau = params.gamma, quote.maturity
    return (quote.spot / 2.0 * params.sigma / math.gamma(1.0 + g / 2.0)
            * math.sqrt(tau ** g / math.gamma(1.0 + 2.0 * g)))
