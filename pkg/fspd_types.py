"""
Parameter containers and domain validation shared by every fspd module.

The model side (ModelParams) carries the fractional orders alpha and gamma,
the asymmetry theta and the volatility scale sigma. The contract side
(MarketQuote) carries spot, strike, rate, dividend yield and maturity.
Both are frozen pydantic models: structural checks (positivity, finiteness)
happen at construction and raise pydantic.ValidationError, while the
fractional-calculus domain (Feller-Takayasu diamond, series convergence,
maximal negative asymmetry) is checked by validate_model, which raises the
DomainError family from fspd_errors.

Example:
    >>> params = ModelParams(alpha=1.7, gamma=0.9, sigma=0.2)
    >>> params.theta            # defaults to maximal negative asymmetry
    -0.30000000000000004
    >>> validate_model(params, for_pricing=True) is params
    True
"""

import dataclasses
import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from fspd_errors import AsymmetryError, DomainError, SeriesDivergenceError

# Slack used when comparing floats against closed interval bounds.
BOUND_EPS = 1e-12


class ModelParams(BaseModel):
    """
    Fractional orders and scale of the space-time fractional diffusion.

    Attributes:
        alpha: Order of the Riesz-Feller space derivative.
        gamma: Order of the Caputo time derivative.
        sigma: Volatility scale per sqrt-time; 0 is the degenerate limit.
        theta: Asymmetry; left out, it defaults to alpha - 2.
    """
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    alpha: float
    gamma: float
    sigma: float = Field(..., ge=0)
    theta: float

    @model_validator(mode="before")
    @classmethod
    def _default_theta(cls, data):
        if isinstance(data, dict) and data.get("theta") is None and "alpha" in data:
            data = {**data, "theta": float(data["alpha"]) - 2.0}
        return data

    @property
    def omega(self) -> float:
        """Scaling exponent gamma/alpha of g(x,t) = t^-omega G(x t^-omega)."""
        return self.gamma / self.alpha

    def replace(self, **changes) -> "ModelParams":
        return self.model_copy(update=changes)


class MarketQuote(BaseModel):
    """Contract-side state of a European call."""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    spot: float = Field(..., gt=0)
    strike: float = Field(..., gt=0)
    rate: float = 0.0
    dividend: float = 0.0
    maturity: float = Field(..., gt=0)

    def replace(self, **changes) -> "MarketQuote":
        return self.model_copy(update=changes)


class SeriesControl(BaseModel):
    """
    Truncation of the double series.

    The price series is summed over growing N x N squares (n < N, 1 <= m <= N)
    until two consecutive square shells each contribute less than tol.
    """
    model_config = ConfigDict(frozen=True)

    tol: float = Field(1e-6, gt=0)
    max_index: int = Field(64, ge=2)


class ContourSpec(BaseModel):
    """
    A vertical Mellin-Barnes integration line, possibly folded.

    For a straight line, half_length truncates the imaginary range to
    [-T, T]; left as None it is derived from the Gamma decay rate of the
    integrand. For a contour folded around a residue half-plane, half_length
    is the height of the two horizontal rays (default 1).

    nodes, when set, is the total Gauss-Legendre node count on the line;
    otherwise the line is cut into panels of width panel_width carrying
    `order` nodes each.
    """
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    abscissa: float = 0.5
    half_length: Optional[float] = Field(None, gt=0)
    nodes: Optional[int] = Field(None, ge=64)
    panel_width: float = Field(0.5, gt=0)
    order: int = Field(16, ge=4)

    def replace(self, **changes) -> "ContourSpec":
        return self.model_copy(update=changes)


@dataclasses.dataclass(frozen=True)
class PriceResult:
    """
    A call price with its convergence diagnostics.

    Attributes:
        price: Call price in currency units.
        terms_used: Number of nonzero series terms summed.
        last_increment: Absolute contribution of the final square shell.
        converged: True when the stopping rule was met before the cap.
    """
    price: float
    terms_used: int
    last_increment: float
    converged: bool

    def __post_init__(self):
        if not math.isfinite(self.price):
            raise ValueError(f"price must be finite, got {self.price}")


def check_series_domain(alpha: float, gamma: float) -> None:
    """Conditions under which the mu series and the price series converge."""
    if not (1.0 < alpha <= 2.0 + BOUND_EPS):
        raise DomainError("alpha", "1 < alpha <= 2")
    threshold = 1.0 - 1.0 / alpha
    if gamma <= threshold:
        raise SeriesDivergenceError(
            "gamma", f"gamma > 1 - 1/alpha = {threshold:.4f}",
            f"gamma={gamma} <= 1 - 1/alpha = {threshold:.4f}: the series diverge")


def validate_model(params: ModelParams, for_pricing: bool = False) -> ModelParams:
    """
    Check the fractional-calculus domain of a parameter set.

    Args:
        params: The parameters to check.
        for_pricing: Also require 1 < alpha, gamma > 1 - 1/alpha and
            theta = alpha - 2 (maximal negative asymmetry).

    Returns:
        params itself, unchanged.

    Raises:
        DomainError: For the basic ranges and the Feller-Takayasu diamond.
        SeriesDivergenceError: gamma <= 1 - 1/alpha when pricing.
        AsymmetryError: theta != alpha - 2 when pricing.
    """
    alpha, gamma, theta = params.alpha, params.gamma, params.theta
    if not (0.0 < alpha <= 2.0 + BOUND_EPS):
        raise DomainError("alpha", "0 < alpha <= 2")
    if not (0.0 < gamma <= alpha + BOUND_EPS):
        raise DomainError("gamma", "0 < gamma <= alpha")
    if abs(theta) > min(alpha, 2.0 - alpha) + BOUND_EPS:
        raise DomainError("theta", "|theta| <= min(alpha, 2 - alpha) (Feller-Takayasu diamond)")
    if for_pricing:
        check_series_domain(alpha, gamma)
        if abs(theta - (alpha - 2.0)) > BOUND_EPS:
            raise AsymmetryError(
                "theta", "theta = alpha - 2",
                f"theta={theta} != alpha - 2: pricing needs maximal negative asymmetry")
    return params


def log_moneyness(quote: MarketQuote) -> float:
    """ln(S/K) + (r - q) tau, the forward log-moneyness."""
    return math.log(quote.spot / quote.strike) + (quote.rate - quote.dividend) * quote.maturity
