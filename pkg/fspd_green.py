"""
Green function of the space-time fractional diffusion equation.

g^theta_{alpha,gamma}(x, t) is evaluated by quadrature of its Mellin-Barnes
representation

    g(x,t) = 1/(alpha x) 1/(2 pi i) int  Gamma(t1/alpha) Gamma(1 - t1/alpha) Gamma(1 - t1)
                                      / (Gamma(1 - gamma t1/alpha) Gamma(rho t1) Gamma(1 - rho t1))
                                      * (x / s)^t1  dt1,        rho = (alpha - theta)/(2 alpha),

along Re t1 = c in (0, 1), with s = (D t^gamma)^(1/alpha) and D > 0 the
diffusion scale. In pricing D = -mu, the risk-neutral factor. For x < 0 the
reflection g^theta(-x) = g^-theta(x) is used; x = 0 is rejected.

Under maximal negative asymmetry theta = alpha - 2 the kernel for x > 0
collapses to Gamma(1 - t1)/Gamma(1 - gamma t1/alpha), whose residue sum is
g(y) = M_{gamma/alpha}(y/s) / (alpha s); green_closed_form_right uses it as
a cross-check.

The Gamma kernel depends only on t1, so it is computed once per call and
contracted against (x/s)^t1 for a whole grid of x.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy import special

from fspd_decorators import log_call
from fspd_errors import AsymmetryError, ContourError, DomainError
from fspd_special import gauss_legendre_panels, line_rule, wright_m_mellin_barnes
from fspd_types import BOUND_EPS, ContourSpec, ModelParams, validate_model

logger = logging.getLogger(__name__)

REFINE_TOL = 1e-9
MAX_REFINE = 4
BLOCK = 64


def default_scale(params: ModelParams) -> float:
    """D = (sigma/sqrt 2)^alpha; for alpha = 2 the heat kernel has variance sigma^2 t."""
    return (params.sigma / math.sqrt(2.0)) ** params.alpha


def _decay_rate(alpha: float, gamma: float, theta: float) -> float:
    return math.pi * (2.0 - gamma + theta) / (2.0 * alpha)


def _log_kernel(t1: np.ndarray, alpha: float, gamma: float, theta: float) -> np.ndarray:
    rho = (alpha - theta) / (2.0 * alpha)
    lg = special.loggamma
    if abs(theta - (alpha - 2.0)) <= BOUND_EPS:
        # rho = 1/alpha: two Gamma pairs cancel
        return lg(1.0 - t1) - lg(1.0 - gamma * t1 / alpha)
    return (lg(t1 / alpha) + lg(1.0 - t1 / alpha) + lg(1.0 - t1)
            - lg(1.0 - gamma * t1 / alpha) - lg(rho * t1) - lg(1.0 - rho * t1))


def _positive_side(x: np.ndarray, s: float, alpha: float, gamma: float, theta: float,
                   contour: ContourSpec) -> np.ndarray:
    """g^theta at x > 0 for scale s, refining the panels until stable."""
    if (alpha - theta) <= BOUND_EPS:
        # rho = 0: the kernel carries 1/Gamma(0) and the density vanishes on x > 0
        return np.zeros_like(x)
    rate = _decay_rate(alpha, gamma, theta)
    previous = None
    line = contour
    for _ in range(MAX_REFINE + 1):
        t1, w = line_rule(line, rate)
        kernel = w * np.exp(_log_kernel(t1, alpha, gamma, theta))
        values = np.empty(x.shape)
        for i0 in range(0, len(x), BLOCK):
            block = x[i0:i0 + BLOCK]
            integral = np.exp(np.outer(np.log(block / s), t1)) @ kernel
            if np.any(np.abs(integral.imag) > 1e-8 * alpha * block):
                raise ContourError("green_mb: imaginary residue above 1e-8")
            values[i0:i0 + BLOCK] = integral.real / (alpha * block)
        if previous is not None and np.max(np.abs(values - previous)) < REFINE_TOL:
            return values
        if line.nodes is not None:
            return values
        previous = values
        line = line.replace(panel_width=line.panel_width / 2)
    logger.warning("green_mb: panel refinement did not settle below %g", REFINE_TOL)
    return values


def _check_contour(contour: ContourSpec) -> None:
    if not 0.0 < contour.abscissa < 1.0:
        raise DomainError("abscissa", "0 < c < 1")


def green_mb_grid(x, t: float, params: ModelParams, contour: Optional[ContourSpec] = None,
                  scale: Optional[float] = None) -> np.ndarray:
    """
    g^theta_{alpha,gamma}(x, t) on an array of nonzero x.

    Args:
        x: Points, none equal to 0.
        t: Time, t > 0.
        params: alpha, gamma, theta (general theta in the diamond).
        contour: Line Re t1 = c, 0 < c < 1.
        scale: Diffusion scale D > 0; defaults to (sigma/sqrt 2)^alpha.

    Raises:
        DomainError: x = 0, t <= 0, scale <= 0 or parameters out of domain.
        ContourError: the quadrature left an imaginary part or a negative density.
    """
    validate_model(params)
    contour = contour or ContourSpec()
    _check_contour(contour)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x == 0):
        raise DomainError("x", "x != 0")
    if t <= 0:
        raise DomainError("t", "t > 0")
    D = default_scale(params) if scale is None else scale
    if D <= 0:
        raise DomainError("scale", "diffusion scale D > 0")
    s = (D * t ** params.gamma) ** (1.0 / params.alpha)
    a, g, th = params.alpha, params.gamma, params.theta
    out = np.empty(x.shape)
    right = x > 0
    if np.any(right):
        out[right] = _positive_side(x[right], s, a, g, th, contour)
    if np.any(~right):
        out[~right] = _positive_side(-x[~right], s, a, g, -th, contour)
    if np.any(out < -1e-8):
        raise ContourError(f"green_mb: negative density {out.min():.3g}")
    return out


@log_call
def green_mb(x: float, t: float, params: ModelParams, contour: Optional[ContourSpec] = None,
             scale: Optional[float] = None) -> float:
    """Scalar g^theta_{alpha,gamma}(x, t); see green_mb_grid."""
    return float(green_mb_grid(np.array([x]), t, params, contour, scale)[0])


def _check_max_asym(params: ModelParams, mu: float) -> None:
    validate_model(params)
    if abs(params.theta - (params.alpha - 2.0)) > BOUND_EPS:
        raise AsymmetryError("theta", "theta = alpha - 2")
    if mu >= 0:
        raise DomainError("mu", "mu < 0")


def green_max_asym_grid(y, tau: float, params: ModelParams, mu: float,
                        contour: Optional[ContourSpec] = None) -> np.ndarray:
    """
    The maximal-asymmetry density g(y, tau) with scale -mu, on an array of y.

    For y > 0 this integrates the reduced kernel Gamma(1 - t1)/Gamma(1 - gamma t1/alpha);
    for y < 0 it is the general form with theta reflected to 2 - alpha.
    """
    _check_max_asym(params, mu)
    return green_mb_grid(y, tau, params, contour, scale=-mu)


@log_call
def green_max_asym(y: float, tau: float, params: ModelParams, mu: float,
                   contour: Optional[ContourSpec] = None) -> float:
    """Scalar maximal-asymmetry density; see green_max_asym_grid."""
    return float(green_max_asym_grid(np.array([y]), tau, params, mu, contour)[0])


def green_closed_form_right(y, tau: float, params: ModelParams, mu: float) -> np.ndarray:
    """
    g(y, tau) = M_{gamma/alpha}(y/s) / (alpha s) for y > 0 under maximal
    negative asymmetry, s = (-mu tau^gamma)^(1/alpha). Needs gamma < alpha.
    """
    _check_max_asym(params, mu)
    if params.gamma >= params.alpha:
        raise DomainError("gamma", "gamma < alpha for the Wright form")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y <= 0):
        raise DomainError("y", "y > 0")
    s = (-mu * tau ** params.gamma) ** (1.0 / params.alpha)
    return wright_m_mellin_barnes(params.gamma / params.alpha, y / s) / (params.alpha * s)


def green_normalization(t: float, params: ModelParams, scale: Optional[float] = None,
                        contour: Optional[ContourSpec] = None,
                        span: tuple = (1e-9, 1e4)) -> float:
    """
    int g(y, t) dy over span[0] s <= |y| <= span[1] s, with y = +-s e^u and
    Gauss-Legendre panels in u.
    """
    D = default_scale(params) if scale is None else scale
    s = (D * t ** params.gamma) ** (1.0 / params.alpha)
    lo, hi = math.log(span[0]), math.log(span[1])
    u, w = gauss_legendre_panels(lo, hi, math.ceil(hi - lo), 16)
    y = s * np.exp(u)
    right = green_mb_grid(y, t, params, contour, D)
    left = green_mb_grid(-y, t, params, contour, D)
    return float(np.sum(w * y * (right + left)))
