"""
Risk-neutral factor mu of the space-time fractional model.

mu = -log int e^y g(y, 1) dy is the Esscher drift correction that makes the
discounted price a martingale. Under maximal negative asymmetry it exists
for 1 < alpha <= 2 and is reached by four routes:

  closed form    gamma = 1:  mu1 = (sigma/sqrt 2)^alpha sec(pi alpha / 2)
  series         mu = -log sum_n (-1)^n Gamma(1+alpha n) / (n! Gamma(1+gamma alpha n)) mu1^n
  Mellin-Barnes  mu = -log (1/alpha) 1/(2 pi i) int Gamma(s) Gamma((1-s)/alpha)
                          / Gamma(gamma s + 1 - gamma) mu1^((s-1)/alpha) ds
  subordination  mu = -log int_0^inf M_gamma(l) exp(-mu1 l^alpha) dl     (gamma < 1)

Since mu1 < 0, the power mu1^((s-1)/alpha) has a complex base and the
straight line of the Mellin-Barnes route diverges; the line is folded to
the right around the poles s = 1 + alpha n, which is the analytic
continuation the series sums.

mu depends only on (alpha, gamma, sigma); MuCache memoizes it per triple.
"""

import dataclasses
import logging
import math
import threading
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import special

from fspd_decorators import log_call
from fspd_errors import DomainError, NoConvergence, NonPositiveSum
from fspd_special import (complex_log_gamma, folded_rule, gauss_legendre_panels, ray_reach,
                          real_part_checked, wright_m_array)
from fspd_types import ContourSpec, ModelParams, SeriesControl, check_series_domain

logger = logging.getLogger(__name__)

MU_SERIES_CONTROL = SeriesControl(tol=1e-12, max_index=200)
SUBORDINATION_NODES = 512


class MuRoute(str, Enum):
    CLOSED_FORM = "closed_form"
    SERIES = "series"
    MELLIN_BARNES = "mellin_barnes"
    SUBORDINATION = "subordination"


@dataclasses.dataclass(frozen=True)
class MuResult:
    """mu with the route that produced it and the number of terms or nodes used."""
    mu: float
    route: MuRoute
    terms_or_nodes: int


def mu_stable(alpha: float, sigma: float) -> float:
    """mu1 = (sigma/sqrt 2)^alpha sec(pi alpha/2), the gamma = 1 factor."""
    if not 1.0 < alpha <= 2.0:
        raise DomainError("alpha", "1 < alpha <= 2")
    if sigma < 0:
        raise DomainError("sigma", "sigma >= 0")
    return (sigma / math.sqrt(2.0)) ** alpha / math.cos(math.pi * alpha / 2.0)


def mu_first_order(params: ModelParams) -> float:
    """Leading term Gamma(1+alpha)/Gamma(1+gamma alpha) mu1 of the series."""
    a, g = params.alpha, params.gamma
    ratio = math.exp(math.lgamma(1.0 + a) - math.lgamma(1.0 + g * a))
    return ratio * mu_stable(a, params.sigma)


def mu_series_terms(params: ModelParams, count: int) -> np.ndarray:
    """The first `count` terms of the inner sum of the mu series."""
    a, g = params.alpha, params.gamma
    mu1 = mu_stable(a, params.sigma)
    n = np.arange(count)
    if mu1 == 0:
        return np.where(n == 0, 1.0, 0.0)
    log_terms = (special.gammaln(1.0 + a * n) - special.gammaln(n + 1.0)
                 - special.gammaln(1.0 + g * a * n) + n * math.log(abs(mu1)))
    return np.exp(log_terms) * np.sign(-mu1) ** n


@log_call
def mu_series(params: ModelParams, control: Optional[SeriesControl] = None) -> MuResult:
    """
    mu from its absolutely convergent residue series.

    Raises:
        SeriesDivergenceError: gamma <= 1 - 1/alpha.
        NoConvergence: terms still above control.tol at control.max_index.
        NonPositiveSum: the truncated inner sum is <= 0.
    """
    control = control or MU_SERIES_CONTROL
    check_series_domain(params.alpha, params.gamma)
    terms = mu_series_terms(params, control.max_index)
    small = np.abs(terms) < control.tol
    stop = np.nonzero(small[1:] & small[:-1])[0]
    if not len(stop):
        raise NoConvergence(
            f"mu series: terms above {control.tol:g} after {control.max_index} terms "
            f"(sigma={params.sigma} outside desk scale?)")
    used = int(stop[0]) + 2
    inner = math.fsum(terms[:used])
    if inner <= 0:
        raise NonPositiveSum(f"mu series: truncated inner sum {inner:.6g} <= 0")
    return MuResult(-math.log(inner), MuRoute.SERIES, used)


def _mb_log_integrand(params: ModelParams, log_mu1: complex):
    a, g = params.alpha, params.gamma

    def log_f(s):
        # a pole of the numerator on the contour raises PoleError
        return (complex_log_gamma(s) + complex_log_gamma((1.0 - s) / a)
                - special.loggamma(g * s + 1.0 - g) + (s - 1.0) / a * log_mu1)
    return log_f


@log_call
def mu_mellin_barnes(params: ModelParams, contour: Optional[ContourSpec] = None) -> MuResult:
    """
    mu by quadrature of its Mellin-Barnes representation.

    Args:
        params: alpha, gamma, sigma (theta is not used).
        contour: Abscissa 0 < c < 1 of the line before folding; half_length
            is the height of the folded rays.

    Raises:
        DomainError: abscissa outside (0, 1).
        ContourError: imaginary residue above 1e-8 or rays not long enough.
    """
    contour = contour or ContourSpec()
    check_series_domain(params.alpha, params.gamma)
    if not 0.0 < contour.abscissa < 1.0:
        raise DomainError("abscissa", "0 < c < 1")
    mu1 = mu_stable(params.alpha, params.sigma)
    if mu1 == 0:
        return MuResult(0.0, MuRoute.MELLIN_BARNES, 0)
    log_f = _mb_log_integrand(params, complex(math.log(-mu1), math.pi))
    h = contour.half_length if contour.half_length is not None else 1.0
    reach = max(ray_reach(log_f, contour.abscissa + 1j * h, +1),
                ray_reach(log_f, contour.abscissa - 1j * h, +1))
    s, w = folded_rule(contour, +1, reach)
    integral = np.sum(w * np.exp(log_f(s))) / params.alpha
    inner = real_part_checked(integral, 1e-8, "mu_mellin_barnes")
    if inner <= 0:
        raise NonPositiveSum(f"mu Mellin-Barnes integral {inner:.6g} <= 0")
    return MuResult(-math.log(inner), MuRoute.MELLIN_BARNES, len(s))


def _subordination_reach(gamma: float, mu1: float, alpha: float, drop: float = 45.0) -> float:
    # M_nu(l) ~ exp(-(1-nu) nu^(nu/(1-nu)) l^(1/(1-nu))) for large l
    b = (1.0 - gamma) * gamma ** (gamma / (1.0 - gamma))
    p = 1.0 / (1.0 - gamma)
    for k in range(1, 400):
        l = 0.5 * k
        if b * l ** p - abs(mu1) * l ** alpha > drop and l > 2.0:
            return l
    raise NoConvergence("subordination integrand does not decay within l = 200")


@log_call
def mu_subordination(params: ModelParams, quad_nodes: int = SUBORDINATION_NODES) -> MuResult:
    """
    mu from the smearing representation int_0^inf M_gamma(l) exp(-mu1 l^alpha) dl.

    Raises:
        DomainError: gamma >= 1 (the kernel is no longer a density).
    """
    if params.gamma >= 1.0:
        raise DomainError("gamma", "gamma < 1 for the subordination route")
    check_series_domain(params.alpha, params.gamma)
    mu1 = mu_stable(params.alpha, params.sigma)
    if mu1 == 0:
        # integral of a unit-mass kernel: exactly 1
        return MuResult(0.0, MuRoute.SUBORDINATION, 0)
    L = _subordination_reach(params.gamma, mu1, params.alpha)
    order = 16
    panels = max(4, quad_nodes // order)
    l, w = gauss_legendre_panels(0.0, L, panels, order)
    kernel = wright_m_array(params.gamma, l)
    integral = float(np.sum(w * kernel * np.exp(-mu1 * l ** params.alpha)))
    if integral <= 0:
        raise NonPositiveSum(f"subordination integral {integral:.6g} <= 0")
    return MuResult(-math.log(integral), MuRoute.SUBORDINATION, len(l))


def compute_mu(params: ModelParams, route: MuRoute | str = MuRoute.SERIES) -> MuResult:
    """Dispatch to one of the mu routes by name."""
    route = MuRoute(route)
    if route is MuRoute.CLOSED_FORM:
        if abs(params.gamma - 1.0) > 1e-12:
            raise DomainError("gamma", "gamma = 1 for the closed form")
        return MuResult(mu_stable(params.alpha, params.sigma), route, 1)
    if route is MuRoute.SERIES:
        return mu_series(params)
    if route is MuRoute.MELLIN_BARNES:
        return mu_mellin_barnes(params)
    return mu_subordination(params)


class MuCache:
    """
    Thread-safe memo of mu per (alpha, gamma, sigma, route).

    Reads go through a dict lookup without locking. A missing entry is
    computed under a lock of its own key, so each key is computed once while
    distinct keys are computed in parallel.
    """

    def __init__(self):
        self._values: Dict[Tuple[float, float, float, str], MuResult] = {}
        self._key_locks: Dict[Tuple[float, float, float, str], threading.Lock] = {}
        self._guard = threading.Lock()

    def get(self, params: ModelParams, route: MuRoute | str = MuRoute.SERIES) -> MuResult:
        key = (params.alpha, params.gamma, params.sigma, MuRoute(route).value)
        found = self._values.get(key)
        if found is not None:
            return found
        with self._guard:
            key_lock = self._key_locks.setdefault(key, threading.Lock())
        with key_lock:
            found = self._values.get(key)
            if found is None:
                found = compute_mu(params, route)
                self._values[key] = found
                logger.debug("mu cache miss %s -> %.12g", key, found.mu)
            return found

    def __len__(self) -> int:
        return len(self._values)
