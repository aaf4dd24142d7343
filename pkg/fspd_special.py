"""
Scalar special functions and Mellin-Barnes quadrature rules.

Gamma-family values come from scipy.special and are wrapped here with the
pole handling the series need: reciprocal_gamma is exactly zero on the
poles, log_gamma_signed raises PoleError there.

The Mittag-Leffler function E_a and the Wright M-function M_nu are summed
from their power series with exact-rounded accumulation (math.fsum). Both
series cancel badly once |z| grows (E_a for z < 0), and both functions then
fall back to a vertical-line quadrature of a Mellin-Barnes representation,
for M_nu

    M_nu(z) = 1/(2 pi i) int Gamma(s) / Gamma(nu s + 1 - nu) z^-s ds,  c > 0.

Contour rules return complex nodes s_k and weights w_k with
sum(w_k f(s_k)) ~ 1/(2 pi i) int f(s) ds, so that callers write the
integrand once and reuse it on straight or folded contours.
"""

import dataclasses
import logging
import math
from typing import Callable, Tuple

import numpy as np
from scipy import special

from fspd_errors import ContourError, DomainError, NoConvergence, PoleError
from fspd_types import ContourSpec

logger = logging.getLogger(__name__)

DEFAULT_TERM_CAP = 400

# Target relative size of the truncated tail of a line integral.
LINE_EPS = 1e-17
MAX_HALF_LENGTH = 4000.0


@dataclasses.dataclass(frozen=True)
class SignedLog:
    """A real number stored as (ln|value|, sign); sign 0 means exactly zero."""
    log_abs: float
    sign: int

    @property
    def value(self) -> float:
        return 0.0 if self.sign == 0 else self.sign * math.exp(self.log_abs)

    def __mul__(self, other: "SignedLog") -> "SignedLog":
        if self.sign == 0 or other.sign == 0:
            return SignedLog(0.0, 0)
        return SignedLog(self.log_abs + other.log_abs, self.sign * other.sign)


def is_gamma_pole(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def log_gamma_signed(x: float) -> SignedLog:
    """ln|Gamma(x)| and sign(Gamma(x)) for real x off the poles."""
    if is_gamma_pole(x):
        raise PoleError("x", "x not in {0, -1, -2, ...}", f"Gamma has a pole at x={x}")
    return SignedLog(float(special.gammaln(x)), int(special.gammasgn(x)))


def reciprocal_gamma(x):
    """1/Gamma(x); an entire function, exactly 0 at x = 0, -1, -2, ..."""
    result = special.rgamma(x)
    return float(result) if np.ndim(result) == 0 else result


def log_reciprocal_gamma(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorised ln|1/Gamma(x)| and its sign, overflow-free for large |x|.

    Poles of Gamma get sign 0 (and log -inf), so that exp(log) * sign is an
    exact zero.
    """
    x = np.asarray(x, dtype=float)
    poles = (x <= 0) & (x == np.floor(x))
    safe = np.where(poles, 0.5, x)
    log_abs = np.where(poles, -np.inf, -special.gammaln(safe))
    sign = np.where(poles, 0, special.gammasgn(safe)).astype(int)
    return log_abs, sign


def complex_log_gamma(z):
    """Principal branch of log Gamma(z)."""
    z_arr = np.asarray(z, dtype=complex)
    on_pole = (z_arr.imag == 0) & (z_arr.real <= 0) & (z_arr.real == np.floor(z_arr.real))
    if np.any(on_pole):
        raise PoleError("z", "z not in {0, -1, -2, ...}", f"log Gamma has a pole at {z}")
    result = special.loggamma(z_arr)
    return complex(result) if np.ndim(result) == 0 else result


def _sum_until_small(terms: np.ndarray, tol: float, what: str) -> float:
    """
    Exact-rounded sum of `terms`, stopping after two consecutive terms fall
    below tol/10 (relative to the running sum once it exceeds 1).
    """
    scale = np.maximum(1.0, np.abs(np.cumsum(terms)))
    small = np.abs(terms) < tol / 10 * scale
    both = np.nonzero(small[1:] & small[:-1])[0]
    if len(both):
        return math.fsum(terms[: both[0] + 2])
    raise NoConvergence(f"{what}: terms still above {tol:g} after {len(terms)} terms")


def mittag_leffler(a: float, z: float, tol: float = 1e-10, max_terms: int = DEFAULT_TERM_CAP) -> float:
    """
    E_a(z) = sum z^n / Gamma(a n + 1).

    For z < 0 the series alternates; once its largest term leaves less than
    tol of headroom in double precision (or the terms have not decayed by
    max_terms), 0 < a < 2 goes to mittag_leffler_mellin_barnes.

    Raises:
        DomainError: a <= 0.
        NoConvergence: the terms did not decay within max_terms, or
            cancellation for z < 0 and a >= 2 would exceed tol.
    """
    if a <= 0:
        raise DomainError("a", "a > 0")
    if z == 0:
        return 1.0
    n = np.arange(max_terms)
    with np.errstate(over="ignore"):
        terms = np.exp(n * math.log(abs(z)) - special.gammaln(a * n + 1.0))
    if z < 0:
        terms = terms * np.where(n % 2 == 1, -1.0, 1.0)
        peak = float(np.max(np.abs(terms)))
        tail = float(np.max(np.abs(terms[-2:])))
        if peak * 1e-15 > tol / 10 or tail > tol / 10:
            if a < 2.0:
                logger.debug("mittag_leffler(a=%s, z=%s): series peak %.3g, switching to quadrature", a, z, peak)
                return mittag_leffler_mellin_barnes(a, z)
            raise NoConvergence(
                f"mittag_leffler(a={a}, z={z}): alternating series peaks at {peak:.3g}, "
                f"cancellation exceeds {tol:g}")
    return _sum_until_small(terms, tol, f"mittag_leffler(a={a}, z={z})")


def _wright_m_terms(nu: float, z: float, max_terms: int) -> np.ndarray:
    n = np.arange(max_terms)
    log_rg, sign = log_reciprocal_gamma(-nu * n + 1.0 - nu)
    with np.errstate(divide="ignore"):
        log_terms = n * math.log(z) - special.gammaln(n + 1.0) + log_rg
    return np.exp(log_terms) * sign * np.where(n % 2 == 1, -1.0, 1.0)


def wright_m(nu: float, z: float, tol: float = 1e-10, max_terms: int = DEFAULT_TERM_CAP,
             method: str = "auto") -> float:
    """
    The Wright M-function M_nu(z) for 0 < nu < 1 and z >= 0.

    Args:
        nu: Order, 0 < nu < 1.
        z: Argument, z >= 0.
        tol: Absolute accuracy target.
        max_terms: Term cap of the series.
        method: "series", "mb" (Mellin-Barnes quadrature) or "auto", which
            keeps the series while its largest term leaves tol of headroom
            in double precision.

    Raises:
        DomainError: nu or z out of range.
        NoConvergence: series method requested and the terms did not decay.
    """
    if not 0.0 < nu < 1.0:
        raise DomainError("nu", "0 < nu < 1")
    if z < 0:
        raise DomainError("z", "z >= 0")
    if z == 0:
        return reciprocal_gamma(1.0 - nu)
    if method == "mb":
        return float(wright_m_mellin_barnes(nu, z))
    terms = _wright_m_terms(nu, z, max_terms)
    if method == "auto":
        peak = float(np.max(np.abs(terms)))
        tail = float(np.max(np.abs(terms[-2:])))
        if peak * 1e-15 > tol / 10 or tail > tol / 10:
            logger.debug("wright_m(nu=%s, z=%s): series peak %.3g, switching to quadrature", nu, z, peak)
            return float(wright_m_mellin_barnes(nu, z))
    return _sum_until_small(terms, tol, f"wright_m(nu={nu}, z={z})")


# --------------------------------------------------------------------------
# Quadrature rules


def gauss_legendre_panels(a: float, b: float, panels: int, order: int = 16) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [a, b]."""
    xi, wi = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * xi[None, :]).ravel()
    weights = (half[:, None] * wi[None, :]).ravel()
    return nodes, weights


def _segment_rule(start: complex, end: complex, panels: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    u, w = gauss_legendre_panels(0.0, 1.0, panels, order)
    return start + (end - start) * u, (end - start) * w


def half_length_for(rate: float, contour: ContourSpec) -> float:
    """Imaginary truncation T such that e^(-rate T) is below LINE_EPS."""
    if contour.half_length is not None:
        return contour.half_length
    if rate <= 0:
        raise ContourError(f"integrand does not decay along the line (rate={rate:g})")
    return min((math.log(1.0 / LINE_EPS) + 10.0) / rate, MAX_HALF_LENGTH)


def line_rule(contour: ContourSpec, rate: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes on the line Re s = c, |Im s| <= T with weights for ds/(2 pi i).

    Args:
        contour: Abscissa, truncation and node budget.
        rate: Exponential decay rate of the integrand in |Im s|, used when
            contour.half_length is None.
    """
    T = half_length_for(rate, contour)
    if contour.nodes is not None:
        panels = max(1, contour.nodes // contour.order)
    else:
        panels = max(4, math.ceil(2 * T / contour.panel_width))
    t, w = gauss_legendre_panels(-T, T, panels, contour.order)
    return contour.abscissa + 1j * t, w / (2 * math.pi) + 0j


def ray_reach(log_magnitude: Callable[[np.ndarray], np.ndarray], start: complex, direction: int,
              drop: float = 42.0, step: float = 1.0, cap: int = 800) -> float:
    """
    How far a horizontal ray from `start` must run before the integrand has
    fallen `drop` e-folds below its largest value on the ray.
    """
    x = start + direction * step * np.arange(cap + 1)
    logs = np.real(log_magnitude(x))
    logs = np.where(np.isfinite(logs), logs, -np.inf)
    above = np.nonzero(logs > np.max(logs) - drop)[0]
    last = int(above[-1])
    if last >= cap - 1:
        raise ContourError(f"integrand still above threshold {cap * step:g} units along the ray")
    return (last + 2) * step


def folded_rule(contour: ContourSpec, direction: int, reach: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes for the line Re s = c folded around the half-plane on the side
    `direction` (+1 right, -1 left), with weights for ds/(2 pi i).

    The contour keeps the orientation of the upward line: for direction=+1 it
    runs from c + reach - ih to c - ih, up to c + ih and out to
    c + reach + ih (a clockwise loop around the right-hand poles); for
    direction=-1 the mirror image, counter-clockwise around the left poles.
    """
    c = contour.abscissa
    h = contour.half_length if contour.half_length is not None else 1.0
    far = c + direction * reach
    width, order = contour.panel_width, contour.order
    ray_panels = max(2, math.ceil(reach / width))
    seg_panels = max(2, math.ceil(2 * h / width))
    pieces = [
        _segment_rule(far - 1j * h, c - 1j * h, ray_panels, order),
        _segment_rule(c - 1j * h, c + 1j * h, seg_panels, order),
        _segment_rule(c + 1j * h, far + 1j * h, ray_panels, order),
    ]
    nodes = np.concatenate([p[0] for p in pieces])
    weights = np.concatenate([p[1] for p in pieces]) / (2j * math.pi)
    return nodes, weights


def real_part_checked(value: complex, threshold: float, what: str) -> float:
    """Drop the imaginary part of a contour integral after checking it is noise."""
    if abs(value.imag) > threshold:
        raise ContourError(f"{what}: imaginary residue {value.imag:.3g} exceeds {threshold:.1g}")
    return float(value.real)


# --------------------------------------------------------------------------
# Mellin-Barnes evaluations


def wright_m_mellin_barnes(nu: float, z, contour: ContourSpec | None = None):
    """
    M_nu(z) for z > 0 by quadrature of its Mellin-Barnes representation.

    Accepts a scalar or an array of z; the Gamma kernel is evaluated once
    and reused for every argument.
    """
    if not 0.0 < nu < 1.0:
        raise DomainError("nu", "0 < nu < 1")
    contour = contour or ContourSpec()
    if contour.abscissa <= 0:
        raise ContourError("the M_nu line needs abscissa c > 0")
    s, w = line_rule(contour, rate=(1.0 - nu) * math.pi / 2)
    kernel = w * np.exp(special.loggamma(s) - special.loggamma(nu * s + 1.0 - nu))
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(z_arr <= 0):
        raise DomainError("z", "z > 0")
    values = np.empty(z_arr.shape)
    for i0 in range(0, len(z_arr), 64):
        block = z_arr[i0:i0 + 64]
        integral = np.exp(-np.outer(np.log(block), s)) @ kernel
        scale = np.exp(-contour.abscissa * np.log(block))
        if np.any(np.abs(integral.imag) > 1e-9 * np.maximum(1.0, scale)):
            raise ContourError(f"wright_m_mellin_barnes(nu={nu}): imaginary residue too large")
        values[i0:i0 + 64] = integral.real
    return float(values[0]) if np.ndim(z) == 0 else values


def mittag_leffler_mellin_barnes(a: float, z: float, contour: ContourSpec | None = None) -> float:
    """
    E_a(z) for z < 0 and 0 < a < 2 from
    E_a(z) = 1/(2 pi i) int Gamma(t) Gamma(1-t) / Gamma(1 - a t) (-z)^-t dt, 0 < c < 1.
    """
    if not 0.0 < a < 2.0:
        raise DomainError("a", "0 < a < 2")
    if z >= 0:
        raise DomainError("z", "z < 0")
    contour = contour or ContourSpec()
    if not 0.0 < contour.abscissa < 1.0:
        raise ContourError("the Mittag-Leffler line needs 0 < c < 1")
    t, w = line_rule(contour, rate=math.pi * (1.0 - a / 2))
    log_f = (special.loggamma(t) + special.loggamma(1.0 - t)
             - special.loggamma(1.0 - a * t) - t * math.log(-z))
    return real_part_checked(np.sum(w * np.exp(log_f)), 1e-9, "mittag_leffler_mellin_barnes")


def wright_m_array(nu: float, z: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """
    wright_m over an array of z >= 0: the series where it is safe, one shared
    Mellin-Barnes quadrature for the rest.
    """
    z = np.asarray(z, dtype=float)
    out = np.empty(z.shape)
    needs_mb = np.zeros(z.shape, dtype=bool)
    for i, zi in enumerate(z.flat):
        if zi == 0:
            out.flat[i] = reciprocal_gamma(1.0 - nu)
            continue
        terms = _wright_m_terms(nu, zi, DEFAULT_TERM_CAP)
        peak = float(np.max(np.abs(terms)))
        tail = float(np.max(np.abs(terms[-2:])))
        if peak * 1e-15 > tol / 10 or tail > tol / 10:
            needs_mb.flat[i] = True
        else:
            out.flat[i] = _sum_until_small(terms, tol, f"wright_m(nu={nu}, z={zi})")
    if np.any(needs_mb):
        out[needs_mb] = wright_m_mellin_barnes(nu, z[needs_mb])
    return out
