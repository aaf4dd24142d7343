"""
Exception hierarchy for the fractional diffusion pricing library.

Every numerical routine raises one of these; the command-line driver maps
them onto exit codes (see fspd.py).
"""


class FspdError(Exception):
    """Base class for all library errors."""


class DomainError(FspdError, ValueError):
    """
    A parameter lies outside the domain where an operation is defined.

    Attributes:
        field: Name of the offending parameter (e.g. 'gamma').
        constraint: Human readable statement of the violated inequality.
    """

    def __init__(self, field: str, constraint: str, message: str | None = None):
        self.field = field
        self.constraint = constraint
        super().__init__(message or f"{field} out of domain: requires {constraint}")


# Alias; catches the same errors.
OutOfDomain = DomainError


class SeriesDivergenceError(DomainError):
    """gamma <= 1 - 1/alpha: the mu and price series no longer converge."""


class AsymmetryError(DomainError):
    """theta != alpha - 2: pricing is only defined under maximal negative asymmetry."""


class PoleError(DomainError):
    """Argument sits on a pole of the Gamma function."""


class NoConvergence(FspdError, ArithmeticError):
    """A series or adaptive quadrature did not reach its tolerance within the cap."""


class NonPositiveSum(FspdError, ArithmeticError):
    """The truncated inner sum of the mu series is <= 0, so its log is undefined."""


class ContourError(FspdError, ArithmeticError):
    """A contour integral left an imaginary residue above its threshold."""


class NegativePrice(FspdError, ArithmeticError):
    """The converged price is below -tol."""
