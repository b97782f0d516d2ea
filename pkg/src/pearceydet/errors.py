"""Exception types shared across the package."""


class NumericsError(Exception):
    """Base class for numerical failures that carry a diagnostic payload."""


class DomainError(NumericsError, ValueError):
    """Argument outside the range for which the routine is validated."""


class PoleError(NumericsError, ZeroDivisionError):
    """Evaluation at (or numerically on top of) a pole."""


class ConvergenceError(NumericsError):
    """A series, quadrature tail, or iteration failed to converge."""


class SignError(NumericsError):
    """A determinant that must be positive came out non-positive."""


class RealnessError(NumericsError):
    """A quantity that must be real carries a non-negligible imaginary part."""
