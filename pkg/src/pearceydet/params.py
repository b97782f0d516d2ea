"""Scalar problem parameters (gamma, rho) and the derived thinning exponent beta."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


def beta_of_gamma(gamma: float) -> complex:
    """beta = (1/2 pi i) ln(1 - gamma), purely imaginary with Im beta >= 0.

    Defined for 0 <= gamma < 1; gamma = 1 diverges logarithmically and
    gamma outside [0, 1) is rejected.
    """
    if not 0.0 <= gamma < 1.0:
        raise DomainError(f"beta_of_gamma requires 0 <= gamma < 1, got {gamma}")
    return 1j * (-math.log1p(-gamma)) / (2.0 * math.pi)


@dataclass(frozen=True)
class ModelParams:
    """Thinning parameter gamma in [0, 1] and kernel parameter rho."""

    gamma: float
    rho: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise DomainError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not math.isfinite(self.rho):
            raise DomainError(f"rho must be finite, got {self.rho}")

    @property
    def beta(self) -> complex:
        """Purely imaginary thinning exponent; undefined at gamma = 1."""
        if self.gamma == 1.0:
            raise DomainError("beta is undefined at gamma = 1")
        return beta_of_gamma(self.gamma)
