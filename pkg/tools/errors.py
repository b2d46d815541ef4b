"""
Error types raised by the decompounding library.

Every error derives from DecompoundError, which is a ValueError, so callers
that only catch ValueError keep working.
"""

from typing import Any, Optional


class DecompoundError(ValueError):
    """Base class for all library errors"""

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.context = context
        for key, value in context.items():
            setattr(self, key, value)


class ConfigError(DecompoundError):
    """Invalid or unknown configuration values"""


# Count-law calculus
class DomainError(DecompoundError):
    """Argument outside the region where a formula is defined"""


class BranchViolation(DecompoundError):
    """A log/sqrt argument lies on its principal-branch cut"""


class Unsupported(DecompoundError):
    """Operation not available for this count-law family"""


class NewtonDivergence(DecompoundError):
    """Newton continuation did not reach the residual tolerance"""


class DerivativeVanished(DecompoundError):
    """Laplace-transform derivative vanished at a Newton iterate"""


# Characteristic functions
class EmptySample(DecompoundError):
    """Sample without observations"""


class ZeroCharacteristicFunction(DecompoundError):
    """Characteristic function (numerically) zero at a grid node"""


class UnderResolvedGrid(DecompoundError):
    """Phase step between consecutive nodes too large to unwrap"""


# Estimators
class BranchViolationMajority(DecompoundError):
    """Too many frequencies had to be clipped"""


class InsufficientGrid(DecompoundError):
    """Characteristic-function grid does not cover the cutoff range"""


class ModulusFloorViolation(DecompoundError):
    """Empirical characteristic function fell below the modulus floor"""


# Simulation / reporting
class GridMismatch(DecompoundError):
    """Estimate and evaluation grid do not match"""


class InsufficientPoints(DecompoundError):
    """Not enough points for a regression"""


class DegenerateSample(DecompoundError):
    """Sample with zero spread"""


# Claims ingestion
class SchemaError(DecompoundError):
    """CSV file does not follow the expected schema"""


class JoinMismatch(DecompoundError):
    """Claim count disagrees with the number of severity rows"""


class NonpositiveAmount(DecompoundError):
    """Claim amount that is zero or negative"""


class UnsupportedCount(DecompoundError):
    """Claim count outside the support of the fitted law"""


def describe_error(error: Exception, index: Optional[int] = None) -> str:
    """Short human readable description used in reports and stderr output"""
    name = type(error).__name__
    if index is not None:
        return f"{name} at index {index}: {error}"
    return f"{name}: {error}"
