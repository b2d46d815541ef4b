"""
Density estimators for compound sums
"""

from .base_estimator import (CutoffRule, DensityEstimate, cutoff,
                             cutoff_deterministic, estimate_density,
                             estimate_M, quadrature_grid,
                             side_condition)
from .deterministic_estimator import estimate_density_deterministic

__all__ = [
    "CutoffRule",
    "DensityEstimate",
    "cutoff",
    "cutoff_deterministic",
    "estimate_density",
    "estimate_density_deterministic",
    "estimate_M",
    "quadrature_grid",
    "side_condition",
]
