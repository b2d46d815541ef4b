"""
Adaptive cutoff selection module
"""

from .adaptive_estimator import (AdaptiveConfig, AdaptiveResult,
                                 AdaptiveSettings, auto_ell, default_K_n,
                                 ell_lower_bound, select_cutoff,
                                 select_cutoff_grid, select_from_estimates)

__all__ = [
    "AdaptiveConfig",
    "AdaptiveResult",
    "AdaptiveSettings",
    "auto_ell",
    "default_K_n",
    "ell_lower_bound",
    "select_cutoff",
    "select_cutoff_grid",
    "select_from_estimates",
]
