"""
Fixed-m estimator: X = xi_1 + ... + xi_m with m known, phi_xi = phi_X^{1/m}
"""

import os
import sys

import numpy as np

project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, project_root)

from estimator.base_estimator.base_estimator import (DEFAULT_QUAD_NODES,
                                                     DensityEstimate,
                                                     cf_on_nodes,
                                                     fourier_invert,
                                                     quadrature_grid)
from tools.ecf_tools import CharFnGrid, continuous_log
from tools.errors import DomainError, ModulusFloorViolation

DEFAULT_MODULUS_FLOOR = 1e-8


def estimate_density_deterministic(
    cf: CharFnGrid,
    m: int,
    U: float,
    x_grid,
    quad_nodes: int = DEFAULT_QUAD_NODES,
    modulus_floor: float = DEFAULT_MODULUS_FLOOR,
) -> DensityEstimate:
    """
    Estimate the density of xi from a sum of exactly m summands

    The m-th root is exp(log(phi_hat)/m) with the log continued from u=0,
    where phi_hat equals 1.

    Args:
        cf: Characteristic function of X
        m: Number of summands (>= 1)
        U: Spectral cutoff
        x_grid: Evaluation points
        quad_nodes: Trapezoid nodes per half-axis
        modulus_floor: Smallest |phi_hat| accepted on [0, U]

    Returns:
        DensityEstimate

    Raises:
        ModulusFloorViolation: At the first frequency with |phi_hat| < modulus_floor
        UnderResolvedGrid: If the phase cannot be unwrapped on the quadrature nodes
    """
    if int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m}")
    if not modulus_floor > 0.0:
        raise DomainError(f"modulus_floor must be positive, got {modulus_floor}")

    u_half = quadrature_grid(U, quad_nodes)
    phi = cf_on_nodes(cf, u_half)
    low = np.flatnonzero(np.abs(phi) < modulus_floor)
    if low.size:
        j = int(low[0])
        raise ModulusFloorViolation(
            f"|phi_hat({u_half[j]:.6g})| = {abs(phi[j]):.3g} < {modulus_floor:g}",
            index=j,
            frequency=float(u_half[j]),
        )

    root = phi if m == 1 else np.exp(continuous_log(phi, u_half, floor=modulus_floor) / m)
    x_grid = np.asarray(x_grid, dtype=float)
    result = fourier_invert(u_half, root, x_grid)
    diagnostics = {
        "max_imag_residue": float(np.max(np.abs(result["imag"]))) if result["imag"].size else 0.0,
        "branch_violations": 0,
        "m": int(m),
        "source": cf.source,
    }
    return DensityEstimate(x_grid, result["real"], float(U), int(quad_nodes), diagnostics)
