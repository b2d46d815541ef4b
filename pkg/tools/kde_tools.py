"""
Gaussian kernel density estimates used to compare observed and simulated samples
"""

from typing import Union

import numpy as np
from scipy import stats

from estimator.base_estimator.base_estimator import DensityEstimate
from tools.ecf_tools import Sample
from tools.errors import DegenerateSample, DomainError

# Upper bound on the size of one kernel block
KDE_CHUNK_ELEMENTS = 1 << 21


def silverman_bandwidth(observations: np.ndarray) -> float:
    """0.9 * min(sd, IQR/1.34) * n^{-1/5}; the IQR term is skipped when it is zero."""
    obs = np.asarray(observations, dtype=float)
    if obs.size < 2:
        raise DomainError("Silverman bandwidth needs at least two observations")
    sd = float(np.std(obs, ddof=1))
    if sd == 0.0:
        raise DegenerateSample("sample has zero standard deviation")
    iqr = float(stats.iqr(obs))
    spread = min(sd, iqr / 1.34) if iqr > 0.0 else sd
    return 0.9 * spread * obs.size ** (-0.2)


def kde(sample: Union[Sample, np.ndarray], bandwidth: Union[str, float], x_grid) -> DensityEstimate:
    """
    Gaussian-kernel density estimate

    Args:
        sample: Observations
        bandwidth: "silverman" or a positive fixed bandwidth
        x_grid: Evaluation points

    Returns:
        DensityEstimate (cutoff_used is None, bandwidth in diagnostics)
    """
    obs = sample.observations if isinstance(sample, Sample) else np.asarray(sample, dtype=float).ravel()
    if isinstance(bandwidth, str):
        if bandwidth.lower() != "silverman":
            raise DomainError(f"unknown bandwidth rule: {bandwidth}")
        h = silverman_bandwidth(obs)
    else:
        h = float(bandwidth)
        if not h > 0.0:
            raise DomainError(f"bandwidth must be positive, got {bandwidth}")

    x_grid = np.asarray(x_grid, dtype=float)
    flat = x_grid.ravel()
    values = np.empty(flat.shape)
    rows = max(1, KDE_CHUNK_ELEMENTS // obs.size)
    for start in range(0, flat.size, rows):
        z = (flat[start:start + rows, None] - obs[None, :]) / h
        values[start:start + rows] = np.exp(-0.5 * z * z).sum(axis=1)
    values = values.reshape(x_grid.shape) / (obs.size * h * np.sqrt(2.0 * np.pi))
    return DensityEstimate(x_grid, values, None, 0, {"bandwidth": h, "n": int(obs.size)})
