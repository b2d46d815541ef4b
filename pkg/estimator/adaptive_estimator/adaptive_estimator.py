"""
Data-driven cutoff selection over the candidates U = k h, k = 1..K_n

k_hat(x) = argmin_k {A(k, x) + V(k)}, V(k) = ell k / n,
A(k, x) = max_{k' > k} ((p_hat_{k'}(x) - p_hat_k(x))^2 - V(k'))_+
"""

import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, project_root)

from estimator.base_estimator.base_estimator import (DEFAULT_QUAD_NODES,
                                                     estimate_density,
                                                     estimate_M)
from tools.count_law import (CountLaw, kappa_from_rho0, kappa_symmetric,
                             moments, rho_star)
from tools.ecf_tools import CharFnGrid, Sample, ecf_on_grid
from tools.errors import DecompoundError, DomainError, Unsupported
from tools.general_tools import write_json_file

ELL_HEADROOM = 1.01
DEFAULT_BETA_BAR = 2.0
DEFAULT_RHO0 = 1.0
M_GRID_STEP = 0.01


@dataclass(frozen=True)
class AdaptiveConfig:
    """Candidate grid U = k h (k = 1..K_n), penalty level ell and quadrature size."""

    h: float
    K_n: int
    ell: float
    quad_nodes: int = DEFAULT_QUAD_NODES

    def __post_init__(self):
        if not self.h > 0.0:
            raise DomainError(f"h must be positive, got {self.h}")
        if int(self.K_n) != self.K_n or self.K_n < 1:
            raise DomainError(f"K_n must be a positive integer, got {self.K_n}")
        if not self.ell > 0.0:
            raise DomainError(f"ell must be positive, got {self.ell}")

    @property
    def cutoffs(self) -> np.ndarray:
        return self.h * np.arange(1, self.K_n + 1)


@dataclass(frozen=True)
class AdaptiveSettings:
    """
    Adaptive configuration that is completed per sample

    K_n=None uses default_K_n(n, mode); ell="auto" uses 1.01 x the lower bound
    with M estimated from the sample.
    """

    h: float = 1.0
    K_n: Optional[int] = None
    ell: Union[str, float] = "auto"
    mode: str = "simulation"
    beta_bar: float = DEFAULT_BETA_BAR
    rho0: float = DEFAULT_RHO0
    quad_nodes: int = DEFAULT_QUAD_NODES

    def resolve(self, sample: Sample, law: CountLaw) -> Tuple[AdaptiveConfig, Dict[str, float]]:
        K_n = self.K_n if self.K_n is not None else default_K_n(sample.n, self.mode)
        if self.ell == "auto":
            constants = auto_ell(sample, law, self.h, K_n, beta_bar=self.beta_bar, rho0=self.rho0)
            ell = constants["ell"]
        else:
            ell = float(self.ell)
            constants = {"ell": ell}
        return AdaptiveConfig(self.h, K_n, ell, self.quad_nodes), constants


def ell_lower_bound(kappa: float, M: float, mean_N: float, h: float) -> float:
    """kappa^2 M E[N] h; the penalty level ell must exceed it."""
    for name, value in (("kappa", kappa), ("M", M), ("mean_N", mean_N), ("h", h)):
        if not value > 0.0:
            raise DomainError(f"{name} must be positive, got {value}")
    return kappa * kappa * M * mean_N * h


def default_K_n(n: int, mode: str = "simulation") -> int:
    """floor(n^{1/4}) for simulations, 2 floor(n^{1/4}) for real data."""
    if n < 2:
        raise DomainError(f"default_K_n needs n >= 2, got {n}")
    base = int(math.floor(n ** 0.25 + 1e-12))
    if mode == "simulation":
        return base
    if mode == "realdata":
        return 2 * base
    raise DomainError(f"mode must be 'simulation' or 'realdata', got {mode}")


def kappa_for_law(law: CountLaw, rho0: float = DEFAULT_RHO0) -> Dict[str, float]:
    """
    Stability constant kappa used in the penalty bound

    Uses kappa(rho0) when the law has an analyticity radius (rho0 is halved
    to rho*/2 when it does not fit below rho*), else the symmetric-xi bound.
    """
    try:
        limit = rho_star(law)
    except Unsupported:
        return {"kappa": kappa_symmetric(law), "rho0": float("nan"), "rho_star": float("nan")}
    if rho0 >= limit:
        rho0 = limit / 2.0
    return {"kappa": kappa_from_rho0(law, rho0), "rho0": rho0, "rho_star": limit}


def auto_ell(
    sample: Union[Sample, CharFnGrid],
    law: CountLaw,
    h: float,
    K_n: int,
    beta_bar: float = DEFAULT_BETA_BAR,
    rho0: float = DEFAULT_RHO0,
    grid_step: float = M_GRID_STEP,
) -> Dict[str, float]:
    """
    ell = 1.01 * kappa^2 * M_hat * E[N] * h, with M_hat searched on [0, K_n h]

    Returns:
        {"ell", "ell_min", "kappa", "M_hat", "mean_N", "rho0", "rho_star"}
    """
    cf = sample if isinstance(sample, CharFnGrid) else ecf_on_grid(sample, [0.0])
    constants = kappa_for_law(law, rho0)
    constants["M_hat"] = estimate_M(cf, beta_bar, K_n * h, grid_step)
    constants["mean_N"] = moments(law)[0]
    constants["ell_min"] = ell_lower_bound(constants["kappa"], constants["M_hat"], constants["mean_N"], h)
    constants["ell"] = ELL_HEADROOM * constants["ell_min"]
    return constants


def select_from_estimates(estimates: np.ndarray, ell: float, n: int) -> Dict[str, np.ndarray]:
    """
    Penalized comparison on precomputed estimates

    Args:
        estimates: Array (K_n, X) with p_hat_k(x) in row k-1
        ell: Penalty level
        n: Sample size

    Returns:
        {"k_hat": (X,) selected k (1-based, ties to the smallest k),
         "A": (K_n, X), "V": (K_n,)}
    """
    estimates = np.atleast_2d(np.asarray(estimates, dtype=float))
    K = estimates.shape[0]
    V = ell * np.arange(1, K + 1) / n
    A = np.zeros(estimates.shape)
    for k in range(K - 1):
        excess = (estimates[k + 1:] - estimates[k]) ** 2 - V[k + 1:, None]
        A[k] = np.max(np.maximum(excess, 0.0), axis=0)
    # argmin returns the first minimum, i.e. the smallest k
    k_hat = np.argmin(A + V[:, None], axis=0) + 1
    return {"k_hat": k_hat, "A": A, "V": V}


@dataclass
class AdaptiveResult:
    """Per-x selection with the per-k estimates it was made from."""

    x_grid: np.ndarray
    k_hat: np.ndarray
    values: np.ndarray
    cutoffs: np.ndarray
    estimates: np.ndarray
    A: np.ndarray
    V: np.ndarray
    config: AdaptiveConfig
    constants: Dict[str, float] = field(default_factory=dict)
    branch_violations: int = 0

    def trace(self, x_index: int = 0) -> List[Dict[str, Any]]:
        chosen = int(self.k_hat[x_index])
        return [
            {
                "k": k,
                "U": float(self.cutoffs[k - 1]),
                "A": float(self.A[k - 1, x_index]),
                "V": float(self.V[k - 1]),
                "estimate": float(self.estimates[k - 1, x_index]),
                "chosen": k == chosen,
            }
            for k in range(1, len(self.cutoffs) + 1)
        ]

    def trace_json(self, path, x_index: int = 0) -> str:
        payload = {"x": float(self.x_grid[x_index]), "ell": self.config.ell, "trace": self.trace(x_index)}
        return write_json_file(path, payload)


def _estimate_for_k(cf: CharFnGrid, law: CountLaw, U: float, x_grid: np.ndarray, quad_nodes: int, k: int):
    try:
        return estimate_density(cf, law, U, x_grid, quad_nodes)
    except DecompoundError as e:
        context = dict(e.context)
        context["k"] = k
        raise type(e)(f"k={k}: {e}", **context) from e


def select_cutoff_grid(
    sample: Union[Sample, CharFnGrid],
    law: CountLaw,
    config: AdaptiveConfig,
    x_grid,
    n: Optional[int] = None,
    threads: int = 1,
) -> AdaptiveResult:
    """
    Adaptive selection on a whole x-grid, reusing each per-k estimate across x

    Args:
        sample: Sample of X (or its characteristic function, then n is required)
        law: Known count law
        config: Candidate grid and penalty
        x_grid: Evaluation points
        n: Sample size when a CharFnGrid is passed
        threads: Worker threads for the per-k estimates

    Raises:
        Estimator errors, annotated with the offending k
    """
    if isinstance(sample, CharFnGrid):
        cf = sample
        n = n if n is not None else cf.n
        if n is None:
            raise DomainError("sample size n is required with a characteristic-function input")
    else:
        cf = ecf_on_grid(sample, [0.0])
        n = sample.n
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    cutoffs = config.cutoffs

    def task(k: int):
        return _estimate_for_k(cf, law, float(cutoffs[k - 1]), x_grid, config.quad_nodes, k)

    ks = list(range(1, config.K_n + 1))
    if threads > 1 and len(ks) > 1:
        with ThreadPoolExecutor(max_workers=min(threads, len(ks))) as pool:
            results = list(pool.map(task, ks))
    else:
        results = [task(k) for k in ks]

    estimates = np.vstack([r.values for r in results])
    selection = select_from_estimates(estimates, config.ell, n)
    values = estimates[selection["k_hat"] - 1, np.arange(x_grid.size)]
    return AdaptiveResult(
        x_grid=x_grid,
        k_hat=selection["k_hat"],
        values=values,
        cutoffs=cutoffs,
        estimates=estimates,
        A=selection["A"],
        V=selection["V"],
        config=config,
        branch_violations=int(sum(r.diagnostics["branch_violations"] for r in results)),
    )


def select_cutoff(
    sample: Sample, law: CountLaw, config: AdaptiveConfig, x: float
) -> Tuple[int, float, List[Dict[str, Any]]]:
    """
    Adaptive cutoff at a single point x

    Returns:
        (k_hat, estimate at x, trace of {k, U, A, V, estimate, chosen})
    """
    result = select_cutoff_grid(sample, law, config, [float(x)])
    return int(result.k_hat[0]), float(result.values[0]), result.trace(0)
