"""
Density estimator for the summand of a compound sum with known count law
Regularized inverse: p_hat(x) = (1/2pi) int_{-U}^{U} exp(-iux) H(phi_hat_X(u)) du,
with H(z) = exp(-L_N^{-1}(z)), evaluated by the composite trapezoid rule.
"""

import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd

project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, project_root)

from tools.count_law import (CountLaw, h_closed_form, has_closed_form_inverse,
                             laplace_inverse_continued)
from tools.ecf_tools import CharFnGrid
from tools.errors import (BranchViolationMajority, ConfigError,
                          DerivativeVanished, DomainError, InsufficientGrid,
                          NewtonDivergence)
from tools.general_tools import write_json_file

DEFAULT_QUAD_NODES = 4096
MAX_CLIPPED_FRACTION = 0.2
# Upper bound on the size of one exp(-iux) block
X_CHUNK_ELEMENTS = 1 << 21


@dataclass(frozen=True)
class CutoffRule:
    """
    Spectral cutoff schedule U_n

    kind "fixed" uses U; "polynomial" gives c * n^{1/(1+2 beta)};
    "supersmooth" gives (log n / (2 c_gamma))^{1/gamma};
    "deterministic" gives n^{1/(beta + 2m(beta+1))}.
    """

    kind: str
    U: Optional[float] = None
    beta: Optional[float] = None
    c: float = 1.0
    gamma: Optional[float] = None
    c_gamma: Optional[float] = None
    m: Optional[int] = None

    def __post_init__(self):
        required = {
            "fixed": ("U",),
            "polynomial": ("beta", "c"),
            "supersmooth": ("gamma", "c_gamma"),
            "deterministic": ("beta", "m"),
        }
        if self.kind not in required:
            raise ConfigError(f"Unknown cutoff rule: {self.kind}")
        for name in required[self.kind]:
            value = getattr(self, name)
            if value is None or not value > 0:
                raise DomainError(f"cutoff rule '{self.kind}' needs {name} > 0, got {value}")

    @classmethod
    def fixed(cls, U: float) -> "CutoffRule":
        return cls("fixed", U=float(U))

    @classmethod
    def polynomial(cls, beta: float, c: float = 1.0) -> "CutoffRule":
        return cls("polynomial", beta=float(beta), c=float(c))

    @classmethod
    def supersmooth(cls, gamma: float, c_gamma: float) -> "CutoffRule":
        return cls("supersmooth", gamma=float(gamma), c_gamma=float(c_gamma))

    @classmethod
    def deterministic(cls, beta: float, m: int) -> "CutoffRule":
        return cls("deterministic", beta=float(beta), m=int(m))

    def to_config(self) -> Dict[str, Any]:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def cutoff(rule: CutoffRule, n: int) -> float:
    """
    Cutoff U_n for sample size n

    Args:
        rule: Cutoff schedule
        n: Sample size (>= 2)

    Returns:
        Positive cutoff
    """
    if n < 2:
        raise DomainError(f"cutoff needs n >= 2, got {n}")
    if rule.kind == "fixed":
        return rule.U
    if rule.kind == "polynomial":
        return rule.c * n ** (1.0 / (1.0 + 2.0 * rule.beta))
    if rule.kind == "supersmooth":
        return (math.log(n) / (2.0 * rule.c_gamma)) ** (1.0 / rule.gamma)
    return cutoff_deterministic(rule.beta, rule.m, n)


def cutoff_deterministic(beta: float, m: int, n: int) -> float:
    """U_n = n^{1/(beta + 2m(beta+1))} for the fixed-m estimator."""
    return n ** (1.0 / (beta + 2.0 * m * (beta + 1.0)))


def side_condition(U: float, beta: float, m: int, n: int) -> float:
    """U^{(beta+1)m} n^{-1/2}; should be small for the fixed-m error bound to apply."""
    return U ** ((beta + 1.0) * m) / math.sqrt(n)


@dataclass
class DensityEstimate:
    """Density values on an x-grid with the cutoff and quadrature diagnostics."""

    x_grid: np.ndarray
    values: np.ndarray
    cutoff_used: Optional[float]
    quadrature_nodes: int
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.x_grid, "density": self.values})

    def to_csv(self, path: Union[str, os.PathLike]) -> str:
        self.to_frame().to_csv(path, index=False)
        return str(path)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "x": self.x_grid.tolist(),
            "density": self.values.tolist(),
            "cutoff_used": self.cutoff_used,
            "quadrature_nodes": self.quadrature_nodes,
            "diagnostics": self.diagnostics,
        }

    def to_json(self, path: Union[str, os.PathLike]) -> str:
        return write_json_file(path, self.to_dict())

    def __str__(self) -> str:
        return json.dumps({k: v for k, v in self.to_dict().items() if k not in ("x", "density")})


def quadrature_grid(U: float, quad_nodes: int) -> np.ndarray:
    """Nonnegative half u_j = U j / Q, j = 0..Q, of the 2Q+1 trapezoid nodes."""
    if not U > 0.0:
        raise DomainError(f"cutoff U must be positive, got {U}")
    if quad_nodes < 1:
        raise DomainError(f"quad_nodes must be >= 1, got {quad_nodes}")
    return U * np.arange(quad_nodes + 1) / quad_nodes


def cf_on_nodes(cf: CharFnGrid, u_half: np.ndarray) -> np.ndarray:
    """
    CF values at the quadrature nodes, computed exactly when possible

    Raises:
        InsufficientGrid: If cf neither covers [0, U] nor can be evaluated there
    """
    if cf.evaluator is None and cf.u_max < u_half[-1] * (1.0 - 1e-12):
        raise InsufficientGrid(
            f"characteristic function grid ends at {cf.u_max:.6g} < U={u_half[-1]:.6g}",
            frequency=float(u_half[-1]),
        )
    return cf.at(u_half)


def fourier_invert(u_half: np.ndarray, g_half: np.ndarray, x_grid: np.ndarray) -> Dict[str, np.ndarray]:
    """
    (1/2pi) sum_j w_j exp(-i u_j x) g(u_j) over the symmetric trapezoid grid

    g on negative frequencies is conj(g) on positive ones. The full grid is
    summed in ascending frequency order.

    Returns:
        {"real": real parts, "imag": imaginary residues}
    """
    x_grid = np.asarray(x_grid, dtype=float)
    step = u_half[1] - u_half[0] if u_half.size > 1 else 0.0
    u_full = np.concatenate([-u_half[:0:-1], u_half])
    g_full = np.concatenate([np.conj(g_half[:0:-1]), g_half])
    weights = np.full(u_full.shape, step)
    weights[0] = weights[-1] = step / 2.0
    weighted = weights * g_full

    out = np.empty(x_grid.shape, dtype=complex)
    rows = max(1, X_CHUNK_ELEMENTS // u_full.size)
    flat_x = x_grid.ravel()
    flat_out = out.ravel()
    for start in range(0, flat_x.size, rows):
        phases = np.exp(-1j * np.outer(flat_x[start:start + rows], u_full))
        flat_out[start:start + rows] = phases @ weighted
    out = flat_out.reshape(x_grid.shape) / (2.0 * np.pi)
    return {"real": out.real, "imag": out.imag}


def invert_law_on_nodes(law: CountLaw, phi: np.ndarray) -> Dict[str, Any]:
    """
    H(phi) = exp(-L_N^{-1}(phi)) at the quadrature nodes, zero where clipped

    Closed forms are used where available; other tabulated laws are solved by
    Newton continuation along the nodes, and everything from the first failed
    node onward is clipped.

    Returns:
        {"values": H values, "clipped": boolean mask}
    """
    if has_closed_form_inverse(law):
        H, _, _, clipped = h_closed_form(law, phi)
        clipped = clipped | ~np.isfinite(H)
        return {"values": np.where(clipped, 0.0, H), "clipped": clipped}

    clipped = np.zeros(phi.shape, dtype=bool)
    try:
        w = laplace_inverse_continued(law, phi)
    except (NewtonDivergence, DerivativeVanished) as e:
        clipped[e.index:] = True
        w = np.zeros(phi.shape, dtype=complex)
        if e.index > 1:
            w[: e.index] = laplace_inverse_continued(law, phi[: e.index])
    values = np.where(clipped, 0.0, np.exp(-w))
    return {"values": values, "clipped": clipped}


def estimate_density(
    cf: CharFnGrid,
    law: CountLaw,
    U: float,
    x_grid,
    quad_nodes: int = DEFAULT_QUAD_NODES,
) -> DensityEstimate:
    """
    Estimate the density of xi on x_grid

    Args:
        cf: Characteristic function of X (empirical or exact)
        law: Known count law
        U: Spectral cutoff
        x_grid: Evaluation points
        quad_nodes: Trapezoid nodes per half-axis

    Returns:
        DensityEstimate with max_imag_residue and branch_violations diagnostics

    Raises:
        InsufficientGrid: If cf does not cover [-U, U]
        BranchViolationMajority: If more than 20% of frequencies had to be clipped
    """
    u_half = quadrature_grid(U, quad_nodes)
    phi = cf_on_nodes(cf, u_half)
    inverted = invert_law_on_nodes(law, phi)

    clipped = inverted["clipped"]
    clipped[0] = False
    violations = 2 * int(np.count_nonzero(clipped))
    total = 2 * quad_nodes + 1
    if violations > MAX_CLIPPED_FRACTION * total:
        first = int(np.flatnonzero(clipped)[0])
        raise BranchViolationMajority(
            f"{violations} of {total} frequencies clipped for {law.label} at U={U:.6g}",
            clipped=violations,
            total=total,
            frequency=float(u_half[first]),
        )

    x_grid = np.asarray(x_grid, dtype=float)
    result = fourier_invert(u_half, inverted["values"], x_grid)
    diagnostics = {
        "max_imag_residue": float(np.max(np.abs(result["imag"]))) if result["imag"].size else 0.0,
        "branch_violations": violations,
        "law": law.label,
        "source": cf.source,
    }
    if violations:
        diagnostics["first_clipped_frequency"] = float(u_half[np.flatnonzero(clipped)[0]])
    return DensityEstimate(x_grid, result["real"], float(U), int(quad_nodes), diagnostics)


def estimate_M(cf: CharFnGrid, beta_bar: float, u_max: float, grid_step: float) -> float:
    """
    M_hat = max over u in {0, step, 2 step, ..., <= u_max} of (1+u)^{1+beta_bar} |phi_hat(u)|

    Args:
        cf: Characteristic function of X
        beta_bar: Upper smoothness bound (> 0)
        u_max: Right end of the search grid (>= 0)
        grid_step: Grid step (> 0)
    """
    if not beta_bar > 0.0 or not grid_step > 0.0 or u_max < 0.0:
        raise DomainError("estimate_M needs beta_bar > 0, grid_step > 0 and u_max >= 0")
    count = int(math.floor(u_max / grid_step + 1e-9)) + 1
    u = grid_step * np.arange(count)
    values = np.abs(cf.at(u))
    return float(np.max((1.0 + u) ** (1.0 + beta_bar) * values))
