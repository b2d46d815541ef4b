"""
Empirical and exact characteristic functions on symmetric frequency grids
"""

import os
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional, Sequence, Union

import numpy as np
import pandas as pd

from tools.count_law import CountLaw, pgf
from tools.errors import (DomainError, EmptySample, InsufficientGrid,
                          UnderResolvedGrid, ZeroCharacteristicFunction)

ZERO_CF_FLOOR = 1e-13
MAX_PHASE_STEP = np.pi / 2
NODE_MATCH_TOL = 1e-12
# Upper bound on the size of one exp(i u x) block
CHUNK_ELEMENTS = 1 << 21


@dataclass(frozen=True)
class Sample:
    """Observations of X with a provenance tag (seed or ingestion source)."""

    observations: np.ndarray
    provenance: str = "unknown"

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=float).ravel()
        if obs.size == 0:
            raise EmptySample("sample has no observations")
        if not np.all(np.isfinite(obs)):
            raise DomainError("sample contains non-finite values", index=int(np.flatnonzero(~np.isfinite(obs))[0]))
        obs.setflags(write=False)
        object.__setattr__(self, "observations", obs)

    @property
    def n(self) -> int:
        return int(self.observations.size)

    def scaled(self, c: float) -> "Sample":
        return Sample(self.observations * c, provenance=f"{self.provenance}*{c:g}")

    @classmethod
    def from_csv(cls, path: Union[str, os.PathLike]) -> "Sample":
        """Read one float per line (UTF-8, no header)."""
        try:
            frame = pd.read_csv(path, header=None, comment="#", encoding="utf-8", float_precision="round_trip")
        except pd.errors.EmptyDataError:
            raise EmptySample(f"sample file is empty: {path}") from None
        if frame.shape[1] != 1:
            raise DomainError(f"sample file must hold one value per line: {path}")
        values = pd.to_numeric(frame.iloc[:, 0], errors="coerce")
        if values.isna().any():
            bad = int(np.flatnonzero(values.isna().to_numpy())[0])
            raise DomainError(f"non-numeric value on line {bad + 1} of {path}", index=bad)
        return cls(values.to_numpy(dtype=float), provenance=f"file:{os.path.basename(str(path))}")

    def to_csv(self, path: Union[str, os.PathLike]) -> str:
        pd.Series(self.observations).to_csv(path, header=False, index=False)
        return str(path)


@dataclass(frozen=True)
class CharFnGrid:
    """
    Characteristic function on a symmetric grid, stored on u >= 0 only

    Negative frequencies are materialized by conjugation. When an evaluator
    is attached (the sample's ecf or an exact formula) values at other
    nonnegative frequencies are computed exactly instead of interpolated.
    """

    u_half: np.ndarray
    half_values: np.ndarray
    source: str
    n: Optional[int] = None
    law_id: Optional[str] = None
    evaluator: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False, compare=False)

    @property
    def u_values(self) -> np.ndarray:
        return np.concatenate([-self.u_half[:0:-1], self.u_half])

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([np.conj(self.half_values[:0:-1]), self.half_values])

    @property
    def u_max(self) -> float:
        return float(self.u_half[-1])

    def at(self, u: Union[float, Sequence[float], np.ndarray]) -> np.ndarray:
        """
        Values at arbitrary frequencies (negative ones by conjugation)

        Raises:
            InsufficientGrid: Without an evaluator, if a frequency is not a stored node
        """
        u = np.atleast_1d(np.asarray(u, dtype=float))
        magnitude = np.abs(u)
        if self.evaluator is not None:
            order = np.argsort(magnitude, kind="stable")
            values = np.empty(u.shape, dtype=complex)
            values[order] = self.evaluator(magnitude[order])
        else:
            idx = np.clip(np.searchsorted(self.u_half, magnitude), 0, self.u_half.size - 1)
            lower = np.clip(idx - 1, 0, self.u_half.size - 1)
            pick = np.where(
                np.abs(self.u_half[lower] - magnitude) < np.abs(self.u_half[idx] - magnitude), lower, idx
            )
            miss = np.abs(self.u_half[pick] - magnitude) > NODE_MATCH_TOL * np.maximum(1.0, magnitude)
            if np.any(miss):
                j = int(np.flatnonzero(miss)[0])
                raise InsufficientGrid(
                    f"frequency {u[j]:.6g} is not a grid node (grid covers [0, {self.u_max:.6g}])",
                    frequency=float(u[j]),
                )
            values = self.half_values[pick].copy()
        values[magnitude == 0.0] = 1.0
        return np.where(u < 0.0, np.conj(values), values)


def symmetric_grid(u_max: float, nodes: int) -> np.ndarray:
    """2*nodes+1 equispaced frequencies on [-u_max, u_max]."""
    if not u_max > 0.0 or nodes < 1:
        raise DomainError(f"need u_max > 0 and nodes >= 1, got {u_max}, {nodes}")
    return u_max * np.arange(-nodes, nodes + 1) / nodes


def _half_grid(u_grid: Union[Sequence[float], np.ndarray]) -> np.ndarray:
    u = np.sort(np.asarray(u_grid, dtype=float).ravel())
    if u.size == 0 or not np.any(u == 0.0):
        raise DomainError("frequency grid must contain 0")
    if not np.allclose(u, -u[::-1], rtol=0.0, atol=NODE_MATCH_TOL * max(1.0, float(np.max(np.abs(u))))):
        raise DomainError("frequency grid must be symmetric about 0")
    return np.unique(u[u >= 0.0])


def _empirical_values(observations: np.ndarray, u: np.ndarray) -> np.ndarray:
    """n^{-1} sum_k exp(i u x_k), blocked so no block exceeds CHUNK_ELEMENTS entries."""
    u = np.asarray(u, dtype=float)
    out = np.empty(u.shape, dtype=complex)
    rows = max(1, CHUNK_ELEMENTS // observations.size)
    for start in range(0, u.size, rows):
        block = np.outer(u[start:start + rows], observations)
        out[start:start + rows] = np.cos(block).mean(axis=1) + 1j * np.sin(block).mean(axis=1)
    out[u == 0.0] = 1.0
    return out


def ecf_on_grid(sample: Union[Sample, Sequence[float], np.ndarray], u_grid) -> CharFnGrid:
    """
    Empirical characteristic function phi_hat(u) = n^{-1} sum_k exp(i u X_k)

    Args:
        sample: Sample (or raw observations)
        u_grid: Frequencies, symmetric about 0 and containing 0

    Returns:
        CharFnGrid of source "empirical" with the sample attached as evaluator

    Raises:
        EmptySample: If the sample has no observations
    """
    if not isinstance(sample, Sample):
        sample = Sample(sample)
    u_half = _half_grid(u_grid)
    evaluator = partial(_empirical_values, sample.observations)
    return CharFnGrid(u_half, evaluator(u_half), "empirical", n=sample.n, evaluator=evaluator)


def unwrap_phase(values: np.ndarray, u: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Continuous phase of a CF sampled on ascending frequencies starting at 0

    Consecutive arg increments are accumulated from the first node.

    Raises:
        UnderResolvedGrid: If an increment exceeds pi/2 in absolute value
    """
    values = np.asarray(values, dtype=complex)
    if values.size == 0:
        return np.zeros(0)
    steps = np.angle(values[1:] / values[:-1])
    too_big = np.flatnonzero(np.abs(steps) > MAX_PHASE_STEP)
    if too_big.size:
        j = int(too_big[0]) + 1
        raise UnderResolvedGrid(
            f"phase step {steps[j - 1]:.3f} rad exceeds pi/2 at node {j}; refine the frequency grid",
            index=j,
            frequency=None if u is None else float(u[j]),
        )
    phase = np.empty(values.shape)
    phase[0] = np.angle(values[0])
    phase[1:] = phase[0] + np.cumsum(steps)
    return phase


def continuous_log(values: np.ndarray, u: Optional[np.ndarray] = None, floor: float = ZERO_CF_FLOOR) -> np.ndarray:
    """
    log of a CF on the branch that is continuous from u=0

    Raises:
        ZeroCharacteristicFunction: If |value| < floor at some node
    """
    values = np.asarray(values, dtype=complex)
    small = np.flatnonzero(np.abs(values) < floor)
    if small.size:
        j = int(small[0])
        raise ZeroCharacteristicFunction(
            f"|phi| < {floor:g} at node {j}",
            index=j,
            frequency=None if u is None else float(u[j]),
        )
    return np.log(np.abs(values)) + 1j * unwrap_phase(values, u)


def _compound_values(law: CountLaw, innovation_cf: Callable[[np.ndarray], np.ndarray], u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    phi = np.array(innovation_cf(u), dtype=complex)
    phi[u == 0.0] = 1.0
    values = np.asarray(pgf(law, phi), dtype=complex)
    values[u == 0.0] = 1.0
    return values


def exact_cf_compound(law: CountLaw, innovation_cf: Callable[[np.ndarray], np.ndarray], u_grid) -> CharFnGrid:
    """
    Exact CF of the compound sum, phi_X(u) = G_N(phi_xi(u)) = L_N(-log phi_xi(u))

    Evaluated through the generating function, so tiny |phi_xi| (normal tails)
    is fine.
    """
    u_half = _half_grid(u_grid)
    evaluator = partial(_compound_values, law, innovation_cf)
    return CharFnGrid(u_half, evaluator(u_half), "exact", law_id=law.label, evaluator=evaluator)
