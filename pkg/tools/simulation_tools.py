"""
Monte Carlo experiments and the real-data cutoff search

Every replication draws from its own substreams SeedSequence([seed, rep, role]),
so results do not depend on the thread count or on which n values are run.
"""

import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from estimator.adaptive_estimator.adaptive_estimator import (
    AdaptiveSettings, select_cutoff_grid)
from estimator.base_estimator.base_estimator import (DEFAULT_QUAD_NODES,
                                                     CutoffRule,
                                                     DensityEstimate, cutoff,
                                                     estimate_density)
from tools.claims_tools import ClaimsDataset
from tools.count_law import CountLaw, sample_counts
from tools.ecf_tools import Sample, ecf_on_grid
from tools.errors import DecompoundError, DomainError, GridMismatch, describe_error
from tools.general_tools import write_json_file
from tools.innovation_law import InnovationLaw
from tools.kde_tools import kde
from tools.result_tools import rate_slope, summarize_errors

ROLE_TAGS = {"counts": 0, "innovations": 1}

SIMULATION_GRID = (-4.0, 4.0, 1000)
REALDATA_ERROR_GRID = (-0.296, 11.2, 1000)
XI_GRID_POINTS = 2001
XI_GRID_MARGIN = 0.25


def substream(seed: int, rep: int, role: str) -> np.random.Generator:
    """Generator for (seed, replication, role); roles: counts, innovations."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(rep), ROLE_TAGS[role]]))


def equispaced_grid(bounds: Sequence[float]) -> np.ndarray:
    """(start, stop, J) -> J equispaced points."""
    start, stop, count = bounds
    return np.linspace(float(start), float(stop), int(count))


def sample_compound(law: CountLaw, innovation: InnovationLaw, n: int, seed: int, rep: int = 0) -> Sample:
    """
    n i.i.d. draws of X = xi_1 + ... + xi_N

    Counts and innovations come from independent substreams, so the first
    draws of a larger sample repeat a smaller one with the same seed.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    counts = sample_counts(law, substream(seed, rep, "counts"), n)
    xi = innovation.sample(substream(seed, rep, "innovations"), int(counts.sum()))
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    return Sample(np.add.reduceat(xi, starts), provenance=f"simulated:seed={seed},rep={rep}")


def error_on_grid(estimate: DensityEstimate, truth: Callable[[np.ndarray], np.ndarray], grid=None) -> float:
    """
    (1/J) sum_j (p_hat(x_j) - p(x_j))^2 over the grid

    Raises:
        GridMismatch: If a grid point is not a point of the estimate's x-grid
    """
    x_est = np.asarray(estimate.x_grid, dtype=float).ravel()
    values = np.asarray(estimate.values, dtype=float).ravel()
    grid = x_est if grid is None else np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise GridMismatch("evaluation grid is empty")
    order = np.argsort(x_est, kind="stable")
    pos = np.clip(np.searchsorted(x_est[order], grid), 0, x_est.size - 1)
    lower = np.clip(pos - 1, 0, x_est.size - 1)
    pos = np.where(np.abs(x_est[order][lower] - grid) < np.abs(x_est[order][pos] - grid), lower, pos)
    matched = x_est[order][pos]
    if np.any(np.abs(matched - grid) > 1e-9 * np.maximum(1.0, np.abs(grid))):
        raise GridMismatch("estimate does not cover the evaluation grid")
    diff = values[order][pos] - np.asarray(truth(grid), dtype=float)
    return float(np.mean(diff * diff))


@dataclass
class ExperimentReport:
    """Per-replication error records of a Monte Carlo experiment plus their summary."""

    config: Dict[str, Any]
    records: List[Dict[str, Any]]
    summary: Dict[str, Any] = field(default_factory=dict)

    @property
    def failed(self) -> int:
        return sum(1 for r in self.records if r["failed"])

    def to_long_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.records)
        return frame[["n", "rep", "seed", "error", "failed"]]

    def to_long_csv(self, path) -> str:
        self.to_long_frame().to_csv(path, index=False)
        return str(path)

    def to_dict(self) -> Dict[str, Any]:
        return {"config": self.config, "records": self.records, "summary": self.summary}

    def to_json(self, path) -> str:
        return write_json_file(path, self.to_dict())


def _run_replication(
    law: CountLaw,
    innovation: InnovationLaw,
    n: int,
    rep: int,
    seed: int,
    cutoff_plan: Union[str, CutoffRule, AdaptiveSettings],
    x_grid: np.ndarray,
    quad_nodes: int,
) -> Dict[str, Any]:
    record: Dict[str, Any] = {
        "n": int(n), "rep": int(rep), "seed": int(seed), "error": None,
        "failed": False, "message": None, "cutoff": None, "branch_violations": 0,
    }
    try:
        sample = sample_compound(law, innovation, n, seed, rep)
        if isinstance(cutoff_plan, AdaptiveSettings):
            settings = replace(cutoff_plan, quad_nodes=quad_nodes)
            config, _ = settings.resolve(sample, law)
            result = select_cutoff_grid(sample, law, config, x_grid)
            estimate = DensityEstimate(x_grid, result.values, None, quad_nodes, {})
            record["branch_violations"] = result.branch_violations
            record["k_hat_mean"] = float(np.mean(result.k_hat))
            record["k_hat_min"] = int(np.min(result.k_hat))
            record["k_hat_max"] = int(np.max(result.k_hat))
            record["ell"] = config.ell
        else:
            rule = innovation.theory_cutoff_rule() if cutoff_plan == "theory" else cutoff_plan
            U = cutoff(rule, n)
            estimate = estimate_density(ecf_on_grid(sample, [0.0]), law, U, x_grid, quad_nodes)
            record["cutoff"] = U
            record["branch_violations"] = estimate.diagnostics["branch_violations"]
        record["error"] = error_on_grid(estimate, innovation.pdf, x_grid)
    except DecompoundError as e:
        record["failed"] = True
        record["message"] = describe_error(e)
    return record


def run_experiment(
    law: CountLaw,
    innovation: InnovationLaw,
    n_values: Sequence[int],
    reps: int,
    cutoff_plan: Union[str, CutoffRule, AdaptiveSettings] = "theory",
    seed: int = 0,
    x_grid: Optional[np.ndarray] = None,
    quad_nodes: int = DEFAULT_QUAD_NODES,
    threads: int = 1,
    verbose: bool = True,
) -> ExperimentReport:
    """
    Repeat sample -> estimate -> error for every n in n_values

    Args:
        law: Count law
        innovation: Law of xi (supplies the true density)
        n_values: Sample sizes
        reps: Replications per sample size
        cutoff_plan: "theory", a CutoffRule, or AdaptiveSettings
        seed: Base seed
        x_grid: Error grid, default 1000 points on [-4, 4]
        quad_nodes: Trapezoid nodes per half-axis
        threads: Worker threads for replications
        verbose: Print progress

    Returns:
        ExperimentReport; failed replications are kept with failed=True
    """
    if reps < 1:
        raise DomainError(f"reps must be >= 1, got {reps}")
    x_grid = equispaced_grid(SIMULATION_GRID) if x_grid is None else np.asarray(x_grid, dtype=float)
    n_values = [int(n) for n in n_values]
    tasks = [(n, rep) for n in n_values for rep in range(reps)]

    if verbose:
        print(f"🚀 Running {len(tasks)} replications: {law.label} x {innovation.name}, n={n_values}")

    def task(item):
        n, rep = item
        return _run_replication(law, innovation, n, rep, seed, cutoff_plan, x_grid, quad_nodes)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(task, tasks))
    else:
        records = [task(item) for item in tasks]

    if isinstance(cutoff_plan, AdaptiveSettings):
        plan_config = {"adaptive": dict(cutoff_plan.__dict__)}
    elif isinstance(cutoff_plan, CutoffRule):
        plan_config = cutoff_plan.to_config()
    else:
        plan_config = {"theory": innovation.theory_cutoff_rule().to_config()}
    config = {
        "law": law.to_config(),
        "innovation": innovation.to_config(),
        "n_values": n_values,
        "reps": int(reps),
        "seed": int(seed),
        "cutoff": plan_config,
        "x_grid": [float(x_grid[0]), float(x_grid[-1]), int(x_grid.size)],
        "quad_nodes": int(quad_nodes),
    }
    report = ExperimentReport(config, records, summarize_errors(records))
    if verbose:
        failed = report.failed
        status = "✅" if failed == 0 else "⚠️"
        print(f"{status} Experiment finished: {len(records) - failed} ok, {failed} failed")
    return report


def default_xi_grid(observations: np.ndarray, points: int = XI_GRID_POINTS) -> np.ndarray:
    """[min - 0.25 span, max + 0.25 span] with `points` points."""
    lo, hi = float(np.min(observations)), float(np.max(observations))
    span = hi - lo if hi > lo else 1.0
    return np.linspace(lo - XI_GRID_MARGIN * span, hi + XI_GRID_MARGIN * span, points)


@dataclass
class GridSearchResult:
    U_best: Optional[float]
    error_table: pd.DataFrame

    def to_csv(self, path) -> str:
        self.error_table.to_csv(path, index=False)
        return str(path)


def _resampling_errors(
    innovation: InnovationLaw,
    law: CountLaw,
    observed_kde: np.ndarray,
    err_grid: np.ndarray,
    resamples: int,
    resample_n: int,
    seed: int,
) -> np.ndarray:
    errors = np.empty(resamples)
    for r in range(resamples):
        simulated = sample_compound(law, innovation, resample_n, seed, rep=r)
        fitted = kde(simulated, "silverman", err_grid).values
        errors[r] = float(np.mean((observed_kde - fitted) ** 2))
    return errors


def grid_search_cutoff(
    dataset: Union[ClaimsDataset, Sample],
    law: CountLaw,
    U_grid: Sequence[float],
    resamples: int = 25,
    resample_n: int = 1000,
    seed: int = 0,
    xi_grid: Optional[np.ndarray] = None,
    err_grid: Optional[np.ndarray] = None,
    quad_nodes: int = DEFAULT_QUAD_NODES,
    threads: int = 1,
    verbose: bool = True,
) -> GridSearchResult:
    """
    Choose U by comparing the data KDE with KDEs of samples simulated from p_hat^U

    For each U the density estimate is clipped at zero, renormalized and used
    as innovation law; `resamples` compound samples of size `resample_n` are
    drawn (the same seeds for every U) and their KDE is compared with the data
    KDE on err_grid. U values whose estimate fails are flagged and skipped.

    Returns:
        GridSearchResult with U_best (ties to the smaller U) and a table
        U, mean_error, failed, message
    """
    U_values = [float(u) for u in U_grid]
    if not U_values:
        raise DomainError("U_grid must not be empty")
    sample = dataset.sample if isinstance(dataset, ClaimsDataset) else dataset
    xi_grid = default_xi_grid(sample.observations) if xi_grid is None else np.asarray(xi_grid, dtype=float)
    err_grid = equispaced_grid(REALDATA_ERROR_GRID) if err_grid is None else np.asarray(err_grid, dtype=float)
    cf = ecf_on_grid(sample, [0.0])
    observed_kde = kde(sample, "silverman", err_grid).values

    if verbose:
        print(f"🔄 Grid search over {len(U_values)} cutoffs ({resamples} x {resample_n} resamples each)")

    def task(U: float) -> Dict[str, Any]:
        row = {"U": U, "mean_error": None, "failed": False, "message": None}
        try:
            estimate = estimate_density(cf, law, U, xi_grid, quad_nodes)
            innovation = InnovationLaw.from_density_grid(xi_grid, estimate.values, name=f"estimate(U={U:g})")
            errors = _resampling_errors(innovation, law, observed_kde, err_grid, resamples, resample_n, seed)
            row["mean_error"] = float(np.mean(errors))
        except DecompoundError as e:
            row["failed"] = True
            row["message"] = describe_error(e)
        return row

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(task, U_values))
    else:
        rows = [task(U) for U in U_values]

    table = pd.DataFrame(rows, columns=["U", "mean_error", "failed", "message"])
    ok = table[~table["failed"]]
    U_best = None
    if not ok.empty:
        # idxmin returns the first minimum, i.e. the smaller U for ascending grids
        ok = ok.sort_values("U", kind="stable")
        U_best = float(ok.loc[ok["mean_error"].astype(float).idxmin(), "U"])
    if verbose:
        if U_best is None:
            print("❌ Every cutoff failed in the grid search")
        else:
            print(f"✅ Grid search selected U={U_best:g}")
    return GridSearchResult(U_best, table)


def resample_errors(
    dataset: Union[ClaimsDataset, Sample],
    law: CountLaw,
    U: Optional[float],
    n_values: Sequence[int],
    reps: int,
    seed: int = 0,
    xi_grid: Optional[np.ndarray] = None,
    err_grid: Optional[np.ndarray] = None,
    quad_nodes: int = DEFAULT_QUAD_NODES,
    density: Optional[np.ndarray] = None,
) -> pd.DataFrame:
    """
    Data-vs-simulation KDE errors at a fixed cutoff for several sample sizes

    Args:
        density: Estimated density on xi_grid; when given, U is not used

    Returns:
        Long table n, rep, error
    """
    sample = dataset.sample if isinstance(dataset, ClaimsDataset) else dataset
    xi_grid = default_xi_grid(sample.observations) if xi_grid is None else np.asarray(xi_grid, dtype=float)
    err_grid = equispaced_grid(REALDATA_ERROR_GRID) if err_grid is None else np.asarray(err_grid, dtype=float)
    if density is None:
        if U is None:
            raise DomainError("resample_errors needs a cutoff U or a density")
        density = estimate_density(ecf_on_grid(sample, [0.0]), law, U, xi_grid, quad_nodes).values
    innovation = InnovationLaw.from_density_grid(xi_grid, np.asarray(density, dtype=float))
    observed_kde = kde(sample, "silverman", err_grid).values
    rows = []
    for n in n_values:
        errors = _resampling_errors(innovation, law, observed_kde, err_grid, reps, int(n), seed)
        rows.extend({"n": int(n), "rep": r, "error": float(e)} for r, e in enumerate(errors))
    return pd.DataFrame(rows, columns=["n", "rep", "error"])
