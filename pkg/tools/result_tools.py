import os
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Union

import numpy as np

# Add project root directory to Python path to allow running this file from subdirectories
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from tools.errors import InsufficientPoints
from tools.general_tools import LIBRARY_VERSION, write_json_file


def summarize_errors(records: Iterable[Mapping[str, Any]]) -> Dict[str, Any]:
    """
    Summarize replication errors per sample size

    Args:
        records: Replication records with keys n, error, failed

    Returns:
        {"per_n": {n: {count, failed, median, q1, q3, max}}, "n_values": [...],
         "median_strictly_decreasing": bool}
    """
    grouped: Dict[int, List[float]] = {}
    failed: Dict[int, int] = {}
    for record in records:
        n = int(record["n"])
        grouped.setdefault(n, [])
        failed.setdefault(n, 0)
        if record.get("failed"):
            failed[n] += 1
        elif record.get("error") is not None:
            grouped[n].append(float(record["error"]))

    per_n: Dict[str, Dict[str, Optional[float]]] = {}
    medians: List[Optional[float]] = []
    n_values = sorted(grouped)
    for n in n_values:
        errors = np.asarray(grouped[n])
        stats: Dict[str, Optional[float]] = {"count": int(errors.size), "failed": failed[n]}
        if errors.size:
            q1, median, q3 = np.percentile(errors, [25, 50, 75])
            stats.update(median=float(median), q1=float(q1), q3=float(q3), max=float(errors.max()))
        else:
            stats.update(median=None, q1=None, q3=None, max=None)
        per_n[str(n)] = stats
        medians.append(stats["median"])

    decreasing = all(m is not None for m in medians) and all(
        later < earlier for earlier, later in zip(medians, medians[1:])
    )
    return {"per_n": per_n, "n_values": n_values, "median_strictly_decreasing": bool(decreasing)}


def rate_slope(report: Any) -> float:
    """
    Least-squares slope of log(median error) against log(n)

    Args:
        report: ExperimentReport, or its summary dict

    Raises:
        InsufficientPoints: With fewer than three sample sizes that have a positive median
    """
    summary = report if isinstance(report, Mapping) else report.summary
    points = [
        (float(n), stats["median"])
        for n, stats in summary["per_n"].items()
        if stats.get("median") is not None and stats["median"] > 0.0
    ]
    if len(points) < 3:
        raise InsufficientPoints(f"rate_slope needs at least 3 sample sizes, got {len(points)}")
    n, median = np.array(points).T
    slope, _ = np.polyfit(np.log(n), np.log(median), 1)
    return float(slope)


def print_experiment_report(report: Any) -> None:
    """Print the per-n error summary of an experiment report"""
    summary = report.summary
    print("=" * 60)
    print("Experiment Error Report")
    print("=" * 60)
    config = report.config
    print(f"Law: {config['law']}  Innovation: {config['innovation']['name']}")
    print(f"Replications per n: {config['reps']}  Seed: {config['seed']}")
    print()
    print("   n      | median     | q1         | q3         | max        | failed")
    print("-" * 70)
    for n in summary["n_values"]:
        stats = summary["per_n"][str(n)]
        if stats["median"] is None:
            print(f"{n:9d} | {'-':10s} | {'-':10s} | {'-':10s} | {'-':10s} | {stats['failed']}")
            continue
        print(
            f"{n:9d} | {stats['median']:.4e} | {stats['q1']:.4e} | {stats['q3']:.4e} | "
            f"{stats['max']:.4e} | {stats['failed']}"
        )
    print()
    flag = "yes" if summary["median_strictly_decreasing"] else "no"
    print(f"📊 Median error strictly decreasing in n: {flag}")
    try:
        print(f"📊 Log-log rate slope: {rate_slope(summary):.3f}")
    except InsufficientPoints:
        pass


def write_manifest(
    output_dir: Union[str, os.PathLike],
    files: Iterable[Union[str, os.PathLike]],
    resolved_config: Mapping[str, Any],
    command: str,
) -> str:
    """
    Write output_dir/manifest.json with the produced files, resolved config and version

    File paths are stored relative to output_dir.
    """
    output_dir = Path(output_dir)
    relative = sorted({os.path.relpath(str(f), str(output_dir)) for f in files})
    payload = {
        "command": command,
        "files": relative,
        "resolved_config": dict(resolved_config),
        "version": LIBRARY_VERSION,
    }
    return write_json_file(output_dir / "manifest.json", payload)
