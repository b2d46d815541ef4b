import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd
from dotenv import load_dotenv

load_dotenv()

from estimator.adaptive_estimator.adaptive_estimator import (
    AdaptiveSettings, default_K_n, kappa_for_law, select_cutoff_grid)
from estimator.base_estimator.base_estimator import (CutoffRule, cutoff,
                                                     estimate_density,
                                                     estimate_M,
                                                     side_condition)
from estimator.base_estimator.deterministic_estimator import (
    DEFAULT_MODULUS_FLOOR, estimate_density_deterministic)
from tools.claims_tools import fit_two_point, ingest_claims
from tools.count_law import CountLaw, check_nonvanishing, moments, rho_star
from tools.ecf_tools import Sample, ecf_on_grid
from tools.errors import (ConfigError, DecompoundError, DomainError,
                          EmptySample, JoinMismatch, NonpositiveAmount,
                          SchemaError, Unsupported, UnsupportedCount,
                          describe_error)
from tools.general_tools import (load_config, parse_float_list,
                                 resolve_config, resolve_project_path,
                                 write_json_file)
from tools.innovation_law import InnovationLaw
from tools.kde_tools import kde
from tools.result_tools import print_experiment_report, write_manifest
from tools.simulation_tools import (REALDATA_ERROR_GRID, SIMULATION_GRID,
                                    default_xi_grid, grid_search_cutoff,
                                    resample_errors, run_experiment,
                                    sample_compound)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ESTIMATOR = 2

INGESTION_ERRORS = (SchemaError, JoinMismatch, NonpositiveAmount, UnsupportedCount)

COMMON_DEFAULTS = {
    "seed": 0,
    "threads": 1,
    "output_dir": None,
    "format": "both",
    "quad_nodes": 4096,
}

COMMAND_DEFAULTS = {
    "simulate": {
        "law": "two_point:0.3",
        "xi": "laplace",
        "n": [100, 1000, 5000],
        "reps": 100,
        "cutoff": "theory",
        "c": 1.0 / 3.0,
        "h": 1.0,
        "K_n": None,
        "ell": "auto",
        "beta_bar": 1.0,
        "rho0": 5.0,
        "grid": list(SIMULATION_GRID),
    },
    "estimate": {
        "input": None,
        "law": "tabulated:1.0",
        "xi": "normal",
        "n": 1000,
        "U": "auto-poly",
        "beta": 1.0,
        "c": 1.0 / 3.0,
        "gamma": 2.0,
        "c_gamma": 0.5,
        "deterministic_m": None,
        "modulus_floor": DEFAULT_MODULUS_FLOOR,
        "grid": list(SIMULATION_GRID),
    },
    "adapt": {
        "input": None,
        "law": "shifted_poisson:0.1",
        "xi": "laplace",
        "n": 1000,
        "h": 1.0,
        "K_n": None,
        "ell": "auto",
        "mode": "simulation",
        "beta_bar": 1.0,
        "rho0": 5.0,
        "grid": list(SIMULATION_GRID),
        "trace_x": 0.0,
    },
    "realdata": {
        "freq": "data/claims/freq.csv",
        "sev": "data/claims/sev.csv",
        "region": None,
        "strict": False,
        "cutoff": "adaptive",
        "h": 1.0,
        "K_n": None,
        "ell": "auto",
        "beta_bar": 2.0,
        "rho0": 1.0,
        "resamples": 25,
        "resample_n": 1000,
        "error_study_n": None,
        "err_grid": list(REALDATA_ERROR_GRID),
    },
    "check": {
        "law": "two_point:0.9",
        "variance": 1.0,
        "gaussian_component": 0.0,
        "mean": 0.0,
        "use_infinite_divisibility": False,
    },
}


def _say(config: Dict[str, Any], message: str) -> None:
    if config.get("verbose", True):
        print(message)


def _error(message: str) -> None:
    print(f"❌ {message}", file=sys.stderr)


def parse_law(value: Any) -> CountLaw:
    if isinstance(value, CountLaw):
        return value
    if isinstance(value, dict):
        return CountLaw.from_config(value)
    return CountLaw.from_string(str(value))


def parse_grid(value: Any) -> np.ndarray:
    """"a,b,J" or [a, b, J] -> J equispaced points on [a, b]."""
    parts = parse_float_list(value)
    if len(parts) != 3 or parts[2] < 2 or int(parts[2]) != parts[2]:
        raise ConfigError(f"grid must be 'start,stop,points', got {value!r}")
    return np.linspace(parts[0], parts[1], int(parts[2]))


def parse_threads(value: Any) -> int:
    if value in (None, "auto"):
        return os.cpu_count() or 1
    threads = int(value)
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {value}")
    return threads


def _output_dir(config: Dict[str, Any], command: str) -> Path:
    path = Path(config["output_dir"] or os.path.join("outputs", command))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _formats(config: Dict[str, Any]) -> List[str]:
    fmt = config["format"]
    if fmt not in ("csv", "json", "both"):
        raise ConfigError(f"format must be csv, json or both, got {fmt}")
    return ["csv", "json"] if fmt == "both" else [fmt]


def _load_or_generate_sample(config: Dict[str, Any], law: CountLaw) -> Sample:
    if config.get("input"):
        return Sample.from_csv(config["input"])
    innovation = InnovationLaw.from_string(config["xi"])
    return sample_compound(law, innovation, int(config["n"]), int(config["seed"]))


def _adaptive_settings(config: Dict[str, Any], mode: str) -> AdaptiveSettings:
    ell = config["ell"]
    if ell != "auto":
        ell = float(ell)
    K_n = None if config["K_n"] is None else int(config["K_n"])
    return AdaptiveSettings(
        h=float(config["h"]),
        K_n=K_n,
        ell=ell,
        mode=mode,
        beta_bar=float(config["beta_bar"]),
        rho0=float(config["rho0"]),
        quad_nodes=int(config["quad_nodes"]),
    )


def _finish(out_dir: Path, files: List[str], config: Dict[str, Any], command: str) -> None:
    files.append(write_json_file(out_dir / "resolved_config.json", config))
    files.append(write_manifest(out_dir, files, config, command))
    _say(config, f"📁 Outputs written to {out_dir}")


# ---------------------------------------------------------------- simulate

def _simulate_plan(config: Dict[str, Any]):
    law = parse_law(config["law"])
    innovation = InnovationLaw.from_string(config["xi"])
    n_values = [int(n) for n in parse_float_list(config["n"])]
    if int(config["reps"]) < 1:
        raise ConfigError("reps must be >= 1")
    plan = config["cutoff"]
    if plan == "theory":
        cutoff_plan = innovation.theory_cutoff_rule(float(config["c"]))
    elif plan == "adaptive":
        cutoff_plan = _adaptive_settings(config, "simulation")
    elif str(plan).startswith("fixed:"):
        cutoff_plan = CutoffRule.fixed(float(str(plan).split(":", 1)[1]))
    else:
        raise ConfigError(f"cutoff must be theory, adaptive or fixed:<U>, got {plan}")
    return law, innovation, n_values, cutoff_plan


def derive_simulate(config: Dict[str, Any]) -> Dict[str, Any]:
    law, innovation, n_values, plan = _simulate_plan(config)
    derived: Dict[str, Any] = {"law": law.label, "innovation": innovation.name, "mean_N": moments(law)[0]}
    if isinstance(plan, AdaptiveSettings):
        derived["K_n"] = {str(n): plan.K_n or (default_K_n(n) if n >= 2 else None) for n in n_values}
        derived.update(kappa_for_law(law, plan.rho0))
        derived["M_hat"] = "estimated per sample"
    else:
        # n < 2 has no cutoff; those replications are reported as failed
        derived["U_schedule"] = {str(n): cutoff(plan, n) if n >= 2 else None for n in n_values}
    return derived


def cmd_simulate(config: Dict[str, Any]) -> int:
    law, innovation, n_values, plan = _simulate_plan(config)
    out_dir = _output_dir(config, "simulate")
    report = run_experiment(
        law,
        innovation,
        n_values,
        int(config["reps"]),
        cutoff_plan=plan,
        seed=int(config["seed"]),
        x_grid=parse_grid(config["grid"]),
        quad_nodes=int(config["quad_nodes"]),
        threads=parse_threads(config["threads"]),
        verbose=config.get("verbose", True),
    )
    files = []
    formats = _formats(config)
    if "json" in formats:
        files.append(report.to_json(out_dir / "report.json"))
    if "csv" in formats:
        files.append(report.to_long_csv(out_dir / "report_long.csv"))
    _finish(out_dir, files, config, "simulate")
    if config.get("verbose", True):
        print_experiment_report(report)
    if report.failed:
        _error(f"{report.failed} replication(s) failed; see the report for details")
        return EXIT_ESTIMATOR
    return EXIT_OK


# ---------------------------------------------------------------- estimate

def _estimate_rule(config: Dict[str, Any], n: int) -> Dict[str, Any]:
    U = config["U"]
    m = config["deterministic_m"]
    if U == "auto-poly":
        rule = CutoffRule.polynomial(float(config["beta"]), float(config["c"]))
    elif U == "auto-super":
        rule = CutoffRule.supersmooth(float(config["gamma"]), float(config["c_gamma"]))
    elif U == "auto-det":
        if m is None:
            raise ConfigError("U=auto-det needs deterministic_m")
        rule = CutoffRule.deterministic(float(config["beta"]), int(m))
    else:
        try:
            rule = CutoffRule.fixed(float(U))
        except (TypeError, ValueError):
            raise ConfigError(f"U must be a number, auto-poly, auto-super or auto-det, got {U}") from None
    return {"rule": rule, "U": cutoff(rule, n)}


def derive_estimate(config: Dict[str, Any]) -> Dict[str, Any]:
    law = parse_law(config["law"])
    n = int(config["n"]) if not config.get("input") else None
    derived: Dict[str, Any] = {"law": law.label}
    if n is not None:
        derived["U"] = _estimate_rule(config, n)["U"]
    else:
        derived["U"] = "computed from the input sample size"
    return derived


def cmd_estimate(config: Dict[str, Any]) -> int:
    law = parse_law(config["law"])
    sample = _load_or_generate_sample(config, law)
    chosen = _estimate_rule(config, sample.n)
    x_grid = parse_grid(config["grid"])
    cf = ecf_on_grid(sample, [0.0])
    m = config["deterministic_m"]
    if m is not None:
        estimate = estimate_density_deterministic(
            cf, int(m), chosen["U"], x_grid, int(config["quad_nodes"]), float(config["modulus_floor"])
        )
        beta = float(config["beta"])
        estimate.diagnostics["side_condition"] = side_condition(chosen["U"], beta, int(m), sample.n)
    else:
        estimate = estimate_density(cf, law, chosen["U"], x_grid, int(config["quad_nodes"]))
    estimate.diagnostics["n"] = sample.n
    estimate.diagnostics["cutoff_rule"] = chosen["rule"].to_config()

    out_dir = _output_dir(config, "estimate")
    files = []
    formats = _formats(config)
    if "csv" in formats:
        files.append(estimate.to_csv(out_dir / "density.csv"))
    if "json" in formats:
        files.append(estimate.to_json(out_dir / "density.json"))
    _finish(out_dir, files, config, "estimate")
    _say(config, f"✅ Estimated density with U={chosen['U']:.6g} from n={sample.n} ({estimate.diagnostics['branch_violations']} clipped frequencies)")
    return EXIT_OK


# ---------------------------------------------------------------- adapt

def derive_adapt(config: Dict[str, Any]) -> Dict[str, Any]:
    law = parse_law(config["law"])
    settings = _adaptive_settings(config, config["mode"])
    derived: Dict[str, Any] = {"law": law.label, "mean_N": moments(law)[0]}
    derived.update(kappa_for_law(law, settings.rho0))
    if not config.get("input"):
        n = int(config["n"])
        derived["K_n"] = settings.K_n or default_K_n(n, settings.mode)
    derived["M_hat"] = "estimated from the sample"
    return derived


def cmd_adapt(config: Dict[str, Any]) -> int:
    law = parse_law(config["law"])
    sample = _load_or_generate_sample(config, law)
    settings = _adaptive_settings(config, config["mode"])
    adaptive_config, constants = settings.resolve(sample, law)
    x_grid = parse_grid(config["grid"])
    result = select_cutoff_grid(sample, law, adaptive_config, x_grid, threads=parse_threads(config["threads"]))
    result.constants = constants

    out_dir = _output_dir(config, "adapt")
    files = []
    formats = _formats(config)
    trace_index = int(np.argmin(np.abs(x_grid - float(config["trace_x"]))))
    if "csv" in formats:
        frame = pd.DataFrame({"x": x_grid, "density": result.values, "k_hat": result.k_hat})
        frame.to_csv(out_dir / "adaptive_density.csv", index=False)
        files.append(str(out_dir / "adaptive_density.csv"))
    if "json" in formats:
        payload = {
            "constants": constants,
            "K_n": adaptive_config.K_n,
            "h": adaptive_config.h,
            "ell": adaptive_config.ell,
            "n": sample.n,
            "branch_violations": result.branch_violations,
            "x": x_grid.tolist(),
            "density": result.values.tolist(),
            "k_hat": result.k_hat.tolist(),
        }
        files.append(write_json_file(out_dir / "adaptive.json", payload))
    files.append(result.trace_json(out_dir / "trace.json", trace_index))
    _finish(out_dir, files, config, "adapt")
    _say(config, f"✅ Adaptive selection done: K_n={adaptive_config.K_n}, ell={adaptive_config.ell:.4g}, "
                 f"k_hat range [{int(result.k_hat.min())}, {int(result.k_hat.max())}]")
    return EXIT_OK


# ---------------------------------------------------------------- realdata

def _realdata_constants(sample: Sample, law: CountLaw, config: Dict[str, Any]) -> Dict[str, Any]:
    h = float(config["h"])
    K_n = int(config["K_n"]) if config["K_n"] is not None else default_K_n(sample.n, "realdata")
    constants: Dict[str, Any] = {"n": sample.n, "K_n": K_n, "law": law.label}
    if law.family == "two_point":
        constants["p_hat"] = law.p
    try:
        constants["rho_star"] = rho_star(law)
    except Unsupported:
        constants["rho_star"] = None
    constants.update(kappa_for_law(law, float(config["rho0"])))
    constants["M_hat"] = estimate_M(ecf_on_grid(sample, [0.0]), float(config["beta_bar"]), K_n * h, 0.01)
    constants["mean_N"] = moments(law)[0]
    constants["ell_min"] = constants["kappa"] ** 2 * constants["M_hat"] * constants["mean_N"] * h
    return constants


def _ingest(config: Dict[str, Any]):
    return ingest_claims(
        resolve_project_path(config["freq"]),
        resolve_project_path(config["sev"]),
        config["region"],
        bool(config["strict"]),
    )


def _parse_realdata_cutoff(value: str) -> Dict[str, Any]:
    if value == "adaptive":
        return {"kind": "adaptive"}
    parts = str(value).split(":")
    if parts[0] == "grid" and len(parts) == 4:
        start, stop, step = (float(p) for p in parts[1:])
        if step <= 0 or stop < start:
            raise ConfigError(f"grid cutoff needs start <= stop and step > 0, got {value}")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return {"kind": "grid", "U_grid": (start + step * np.arange(count)).tolist()}
    if parts[0] == "fixed" and len(parts) == 2:
        return {"kind": "fixed", "U": float(parts[1])}
    raise ConfigError(f"cutoff must be adaptive, grid:<start>:<stop>:<step> or fixed:<U>, got {value}")


def _error_study_sizes(config: Dict[str, Any]) -> List[int]:
    sizes = [int(n) for n in parse_float_list(config["error_study_n"])]
    if not sizes or min(sizes) < 1:
        raise ConfigError(f"error_study_n must list sample sizes >= 1, got {config['error_study_n']!r}")
    return sizes


def derive_realdata(config: Dict[str, Any]) -> Dict[str, Any]:
    plan = _parse_realdata_cutoff(config["cutoff"])
    derived = {"cutoff": plan}
    if config["error_study_n"]:
        derived["error_study_n"] = _error_study_sizes(config)
    try:
        dataset = _ingest(config)
        law = fit_two_point(dataset)
        derived.update(_realdata_constants(dataset.sample, law, config))
    except DecompoundError as e:
        derived["ingestion"] = describe_error(e)
    return derived


def cmd_realdata(config: Dict[str, Any]) -> int:
    plan = _parse_realdata_cutoff(config["cutoff"])
    out_dir = _output_dir(config, "realdata")
    files = []
    try:
        dataset = _ingest(config)
    except INGESTION_ERRORS as e:
        pd.DataFrame([{"policy_id": getattr(e, "policy_id", ""), "reason": type(e).__name__, "detail": str(e)}]).to_csv(
            out_dir / "rejections.csv", index=False
        )
        raise
    files.append(dataset.write_rejections(out_dir / "rejections.csv"))
    _say(config, f"📊 Ingested {dataset.n} policies ({len(dataset.rejections)} rejected, {dataset.dropped_zero_counts} without claims)")

    law = fit_two_point(dataset)
    sample = dataset.sample
    constants = _realdata_constants(sample, law, config)
    _say(config, f"📊 {law.label}: kappa={constants['kappa']:.4g}, M_hat={constants['M_hat']:.5g}, ell_min={constants['ell_min']:.5g}")

    quad_nodes = int(config["quad_nodes"])
    threads = parse_threads(config["threads"])
    seed = int(config["seed"])
    xi_grid = default_xi_grid(sample.observations)
    err_grid = parse_grid(config["err_grid"])
    summary: Dict[str, Any] = {"constants": constants, "cutoff": plan}

    if plan["kind"] == "adaptive":
        settings = _adaptive_settings(config, "realdata")
        adaptive_config, ell_constants = settings.resolve(sample, law)
        result = select_cutoff_grid(sample, law, adaptive_config, xi_grid, threads=threads)
        values = result.values
        summary["ell"] = adaptive_config.ell
        summary["ell_constants"] = ell_constants
        summary["k_hat_range"] = [int(result.k_hat.min()), int(result.k_hat.max())]
        U_chosen = None
    else:
        if plan["kind"] == "grid":
            search = grid_search_cutoff(
                sample, law, plan["U_grid"], int(config["resamples"]), int(config["resample_n"]), seed,
                xi_grid=xi_grid, err_grid=err_grid, quad_nodes=quad_nodes, threads=threads,
                verbose=config.get("verbose", True),
            )
            files.append(search.to_csv(out_dir / "grid_search.csv"))
            if search.U_best is None:
                _error("every cutoff in the grid failed")
                _finish(out_dir, files, config, "realdata")
                return EXIT_ESTIMATOR
            U_chosen = search.U_best
        else:
            U_chosen = plan["U"]
        values = estimate_density(ecf_on_grid(sample, [0.0]), law, U_chosen, xi_grid, quad_nodes).values
    summary["U"] = U_chosen

    density = pd.DataFrame({"x": xi_grid, "density": values})
    density.to_csv(out_dir / "density.csv", index=False)
    files.append(str(out_dir / "density.csv"))

    innovation = InnovationLaw.from_density_grid(xi_grid, values)
    simulated = sample_compound(law, innovation, int(config["resample_n"]), seed)
    comparison = pd.DataFrame(
        {
            "x": err_grid,
            "observed_kde": kde(sample, "silverman", err_grid).values,
            "simulated_kde": kde(simulated, "silverman", err_grid).values,
        }
    )
    comparison.to_csv(out_dir / "kde_comparison.csv", index=False)
    files.append(str(out_dir / "kde_comparison.csv"))
    summary["kde_error"] = float(np.mean((comparison["observed_kde"] - comparison["simulated_kde"]) ** 2))

    if config["error_study_n"]:
        study = resample_errors(
            sample, law, U_chosen, _error_study_sizes(config), int(config["resamples"]), seed,
            xi_grid=xi_grid, err_grid=err_grid, quad_nodes=quad_nodes, density=values,
        )
        study.to_csv(out_dir / "error_study.csv", index=False)
        files.append(str(out_dir / "error_study.csv"))
        medians = study.groupby("n")["error"].median()
        summary["error_study_median"] = {str(n): float(m) for n, m in medians.items()}
        _say(config, "📊 Error study medians: " + ", ".join(f"n={n}: {m:.3g}" for n, m in medians.items()))

    files.append(write_json_file(out_dir / "realdata.json", summary))
    _finish(out_dir, files, config, "realdata")
    _say(config, "✅ Real-data pipeline completed")
    return EXIT_OK


# ---------------------------------------------------------------- check

def _check_stats(config: Dict[str, Any]) -> Dict[str, Optional[float]]:
    variance = config["variance"]
    return {
        "variance": None if variance is None else float(variance),
        "gaussian_component": float(config["gaussian_component"] or 0.0),
        "mean": float(config["mean"] or 0.0),
    }


def derive_check(config: Dict[str, Any]) -> Dict[str, Any]:
    law = parse_law(config["law"])
    return {"law": law.label, "xi_stats": _check_stats(config)}


def cmd_check(config: Dict[str, Any]) -> int:
    law = parse_law(config["law"])
    verdict = check_nonvanishing(law, _check_stats(config), bool(config["use_infinite_divisibility"]))
    out_dir = _output_dir(config, "check")
    files = [write_json_file(out_dir / "check.json", {"law": law.label, **verdict.to_dict()})]
    _finish(out_dir, files, config, "check")
    line = f"{verdict.verdict}: {verdict.reason}"
    if verdict.u_circ is not None:
        line += f" (u_circ={verdict.u_circ:.6g})"
    print(line)
    return EXIT_OK


# Subcommand table: handler for the run and for --dry-run derived constants
COMMAND_REGISTRY: Dict[str, Dict[str, Callable[[Dict[str, Any]], Any]]] = {
    "simulate": {"run": cmd_simulate, "derive": derive_simulate},
    "estimate": {"run": cmd_estimate, "derive": derive_estimate},
    "adapt": {"run": cmd_adapt, "derive": derive_adapt},
    "realdata": {"run": cmd_realdata, "derive": derive_realdata},
    "check": {"run": cmd_check, "derive": derive_check},
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decompound", description="Density estimation for compound sums")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default=None, help="JSON config (defaults to configs/default_<command>_config.json)")
        p.add_argument("--dry-run", "--dry_run", dest="dry_run", action="store_true", help="Print resolved config and derived constants")
        p.add_argument("--quiet", action="store_true", help="Suppress progress output")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", default=None, help="Worker threads, or auto")
        p.add_argument("--output_dir", "--output-dir", dest="output_dir", default=None)
        p.add_argument("--format", choices=["csv", "json", "both"], default=None)
        p.add_argument("--quad_nodes", "--quad-nodes", dest="quad_nodes", type=int, default=None)

    def adaptive_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--h", type=float, default=None, help="Cutoff grid step")
        p.add_argument("--K_n", "--K-n", dest="K_n", type=int, default=None, help="Number of candidate cutoffs")
        p.add_argument("--ell", default=None, help="Penalty level or auto")
        p.add_argument("--beta_bar", "--beta-bar", dest="beta_bar", type=float, default=None)
        p.add_argument("--rho0", type=float, default=None)

    p = sub.add_parser("simulate", help="Monte Carlo error study")
    common(p)
    adaptive_flags(p)
    p.add_argument("--law", default=None, help="e.g. two_point:0.3, geometric:0.3, shifted_poisson:1")
    p.add_argument("--xi", default=None, help="laplace or normal (optionally :loc,scale)")
    p.add_argument("--n", default=None, help="Comma-separated sample sizes")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--cutoff", default=None, help="theory, adaptive or fixed:<U>")
    p.add_argument("--c", type=float, default=None, help="Scale of the polynomial theory cutoff")
    p.add_argument("--grid", default=None, help="Error grid start,stop,points")

    p = sub.add_parser("estimate", help="Estimate the summand density")
    common(p)
    p.add_argument("--input", default=None, help="Sample CSV, one value per line")
    p.add_argument("--law", default=None)
    p.add_argument("--xi", default=None, help="Innovation law for a generated sample")
    p.add_argument("--n", type=int, default=None, help="Size of a generated sample")
    p.add_argument("--U", default=None, help="Number, auto-poly, auto-super or auto-det")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--c_gamma", "--c-gamma", dest="c_gamma", type=float, default=None)
    p.add_argument("--deterministic-m", "--deterministic_m", dest="deterministic_m", type=int, default=None)
    p.add_argument("--modulus_floor", "--modulus-floor", dest="modulus_floor", type=float, default=None)
    p.add_argument("--grid", default=None, help="Evaluation grid start,stop,points")

    p = sub.add_parser("adapt", help="Adaptive cutoff selection")
    common(p)
    adaptive_flags(p)
    p.add_argument("--input", default=None)
    p.add_argument("--law", default=None)
    p.add_argument("--xi", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--mode", choices=["simulation", "realdata"], default=None)
    p.add_argument("--grid", default=None)
    p.add_argument("--trace_x", "--trace-x", dest="trace_x", type=float, default=None)

    p = sub.add_parser("realdata", help="Claims pipeline")
    common(p)
    adaptive_flags(p)
    p.add_argument("--freq", default=None, help="Frequency CSV")
    p.add_argument("--sev", default=None, help="Severity CSV")
    p.add_argument("--region", default=None)
    p.add_argument("--strict", action="store_true", default=None)
    p.add_argument("--cutoff", default=None, help="adaptive, grid:<start>:<stop>:<step> or fixed:<U>")
    p.add_argument("--resamples", type=int, default=None)
    p.add_argument("--resample-n", "--resample_n", dest="resample_n", type=int, default=None)
    p.add_argument("--err_grid", "--err-grid", dest="err_grid", default=None)
    p.add_argument("--error-study-n", "--error_study_n", dest="error_study_n", default=None,
                   help="Comma-separated sample sizes for the data-vs-simulation error study")

    p = sub.add_parser("check", help="Zero-free sufficient conditions")
    common(p)
    p.add_argument("--law", default=None)
    p.add_argument("--variance", type=float, default=None)
    p.add_argument("--gaussian_component", "--gaussian-component", dest="gaussian_component", type=float, default=None)
    p.add_argument("--mean", type=float, default=None)
    p.add_argument("--use_infinite_divisibility", "--use-infinite-divisibility", dest="use_infinite_divisibility",
                   action="store_true", default=None)
    return parser


# Grid options whose value may start with a minus sign
GRID_OPTIONS = ("--grid", "--err_grid", "--err-grid")


def attach_grid_values(argv: List[str]) -> List[str]:
    """Rewrite "--grid -2,2,21" as "--grid=-2,2,21" so argparse does not read the value as a flag."""
    out: List[str] = []
    i = 0
    while i < len(argv):
        token = argv[i]
        value = argv[i + 1] if i + 1 < len(argv) else ""
        if token in GRID_OPTIONS and len(value) > 1 and value[0] == "-" and (value[1].isdigit() or value[1] == "."):
            out.append(f"{token}={value}")
            i += 2
            continue
        out.append(token)
        i += 1
    return out


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand and return its exit code"""
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(attach_grid_values(argv))
    command = args.command
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "dry_run", "quiet")}
    handlers = COMMAND_REGISTRY[command]

    try:
        file_values = load_config(args.config, command)
        config = resolve_config({**COMMON_DEFAULTS, **COMMAND_DEFAULTS[command]}, file_values, flags)
        config["verbose"] = not args.quiet
        derived = handlers["derive"](config)
    except (ConfigError, DomainError, FileNotFoundError) as e:
        _error(f"Configuration error: {e}")
        return EXIT_CONFIG

    if args.dry_run:
        print(json.dumps({"resolved_config": config, "derived": derived}, indent=2, sort_keys=True, default=str))
        return EXIT_OK

    _say(config, f"🚀 Running {command}")
    try:
        return handlers["run"](config)
    except (ConfigError, FileNotFoundError, EmptySample) + INGESTION_ERRORS as e:
        _error(describe_error(e))
        return EXIT_CONFIG
    except DomainError as e:
        _error(describe_error(e))
        return EXIT_CONFIG if command == "check" else EXIT_ESTIMATOR
    except DecompoundError as e:
        _error(describe_error(e))
        return EXIT_ESTIMATOR


if __name__ == "__main__":
    sys.exit(main())
