"""Configuration ingestion, experiment orchestration, and CSV/JSON output.

Commands:
    nlsw run <config.json>                  single run (scheme mi, wang, or both)
    nlsw converge <config.json> --axis space|time --levels N
    nlsw compare <config.json>              forces scheme=both
    nlsw list-problems

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 identity-oracle validation failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import diagnostics, problems
from .errors import (ConfigurationError, IdentityValidationError, NlswError,
                     SingularSystemError, StepFailureError, UsageError)
from .grid import GridSpec, build_grid
from .mi import SolverConfig, Trajectory, run_mi
from .problems import ProblemSpec, builtin_problem, convergence_order, customized
from .wang import run_wang

SCHEMES = ("mi", "wang", "both")

SERIES_HEADER = ("step", "t", "energy_mi", "mass_mi", "energy_gap", "mass_gap",
                 "energy_wang", "err_max", "e_infty_sq", "mod_err", "fp_iters")
SNAPSHOT_HEADER = ("t", "x", "re_u", "im_u", "abs_u")
ORDERS_HEADER = ("level", "mesh_param", "err_max", "fitted_order")

_ALLOWED_KEYS = {"problem", "K", "J", "T", "scheme", "bootstrap_mode",
                 "fp_tol", "fp_max_iter", "snapshot_stride", "output_dir"}
_PARAM_KEYS = {"alpha": "alpha", "gamma": "gamma", "theta": "theta",
               "lam": "lam", "lambda": "lam", "beta": "beta"}


@dataclass(frozen=True)
class RunConfig:
    """Validated run description; fully deterministic (no seeds anywhere)."""

    problem: Union[str, dict]
    K: int
    J: int
    T: Optional[float] = None
    scheme: str = "mi"
    bootstrap_mode: str = "taylor2"
    fp_tol: float = 1e-13
    fp_max_iter: int = 100
    snapshot_stride: int = 100
    output_dir: str = "out"


@dataclass(frozen=True)
class ResolvedRun:
    problem: ProblemSpec
    grid: GridSpec
    solver_config: SolverConfig
    config: RunConfig


def _resolve_problem(spec) -> ProblemSpec:
    if isinstance(spec, str):
        return builtin_problem(spec)
    if isinstance(spec, dict):
        unknown = set(spec) - {"base", "params"}
        if unknown:
            raise ConfigurationError(f"unknown keys in inline problem: {sorted(unknown)}")
        if "base" not in spec:
            raise ConfigurationError("inline problem needs a 'base' builtin name")
        base = builtin_problem(spec["base"])
        overrides = {}
        for key, value in (spec.get("params") or {}).items():
            if key not in _PARAM_KEYS:
                raise ConfigurationError(f"unknown coefficient {key!r} in inline problem")
            overrides[_PARAM_KEYS[key]] = float(value)
        return customized(base, **overrides)
    raise ConfigurationError(
        f"problem must be a name or an inline spec, got {type(spec).__name__}")


def resolve(config: RunConfig) -> ResolvedRun:
    """Materialize the problem, grid, and solver settings, validating all
    invariants before any compute."""
    problem = _resolve_problem(config.problem)
    T = config.T if config.T is not None else problem.default_T
    grid = build_grid(problem.x_l, problem.x_r, config.K, T, config.J)
    solver_config = SolverConfig(fp_tol=config.fp_tol,
                                 fp_max_iter=config.fp_max_iter,
                                 bootstrap_mode=config.bootstrap_mode)
    if config.scheme not in SCHEMES:
        raise ConfigurationError(f"scheme must be one of {SCHEMES}, got {config.scheme!r}")
    if config.snapshot_stride < 1:
        raise ConfigurationError(
            f"snapshot_stride must be >= 1, got {config.snapshot_stride}")
    return ResolvedRun(problem=problem, grid=grid,
                       solver_config=solver_config, config=config)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON configuration document.

    Unknown keys are rejected; defaults are applied for everything except
    problem, K, and J.  The resulting configuration is resolved once so
    that grid/solver/problem invariants fail here, not mid-run.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"config parse error at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError("config document must be a JSON object")
    unknown = set(raw) - _ALLOWED_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    for key in ("problem", "K", "J"):
        if key not in raw:
            raise ConfigurationError(f"config is missing required key {key!r}")
    try:
        config = RunConfig(
            problem=raw["problem"],
            K=int(raw["K"]),
            J=int(raw["J"]),
            T=float(raw["T"]) if "T" in raw else None,
            scheme=str(raw.get("scheme", "mi")),
            bootstrap_mode=str(raw.get("bootstrap_mode", "taylor2")),
            fp_tol=float(raw.get("fp_tol", 1e-13)),
            fp_max_iter=int(raw.get("fp_max_iter", 100)),
            snapshot_stride=int(raw.get("snapshot_stride", 100)),
            output_dir=str(raw.get("output_dir", "out")),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"malformed config value: {exc}") from exc
    resolve(config)
    return config


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def _write_series(path: Path, rows):
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SERIES_HEADER)
        for row in rows:
            writer.writerow([_fmt(getattr(row, name)) for name in SERIES_HEADER])


def _write_snapshots(path: Path, grid: GridSpec, snapshots):
    x = grid.nodes
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SNAPSHOT_HEADER)
        for t, u in snapshots:
            for k in range(grid.K):
                writer.writerow([_fmt(t), _fmt(x[k]), _fmt(u[k].real),
                                 _fmt(u[k].imag), _fmt(abs(u[k]))])


def _config_echo(config: RunConfig) -> dict:
    return dataclasses.asdict(config)


def _problem_echo(problem: ProblemSpec) -> dict:
    return {
        "name": problem.name,
        "params": dataclasses.asdict(problem.params),
        "domain": [problem.x_l, problem.x_r],
        "default_T": problem.default_T,
        "exactness": problem.exactness,
        "notes": list(problem.notes),
    }


# Documented reading choices that downstream analysis may need to know.
CONVENTIONS = {
    "mass_alpha_norm": "the alpha term of the discrete mass uses the "
                       "half-node norm (what the telescoping derivation "
                       "produces), not the node norm",
    "mass_identity_constant": "beta/4, validated by the tiny-grid oracle; "
                              "the commonly printed beta/2 is available as "
                              "mass_rhs_printed",
    "wang_energy": "two-level quartic form (beta/4)*h*sum(|u^{j+1}|^4+|u^j|^4) "
                   "is the conserved one; the single-level variant is recorded "
                   "for auditing",
    "bootstrap": "the second starting level is a solver choice (taylor2 "
                 "PDE-consistent expansion or exact sampling); the mode used "
                 "is recorded per scheme",
    "orders_err_max": "per-level err_max in orders.csv is the maximum over "
                      "the whole run",
}


def _grid_echo(grid: GridSpec) -> dict:
    return dataclasses.asdict(grid)


def _series_summary(traj: Trajectory) -> dict:
    """Max relative drifts of the recorded invariants, for quick auditing."""
    def drift(values, ref):
        vals = [v for v in values if v is not None]
        if not vals or ref is None:
            return None
        scale = max(abs(ref), 1e-30)
        return max(abs(v - ref) for v in vals) / scale

    return {
        "steps": len(traj.rows),
        "total_fp_iters": traj.meta.get("total_fp_iters"),
        "max_fp_iters": max((r.fp_iters for r in traj.rows), default=None),
        "energy_mi_max_rel_drift": drift((r.energy_mi for r in traj.rows),
                                         traj.meta.get("energy_ref")),
        "mass_mi_max_rel_drift": drift((r.mass_mi for r in traj.rows),
                                       traj.meta.get("mass_ref")),
        "energy_wang_max_rel_drift": drift((r.energy_wang for r in traj.rows),
                                           traj.meta.get("energy_wang_ref")),
        "final_err_max": traj.rows[-1].err_max if traj.rows else None,
        "final_e_infty_sq": traj.rows[-1].e_infty_sq if traj.rows else None,
    }


def run_experiment(config: RunConfig, output_dir=None) -> dict:
    """Execute one configured run and emit series/snapshots/meta files.

    Returns a report dict with the written paths and per-scheme summaries.
    """
    started = time.perf_counter()
    resolved = resolve(config)
    out = Path(output_dir if output_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    oracle = diagnostics.run_identity_oracle()
    if not oracle.ok:
        raise IdentityValidationError(
            "mass-identity oracle failed: measured factor "
            f"{oracle.measured_mass_factor!r} matches neither candidate")

    runners = []
    if config.scheme in ("mi", "both"):
        runners.append(("mi", run_mi))
    if config.scheme in ("wang", "both"):
        runners.append(("wang", run_wang))

    paths = {}
    schemes_meta = {}
    summaries = {}
    for label, runner in runners:
        traj = runner(resolved.problem, resolved.grid, resolved.solver_config,
                      snapshot_stride=config.snapshot_stride)
        suffix = f"_{label}" if config.scheme == "both" else ""
        series_path = out / f"series{suffix}.csv"
        snaps_path = out / f"snapshots{suffix}.csv"
        _write_series(series_path, traj.rows)
        _write_snapshots(snaps_path, resolved.grid, traj.snapshots)
        paths[f"series_{label}"] = str(series_path)
        paths[f"snapshots_{label}"] = str(snaps_path)
        schemes_meta[label] = traj.meta
        summaries[label] = _series_summary(traj)

    meta = {
        "config": _config_echo(config),
        "problem": _problem_echo(resolved.problem),
        "grid": _grid_echo(resolved.grid),
        "schemes": schemes_meta,
        "summaries": summaries,
        "identity_oracle": dataclasses.asdict(oracle),
        "conventions": CONVENTIONS,
        "wall_time_seconds": time.perf_counter() - started,
    }
    meta_path = out / "meta.json"
    with meta_path.open("w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths["meta"] = str(meta_path)
    return {"paths": paths, "summaries": summaries, "identity_oracle": oracle}


def run_convergence(config: RunConfig, axis: str, levels: int,
                    output_dir=None) -> dict:
    """Run a mesh-refinement sweep and fit the convergence order.

    axis="space" doubles K from the configured base; axis="time" doubles J.
    The per-level error is the maximum err_max over the whole run, so the
    sweep needs a problem with a verified exact solution.
    """
    if axis not in ("space", "time"):
        raise UsageError(f"axis must be 'space' or 'time', got {axis!r}")
    if levels < 2:
        raise UsageError(f"a convergence sweep needs >= 2 levels, got {levels}")
    resolved = resolve(config)
    if resolved.problem.exactness != "verified":
        raise ConfigurationError(
            f"problem {resolved.problem.name!r} has no verified exact solution; "
            "refusing the convergence sweep")
    if config.scheme == "both":
        raise ConfigurationError("convergence sweeps run one scheme at a time")
    runner = run_mi if config.scheme == "mi" else run_wang

    started = time.perf_counter()
    out = Path(output_dir if output_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    entries = []
    for level in range(levels):
        K = config.K * 2 ** level if axis == "space" else config.K
        J = config.J * 2 ** level if axis == "time" else config.J
        T = config.T if config.T is not None else resolved.problem.default_T
        grid = build_grid(resolved.problem.x_l, resolved.problem.x_r, K, T, J)
        traj = runner(resolved.problem, grid, resolved.solver_config,
                      snapshot_stride=max(grid.J, 1))
        err = max(row.err_max for row in traj.rows)
        mesh_param = grid.h if axis == "space" else grid.tau
        entries.append((level, mesh_param, err))

    fitted = convergence_order([(m, e) for _, m, e in entries])
    orders_path = out / "orders.csv"
    with orders_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ORDERS_HEADER)
        for level, mesh_param, err in entries:
            writer.writerow([str(level), _fmt(mesh_param), _fmt(err), _fmt(fitted)])

    meta = {
        "config": _config_echo(config),
        "problem": _problem_echo(resolved.problem),
        "axis": axis,
        "levels": levels,
        "fitted_order": fitted,
        "entries": [{"level": l, "mesh_param": m, "err_max": e}
                    for l, m, e in entries],
        "wall_time_seconds": time.perf_counter() - started,
    }
    meta_path = out / "meta.json"
    with meta_path.open("w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"paths": {"orders": str(orders_path), "meta": str(meta_path)},
            "fitted_order": fitted, "entries": entries}


def _error_record(exc: Exception) -> str:
    record = {"error": type(exc).__name__, "message": str(exc)}
    step = getattr(exc, "step", None)
    if step is not None:
        record["step"] = step
    return json.dumps(record)


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, IdentityValidationError):
        return 4
    if isinstance(exc, (StepFailureError, SingularSystemError)):
        return 3
    if isinstance(exc, (ConfigurationError, UsageError)):
        return 2
    return 1


def _load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path!r}: {exc}") from exc
    return parse_config(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlsw",
        description="Structure-preserving integrators for the nonlinear "
                    "Schrodinger equation with wave operator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured run")
    p_run.add_argument("config")
    p_run.add_argument("--output", default=None, help="override output directory")

    p_conv = sub.add_parser("converge", help="mesh-refinement order study")
    p_conv.add_argument("config")
    p_conv.add_argument("--axis", choices=("space", "time"), required=True)
    p_conv.add_argument("--levels", type=int, required=True)
    p_conv.add_argument("--output", default=None)

    p_cmp = sub.add_parser("compare", help="run both schemes on one config")
    p_cmp.add_argument("config")
    p_cmp.add_argument("--output", default=None)

    sub.add_parser("list-problems", help="list built-in benchmark problems")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list-problems":
            for name in problems.PROBLEM_NAMES:
                spec = builtin_problem(name)
                p = spec.params
                print(f"{name}: domain [{spec.x_l:g}, {spec.x_r:g}], "
                      f"T={spec.default_T:g}, exactness={spec.exactness}, "
                      f"alpha={p.alpha:g} gamma={p.gamma:g} theta={p.theta:g} "
                      f"lam={p.lam:g} beta={p.beta:g}")
            return 0
        config = _load_config(args.config)
        if args.command == "run":
            report = run_experiment(config, output_dir=args.output)
        elif args.command == "compare":
            config = dataclasses.replace(config, scheme="both")
            report = run_experiment(config, output_dir=args.output)
        elif args.command == "converge":
            report = run_convergence(config, axis=args.axis, levels=args.levels,
                                     output_dir=args.output)
            print(f"fitted order ({args.axis}): {report['fitted_order']:.4f}")
            return 0
        else:  # pragma: no cover - argparse enforces the choices
            raise UsageError(f"unknown command {args.command!r}")
        for label, summary in report["summaries"].items():
            print(f"{label}: {summary['steps']} steps, "
                  f"total fp iters {summary['total_fp_iters']}")
        return 0
    except NlswError as exc:
        print(_error_record(exc), file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
