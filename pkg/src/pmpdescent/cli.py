"""Command-line front end: single runs, mesh sweeps, machine-readable logs.

Artifacts of a single run (all in the output directory):

  iterations.csv   one row per outer iteration,
                   header ``k,J,rho_l1,t_k,set_measure,changed_cells,inner_trials``
  summary.json     mesh size h, final J, final L1 residual, iteration
                   count, termination reason
  control.txt      optional cellwise control dump (``--dump-control``)
  state.txt,       optional vertexwise dumps of y and p (``--dump-fields``)
  adjoint.txt

A sweep additionally writes ``sweep.csv`` (one summary row per mesh) and
``rho_history.csv`` (residual histories side by side), with the per-run
artifacts in ``n<N>/`` subdirectories.

Floats are serialized with 17 significant digits so every log round-trips
to the exact in-memory value.  Exit codes: 0 success, 2 usage error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .descent import (MODE_ARMIJO, MODE_FULL_STEP, AlgorithmConfig,
                      IterationRecord, RunHistory, run)
from .integrand import CostIntegrand, IntegerQuadratic, PureQuadratic
from .linalg import LinearSolverError
from .problem import TARGETS, Problem

__all__ = ["RunConfig", "parse_config", "run_single", "run_sweep", "main",
           "read_iteration_log", "EXIT_OK", "EXIT_USAGE", "EXIT_NUMERICAL"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

CSV_HEADER = "k,J,rho_l1,t_k,set_measure,changed_cells,inner_trials"

INTEGRANDS = ("integer-quadratic", "quadratic")
MODES = (MODE_ARMIJO, MODE_FULL_STEP)
DEFAULT_SWEEP = (32, 64, 128, 256)


@dataclass
class RunConfig:
    """Everything a run needs; file values are overridden by CLI flags."""

    n: int = 32
    sweep: tuple[int, ...] | None = None
    alpha: float = 0.01
    beta: float = 0.01
    sigma: float = 0.1
    b: int = 10
    delta_tol: float = 1e-12
    max_outer: int = 100
    solver_tol: float = 1e-12
    mode: str = MODE_ARMIJO
    integrand: str = "integer-quadratic"
    target: str = "default"
    out_dir: str = "."
    dump_control: bool = False
    dump_fields: bool = False
    seed: int = 0  # reserved for test utilities; the algorithm itself is deterministic


def _parse_sweep(text: str) -> tuple[int, ...]:
    items = [part.strip() for part in text.split(",") if part.strip()]
    if not items:
        raise ValueError("empty sweep list")
    return tuple(int(part) for part in items)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_FIELD_PARSERS = {
    "n": int,
    "sweep": _parse_sweep,
    "alpha": float,
    "beta": float,
    "sigma": float,
    "b": int,
    "delta_tol": float,
    "max_outer": int,
    "solver_tol": float,
    "mode": str,
    "integrand": str,
    "target": str,
    "out_dir": str,
    "dump_control": _parse_bool,
    "dump_fields": _parse_bool,
    "seed": int,
}


def _load_config_file(path: Path, parser: argparse.ArgumentParser) -> dict:
    """Flat key=value file; '#' starts a comment, unknown keys are rejected."""
    if not path.is_file():
        parser.error(f"config file not found: {path}")
    entries: dict = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            parser.error(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _FIELD_PARSERS:
            parser.error(f"{path}:{lineno}: unknown key {key!r}")
        try:
            entries[key] = _FIELD_PARSERS[key](value.strip())
        except ValueError as exc:
            parser.error(f"{path}:{lineno}: bad value for {key!r}: {exc}")
    return entries


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmpdescent",
        description="Maximum-principle descent for integer-valued optimal "
                    "control of the Poisson equation on the unit square.")
    parser.add_argument("--n", type=int, default=None,
                        help="mesh subdivisions per side (default 32)")
    parser.add_argument("--sweep", type=str, nargs="?", const=",".join(map(str, DEFAULT_SWEEP)),
                        default=None, metavar="N1,N2,...",
                        help="run a mesh sweep; with no value: "
                             f"{','.join(map(str, DEFAULT_SWEEP))} (larger meshes such as "
                             "1024 must be requested explicitly)")
    parser.add_argument("--alpha", type=float, default=None,
                        help="quadratic control cost weight (default 0.01)")
    parser.add_argument("--beta", type=float, default=None,
                        help="backtracking ratio in (0,1) (default 0.01)")
    parser.add_argument("--sigma", type=float, default=None,
                        help="Armijo parameter in (0,1) (default 0.1)")
    parser.add_argument("--b", type=int, default=None,
                        help="control box bound (default 10)")
    parser.add_argument("--delta-tol", type=float, default=None,
                        help="residual termination tolerance (default 1e-12)")
    parser.add_argument("--max-outer", type=int, default=None,
                        help="maximum outer iterations (default 100)")
    parser.add_argument("--solver-tol", type=float, default=None,
                        help="relative CG tolerance (default 1e-12)")
    parser.add_argument("--mode", choices=MODES, default=None,
                        help="descent mode (default pmp-armijo)")
    parser.add_argument("--integrand", choices=INTEGRANDS, default=None,
                        help="control cost integrand (default integer-quadratic)")
    parser.add_argument("--out-dir", type=str, default=None,
                        help="directory for artifacts (default current directory)")
    parser.add_argument("--dump-control", action="store_const", const=True, default=None,
                        help="write the final control field to control.txt")
    parser.add_argument("--dump-fields", action="store_const", const=True, default=None,
                        help="write the final state and adjoint to state.txt/adjoint.txt")
    parser.add_argument("--config", type=str, default=None, metavar="FILE",
                        help="flat key=value config file; flags take precedence")
    return parser


def _validate(cfg: RunConfig, parser: argparse.ArgumentParser) -> None:
    if cfg.n < 1:
        parser.error(f"n must be >= 1, got {cfg.n}")
    if cfg.sweep is not None and any(n < 1 for n in cfg.sweep):
        parser.error(f"sweep entries must be >= 1, got {cfg.sweep}")
    if cfg.alpha <= 0.0:
        parser.error(f"alpha must be positive, got {cfg.alpha}")
    if not 0.0 < cfg.beta < 1.0:
        parser.error(f"beta must lie strictly inside (0, 1), got {cfg.beta}")
    if not 0.0 < cfg.sigma < 1.0:
        parser.error(f"sigma must lie strictly inside (0, 1), got {cfg.sigma}")
    if cfg.b < 1:
        parser.error(f"b must be >= 1, got {cfg.b}")
    if cfg.delta_tol < 0.0:
        parser.error(f"delta-tol must be nonnegative, got {cfg.delta_tol}")
    if cfg.max_outer < 1:
        parser.error(f"max-outer must be >= 1, got {cfg.max_outer}")
    if cfg.solver_tol <= 0.0:
        parser.error(f"solver-tol must be positive, got {cfg.solver_tol}")
    if cfg.mode not in MODES:
        parser.error(f"unknown mode {cfg.mode!r}")
    if cfg.integrand not in INTEGRANDS:
        parser.error(f"unknown integrand {cfg.integrand!r}")
    if cfg.target not in TARGETS:
        parser.error(f"unknown target {cfg.target!r} (choose from {sorted(TARGETS)})")


def parse_config(argv: list[str] | None = None) -> RunConfig:
    """Resolve defaults, config file, and flags (flags win); exits 2 on bad input."""
    parser = _build_parser()
    args = parser.parse_args(argv)

    values = {}
    if args.config is not None:
        values.update(_load_config_file(Path(args.config), parser))
    for name in _FIELD_PARSERS:
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            values[name] = _parse_sweep(flag_value) if name == "sweep" else flag_value
    cfg = replace(RunConfig(), **values)
    _validate(cfg, parser)
    return cfg


def _make_integrand(cfg: RunConfig) -> CostIntegrand:
    if cfg.integrand == "integer-quadratic":
        return IntegerQuadratic(cfg.alpha, cfg.b)
    return PureQuadratic(cfg.alpha, float(cfg.b))


def _algorithm_config(cfg: RunConfig) -> AlgorithmConfig:
    return AlgorithmConfig(beta=cfg.beta, sigma=cfg.sigma, delta_tol=cfg.delta_tol,
                           max_outer=cfg.max_outer, solver_rel_tol=cfg.solver_tol,
                           mode=cfg.mode)


def _execute(cfg: RunConfig, n: int) -> tuple[Problem, RunHistory]:
    problem = Problem.build(n, _make_integrand(cfg), TARGETS[cfg.target],
                            solver_rel_tol=cfg.solver_tol)
    return problem, run(problem, _algorithm_config(cfg))


def _fmt(x: float) -> str:
    """17 significant digits: parses back to the exact same float."""
    return format(float(x), ".17g")


def write_iteration_log(path: Path, records: list[IterationRecord]) -> None:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(",".join([
            str(r.k), _fmt(r.J), _fmt(r.rho_l1), _fmt(r.t_k),
            _fmt(r.set_measure), str(r.changed_cells), str(r.inner_trials),
        ]))
    path.write_text("\n".join(lines) + "\n")


def read_iteration_log(path: Path) -> list[IterationRecord]:
    """Inverse of ``write_iteration_log`` (selected_phi_sum is not serialized)."""
    lines = path.read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: unexpected iteration log header")
    records = []
    for line in lines[1:]:
        k, j, rho_l1, t_k, measure, changed, trials = line.split(",")
        records.append(IterationRecord(
            k=int(k), J=float(j), rho=-float(rho_l1), t_k=float(t_k),
            set_measure=float(measure), changed_cells=int(changed),
            inner_trials=int(trials)))
    return records


def _write_summary(path: Path, problem: Problem, history: RunHistory) -> dict:
    final = history.records[-1]
    summary = {
        "n": problem.mesh.n,
        "h": problem.mesh.h,
        "final_J": final.J,
        "final_rho_l1": final.rho_l1,
        "iterations": history.accepted_steps,
        "termination": history.termination,
    }
    path.write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def _dump_cellwise(path: Path, mesh, values) -> None:
    lines = [f"n={mesh.n} cells={mesh.num_cells}"]
    lines.extend(f"{i},{_fmt(v)}" for i, v in enumerate(values))
    path.write_text("\n".join(lines) + "\n")


def _dump_vertexwise(path: Path, mesh, values) -> None:
    lines = [f"n={mesh.n} vertices={mesh.num_vertices}"]
    lines.extend(f"{i},{_fmt(v)}" for i, v in enumerate(values))
    path.write_text("\n".join(lines) + "\n")


def _write_run_artifacts(cfg: RunConfig, out_dir: Path,
                         problem: Problem, history: RunHistory) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_iteration_log(out_dir / "iterations.csv", history.records)
    summary = _write_summary(out_dir / "summary.json", problem, history)
    if cfg.dump_control:
        _dump_cellwise(out_dir / "control.txt", problem.mesh, history.control.values)
    if cfg.dump_fields:
        _dump_vertexwise(out_dir / "state.txt", problem.mesh, history.state.values)
        _dump_vertexwise(out_dir / "adjoint.txt", problem.mesh, history.adjoint.values)
    return summary


def run_single(cfg: RunConfig) -> int:
    """One mesh; writes artifacts into cfg.out_dir."""
    try:
        problem, history = _execute(cfg, cfg.n)
    except LinearSolverError as exc:
        print(f"numerical failure at n={cfg.n}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    summary = _write_run_artifacts(cfg, Path(cfg.out_dir), problem, history)
    print(f"n={summary['n']} h={summary['h']:.2e} J={summary['final_J']:.6g} "
          f"rho_l1={summary['final_rho_l1']:.2e} iterations={summary['iterations']} "
          f"termination={summary['termination']}")
    return EXIT_OK


def run_sweep(cfg: RunConfig) -> int:
    """One run per mesh in cfg.sweep; failures are recorded and the sweep continues."""
    out_root = Path(cfg.out_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    rows = []
    histories: dict[int, RunHistory] = {}
    failed = False
    for n in cfg.sweep:
        try:
            problem, history = _execute(cfg, n)
        except LinearSolverError as exc:
            print(f"numerical failure at n={n}: {exc}", file=sys.stderr)
            rows.append({"n": n, "h": 2.0 ** 0.5 / n, "error": str(exc)})
            failed = True
            continue
        sub = replace(cfg, n=n, sweep=None)
        summary = _write_run_artifacts(sub, out_root / f"n{n}", problem, history)
        rows.append(summary)
        histories[n] = history

    table = ["h,J,rho_l1,iterations"]
    for row in rows:
        if "error" in row:
            table.append(f"{row['h']:.2e},,,")
        else:
            table.append(f"{row['h']:.2e},{row['final_J']:.4g},"
                         f"{row['final_rho_l1']:.2e},{row['iterations']}")
    (out_root / "sweep.csv").write_text("\n".join(table) + "\n")

    # residual histories side by side, one column per mesh
    ns = [n for n in cfg.sweep if n in histories]
    depth = max((len(histories[n].records) for n in ns), default=0)
    hist_lines = ["k," + ",".join(f"rho_n{n}" for n in ns)]
    for k in range(depth):
        cells = [str(k)]
        for n in ns:
            recs = histories[n].records
            cells.append(_fmt(recs[k].rho_l1) if k < len(recs) else "")
        hist_lines.append(",".join(cells))
    (out_root / "rho_history.csv").write_text("\n".join(hist_lines) + "\n")

    for line in table:
        print(line)
    return EXIT_NUMERICAL if failed else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    cfg = parse_config(argv)
    if cfg.sweep is not None:
        return run_sweep(cfg)
    return run_single(cfg)
