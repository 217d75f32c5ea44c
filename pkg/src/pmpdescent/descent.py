"""Outer descent loop driven by the pointwise maximum principle.

One iteration: solve the state and adjoint for the current control,
minimize the pointwise Hamiltonian cell by cell to get a candidate
control, then switch the control to the candidate on a greedily chosen
cell set.  The set measure is tied to a backtracked step size t, and a
step is accepted once the realized objective decrease passes an Armijo
test against the selected part of the descent integral.

The per-cell descent integrand is

    phi_T = |T| * [ H(utilde_T) - H(u_T) ],   H(v) = v * pbar_T + g(v),

with pbar_T the cell average of the adjoint.  Every phi_T <= 0 because
utilde is the cellwise Hamiltonian minimizer, so the residual
rho = sum phi_T is nonpositive and |rho| is the L1 residual of the
maximum principle; rho = 0 exactly at controls satisfying it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fem import ControlField, NodalField, cell_average
from .integrand import CostIntegrand, feasible_values
from .linalg import spmv
from .problem import Problem

__all__ = [
    "MODE_ARMIJO",
    "MODE_FULL_STEP",
    "TERMINATION_RESIDUAL",
    "TERMINATION_MESH",
    "TERMINATION_MAX_OUTER",
    "AlgorithmConfig",
    "CellSet",
    "IterationRecord",
    "RunHistory",
    "AcceptedStep",
    "MeshResolutionReached",
    "StepOutcome",
    "candidate_control",
    "phi_cells",
    "rho",
    "select_set",
    "armijo_search",
    "step",
    "run",
    "descent_identity_residual",
    "verify_pmp",
]

MODE_ARMIJO = "pmp-armijo"
MODE_FULL_STEP = "full-step"

TERMINATION_RESIDUAL = "residual_tol"
TERMINATION_MESH = "mesh_resolution"
TERMINATION_MAX_OUTER = "max_outer"


@dataclass(frozen=True)
class AlgorithmConfig:
    """Parameters of the descent loop.

    beta is the backtracking ratio and sigma the Armijo parameter, both
    strictly inside (0, 1).  The loop stops once |rho| <= delta_tol, once
    t |Omega| falls below one cell, or after max_outer accepted steps.
    solver_rel_tol records the CG tolerance the run is meant to use; the
    loop solves through the Problem, so pass the same value to
    Problem.build (the command line wires both from one flag).
    """

    beta: float = 0.01
    sigma: float = 0.1
    delta_tol: float = 1e-12
    max_outer: int = 100
    solver_rel_tol: float = 1e-12
    mode: str = MODE_ARMIJO

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie strictly inside (0, 1)")
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must lie strictly inside (0, 1)")
        if self.delta_tol < 0.0:
            raise ValueError("delta_tol must be nonnegative")
        if self.max_outer < 1:
            raise ValueError("max_outer must be a positive integer")
        if self.solver_rel_tol <= 0.0:
            raise ValueError("solver_rel_tol must be positive")
        if self.mode not in (MODE_ARMIJO, MODE_FULL_STEP):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class CellSet:
    """Sorted distinct cell indices together with their total area."""

    indices: np.ndarray
    total_area: float

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        object.__setattr__(self, "indices", idx)

    @property
    def count(self) -> int:
        return int(self.indices.size)


@dataclass
class IterationRecord:
    """State of one outer iteration.

    J and rho describe iterate k; t_k, set_measure, changed_cells and
    selected_phi_sum describe the accepted step k -> k+1.  A terminal
    record (no step taken) carries t_k = 0.
    """

    k: int
    J: float
    rho: float
    t_k: float
    set_measure: float
    changed_cells: int
    inner_trials: int
    selected_phi_sum: float = 0.0

    @property
    def rho_l1(self) -> float:
        """L1 residual |rho| (rho is nonpositive by construction)."""
        return abs(self.rho)


@dataclass
class RunHistory:
    """Iteration records plus the final control, state, and adjoint."""

    records: list[IterationRecord]
    control: ControlField
    state: NodalField
    adjoint: NodalField
    termination: str
    iterates: list[ControlField] | None = None

    @property
    def accepted_steps(self) -> int:
        return sum(1 for r in self.records if r.t_k > 0.0)


def candidate_control(p: NodalField, g: CostIntegrand) -> ControlField:
    """Cellwise Hamiltonian minimizer for the cell-averaged adjoint."""
    pbar = cell_average(p.mesh, p)
    v, _ = g.hamiltonian_argmin_many(pbar)
    return ControlField(p.mesh, v)


def phi_cells(u: ControlField, utilde: ControlField, p: NodalField,
              g: CostIntegrand) -> np.ndarray:
    """Per-cell descent integrand phi_T (see module docstring).

    Every entry is <= 0 when utilde is the cellwise argmin; raises
    InfeasibleControlError when u takes a value outside dom g.
    """
    mesh = u.mesh
    if utilde.mesh is not mesh or p.mesh is not mesh:
        raise ValueError("fields live on different meshes")
    pbar = cell_average(mesh, p)
    h_old = u.values * pbar + feasible_values(g, u.values)
    h_new = utilde.values * pbar + feasible_values(g, utilde.values)
    return mesh.cell_area * (h_new - h_old)


def rho(phi: np.ndarray) -> float:
    """Total descent integral; |rho| is the L1 residual of the maximum principle."""
    return float(np.asarray(phi).sum())


def select_set(phi: np.ndarray, t: float, mesh) -> CellSet | None:
    """Greedy update set for step size t.

    Cells are ranked by phi ascending (ties by lower index); strictly
    negative cells are taken while the total area stays within
    t * |Omega|.  The set is admissible only if it also captures at
    least the t-fraction of the total integral,
    ``sum_B phi <= t * sum phi``.  Returns None when no admissible
    nonempty set exists at this t; the caller then shrinks t.

    ``mesh`` only needs ``cell_area`` and ``domain_area`` attributes.
    """
    phi = np.asarray(phi, dtype=np.float64)
    if not 0.0 < t <= 1.0:
        raise ValueError("t must lie in (0, 1]")
    total = float(phi.sum())
    if not total < 0.0:
        raise ValueError("select_set requires a strictly negative total descent integral")
    # 1e-9 absorbs representation error when t * |Omega| / |T| is integral
    max_cells = int(t * mesh.domain_area / mesh.cell_area + 1e-9)
    count = min(max_cells, int(np.count_nonzero(phi < 0.0)))
    if count == 0:
        return None
    order = np.argsort(phi, kind="stable")
    chosen = np.sort(order[:count])
    # summing in index order makes the t = 1 case compare exactly equal
    chosen_sum = float(phi[chosen].sum())
    if chosen_sum <= t * total:
        return CellSet(chosen, count * mesh.cell_area)
    return None


@dataclass(frozen=True)
class AcceptedStep:
    """Outcome of a successful line search."""

    t: float
    cells: CellSet
    control: ControlField
    state: NodalField
    objective: float
    selected_phi_sum: float
    trials: int


@dataclass(frozen=True)
class MeshResolutionReached:
    """The backtracked t |Omega| fell below one cell before acceptance."""

    trials: int


def _switch(u: ControlField, utilde: ControlField, indices: np.ndarray) -> ControlField:
    values = u.values.copy()
    values[indices] = utilde.values[indices]
    return ControlField(u.mesh, values)


def armijo_search(problem: Problem, u: ControlField, y: NodalField,
                  utilde: ControlField, phi: np.ndarray,
                  config: AlgorithmConfig) -> AcceptedStep | MeshResolutionReached:
    """Backtracking search over t in {1, beta, beta^2, ...}.

    For each t with an admissible greedy set the control is switched to
    the candidate on that set, the state is re-solved, and the first t
    with ``J(u_t) - J(u) <= sigma * sum_B phi`` is accepted.  Stops with
    MeshResolutionReached once t |Omega| drops below one cell, since no
    nonempty set can satisfy the measure bound from then on.
    """
    mesh = u.mesh
    j_current = problem.objective(y, u)
    t = 1.0
    trials = 0
    while t * mesh.domain_area >= mesh.cell_area:
        trials += 1
        cells = select_set(phi, t, mesh)
        if cells is not None:
            trial = _switch(u, utilde, cells.indices)
            y_t = problem.solve_state(trial)
            j_t = problem.objective(y_t, trial)
            selected = float(phi[cells.indices].sum())
            if j_t - j_current <= config.sigma * selected:
                return AcceptedStep(t, cells, trial, y_t, j_t, selected, trials)
        t = config.beta * t
    return MeshResolutionReached(trials)


@dataclass
class StepOutcome:
    """Result of one outer iteration."""

    record: IterationRecord
    control: ControlField | None
    state: NodalField | None
    adjoint: NodalField
    terminated: str | None


def step(problem: Problem, u: ControlField, config: AlgorithmConfig,
         k: int = 0, state: NodalField | None = None) -> StepOutcome:
    """One outer iteration at iterate u.

    Solves state and adjoint, forms the candidate control and the
    residual, then either terminates (residual within tolerance, or no
    admissible step at mesh resolution) or returns the updated control.
    ``state`` may carry the already-solved state of u.
    """
    y = state if state is not None else problem.solve_state(u)
    p = problem.solve_adjoint(y)
    j = problem.objective(y, u)
    utilde = candidate_control(p, problem.integrand)
    phi = phi_cells(u, utilde, p, problem.integrand)
    residual = rho(phi)

    if abs(residual) <= config.delta_tol:
        record = IterationRecord(k, j, residual, 0.0, 0.0, 0, 0)
        return StepOutcome(record, None, None, p, TERMINATION_RESIDUAL)

    if config.mode == MODE_FULL_STEP:
        idx = np.flatnonzero(phi < 0.0)
        u_new = _switch(u, utilde, idx)
        y_new = problem.solve_state(u_new)
        record = IterationRecord(k, j, residual, 1.0,
                                 idx.size * u.mesh.cell_area, int(idx.size), 1,
                                 float(phi[idx].sum()))
        return StepOutcome(record, u_new, y_new, p, None)

    result = armijo_search(problem, u, y, utilde, phi, config)
    if isinstance(result, MeshResolutionReached):
        record = IterationRecord(k, j, residual, 0.0, 0.0, 0, result.trials)
        return StepOutcome(record, None, None, p, TERMINATION_MESH)
    changed = int(np.count_nonzero(
        u.values[result.cells.indices] != result.control.values[result.cells.indices]))
    record = IterationRecord(k, j, residual, result.t, result.cells.total_area,
                             changed, result.trials, result.selected_phi_sum)
    return StepOutcome(record, result.control, result.state, p, None)


def run(problem: Problem, config: AlgorithmConfig,
        u0: ControlField | None = None, keep_iterates: bool = False) -> RunHistory:
    """Run the descent loop from u0 (default: the zero control).

    The returned history always ends in a terminal record (t_k = 0)
    carrying the objective and residual of the final iterate, whatever
    the termination reason.
    """
    mesh = problem.mesh
    if u0 is None:
        u0 = problem.zero_control()
    feasible_values(problem.integrand, u0.values)

    u = u0
    y = problem.solve_state(u)
    records: list[IterationRecord] = []
    iterates: list[ControlField] | None = [u] if keep_iterates else None

    for k in range(config.max_outer):
        outcome = step(problem, u, config, k=k, state=y)
        records.append(outcome.record)
        if outcome.terminated is not None:
            return RunHistory(records, u, y, outcome.adjoint, outcome.terminated, iterates)
        u, y = outcome.control, outcome.state
        if keep_iterates:
            iterates.append(u)

    # iteration budget exhausted: evaluate the final iterate for the log
    p = problem.solve_adjoint(y)
    j = problem.objective(y, u)
    utilde = candidate_control(p, problem.integrand)
    phi = phi_cells(u, utilde, p, problem.integrand)
    records.append(IterationRecord(config.max_outer, j, rho(phi), 0.0, 0.0, 0, 0))
    return RunHistory(records, u, y, p, TERMINATION_MAX_OUTER, iterates)


def descent_identity_residual(problem: Problem, u: ControlField,
                              utilde: ControlField, cells: CellSet) -> float:
    """Gap in the exact objective-difference identity for a cellwise switch.

    Switching u to utilde on the set B changes the objective by exactly

        sum_{T in B} phi_T + 0.5 * ||y_B - y||^2   (mass-matrix norm)

    in the discrete setting; the returned absolute gap is zero up to
    linear-solver error.  This is the backbone identity the Armijo test
    and the residual rely on.
    """
    y = problem.solve_state(u)
    p = problem.solve_adjoint(y)
    phi = phi_cells(u, utilde, p, problem.integrand)
    u_b = _switch(u, utilde, cells.indices)
    y_b = problem.solve_state(u_b)
    dy = y_b.values - y.values
    quadratic = 0.5 * float(dy @ spmv(problem.mass, dy))
    j0 = problem.objective(y, u)
    j1 = problem.objective(y_b, u_b)
    predicted = float(phi[cells.indices].sum()) + quadratic
    return abs((j1 - j0) - predicted)


def verify_pmp(u: ControlField, p: NodalField, g: CostIntegrand) -> float:
    """Worst-case cellwise violation of the discrete maximum principle.

    For each cell, compares the Hamiltonian at the current control value
    against the attainable minimum; the maximum gap is nonnegative and
    equals zero exactly when u is a cellwise Hamiltonian minimizer of p.
    """
    pbar = cell_average(u.mesh, p)
    _, m = g.hamiltonian_argmin_many(pbar)
    h_u = u.values * pbar + feasible_values(g, u.values)
    if h_u.size == 0:
        return 0.0
    return float(np.max(h_u - m))
