"""Maximum-principle descent for integer-valued optimal control of the Poisson equation."""

from .descent import (MODE_ARMIJO, MODE_FULL_STEP, TERMINATION_MAX_OUTER,
                      TERMINATION_MESH, TERMINATION_RESIDUAL, AcceptedStep,
                      AlgorithmConfig, CellSet, IterationRecord,
                      MeshResolutionReached, RunHistory, StepOutcome,
                      armijo_search, candidate_control, descent_identity_residual,
                      phi_cells, rho, run, select_set, step, verify_pmp)
from .fem import (ControlField, NodalField, assemble_mass, assemble_stiffness,
                  cell_average, control_load, eval_objective, interpolate_target,
                  solve_adjoint, solve_state)
from .integrand import (CostIntegrand, InfeasibleControlError, IntegerQuadratic,
                        PureQuadratic, argmin_bruteforce, feasible_values)
from .linalg import CGResult, LinearSolverError, SparseSymMatrix, cg_solve, spmv
from .mesh import Mesh, build_unit_square_mesh, cell_vertex_indices
from .problem import TARGETS, Problem, oscillating_target

__version__ = "0.1.0"

__all__ = [
    "AcceptedStep",
    "AlgorithmConfig",
    "CGResult",
    "CellSet",
    "ControlField",
    "CostIntegrand",
    "InfeasibleControlError",
    "IntegerQuadratic",
    "IterationRecord",
    "LinearSolverError",
    "Mesh",
    "MeshResolutionReached",
    "MODE_ARMIJO",
    "MODE_FULL_STEP",
    "NodalField",
    "Problem",
    "PureQuadratic",
    "RunHistory",
    "SparseSymMatrix",
    "StepOutcome",
    "TARGETS",
    "TERMINATION_MAX_OUTER",
    "TERMINATION_MESH",
    "TERMINATION_RESIDUAL",
    "argmin_bruteforce",
    "armijo_search",
    "assemble_mass",
    "assemble_stiffness",
    "build_unit_square_mesh",
    "candidate_control",
    "cell_average",
    "cell_vertex_indices",
    "cg_solve",
    "control_load",
    "descent_identity_residual",
    "eval_objective",
    "feasible_values",
    "interpolate_target",
    "oscillating_target",
    "phi_cells",
    "rho",
    "run",
    "select_set",
    "solve_adjoint",
    "solve_state",
    "spmv",
    "step",
    "verify_pmp",
]
