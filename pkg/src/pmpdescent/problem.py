"""Bundled discrete control problem: mesh, operators, target, integrand."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fem import (ControlField, NodalField, assemble_mass, assemble_stiffness,
                  eval_objective, interpolate_target, solve_adjoint, solve_state)
from .integrand import CostIntegrand
from .linalg import SparseSymMatrix
from .mesh import Mesh, build_unit_square_mesh

__all__ = ["Problem", "TARGETS", "oscillating_target", "zero_target", "sine_product_target"]


def oscillating_target(x1, x2):
    """Benchmark tracking target 10 x1 sin(5 x1) cos(7 x2)."""
    return 10.0 * x1 * np.sin(5.0 * x1) * np.cos(7.0 * x2)


def zero_target(x1, x2):
    return np.zeros_like(x1)


def sine_product_target(x1, x2):
    return np.sin(np.pi * x1) * np.sin(np.pi * x2)


TARGETS: dict[str, Callable] = {
    "default": oscillating_target,
    "zero": zero_target,
    "sine": sine_product_target,
}


@dataclass
class Problem:
    """Discretized tracking problem with cached operators.

    Assembling the stiffness and mass matrices once and reusing them for
    every state, adjoint, and objective evaluation keeps repeated solves
    (line-search trials in particular) cheap and bitwise reproducible.
    """

    mesh: Mesh
    stiffness: SparseSymMatrix
    mass: SparseSymMatrix
    target: NodalField
    integrand: CostIntegrand
    solver_rel_tol: float = 1e-12

    @classmethod
    def build(cls, n: int, integrand: CostIntegrand,
              target: Callable = oscillating_target,
              solver_rel_tol: float = 1e-12) -> "Problem":
        mesh = build_unit_square_mesh(n)
        return cls(
            mesh=mesh,
            stiffness=assemble_stiffness(mesh),
            mass=assemble_mass(mesh),
            target=interpolate_target(mesh, target),
            integrand=integrand,
            solver_rel_tol=solver_rel_tol,
        )

    def zero_control(self) -> ControlField:
        return ControlField(self.mesh, np.zeros(self.mesh.num_cells))

    def solve_state(self, u: ControlField) -> NodalField:
        return solve_state(self.stiffness, self.mesh, u, rel_tol=self.solver_rel_tol)

    def solve_adjoint(self, y: NodalField) -> NodalField:
        return solve_adjoint(self.stiffness, self.mass, self.mesh, y, self.target,
                             rel_tol=self.solver_rel_tol)

    def objective(self, y: NodalField, u: ControlField) -> float:
        return eval_objective(self.mass, y, self.target, u, self.integrand)
