"""P1 finite elements on unit-square meshes: state and adjoint solves, objective.

The state equation -lap(y) = u and the adjoint equation -lap(p) = y - y_d
are discretized with piecewise linear elements and homogeneous Dirichlet
conditions; the control u is piecewise constant per cell.  Boundary
conditions are imposed by eliminating boundary rows and columns, so the
stiffness matrix lives on interior vertices only and stays positive
definite.  All choices are made so the discrete objective, adjoint, and
cellwise pairing satisfy the objective-difference identity exactly (up to
linear-solver error), see ``descent.descent_identity_residual``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .integrand import CostIntegrand, InfeasibleControlError, feasible_values
from .linalg import SparseSymMatrix, cg_solve, spmv
from .mesh import Mesh

__all__ = [
    "NodalField",
    "ControlField",
    "InfeasibleControlError",
    "assemble_stiffness",
    "assemble_mass",
    "control_load",
    "solve_state",
    "solve_adjoint",
    "interpolate_target",
    "cell_average",
    "eval_objective",
]


@dataclass
class NodalField:
    """Piecewise-linear function given by one value per mesh vertex."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.mesh.num_vertices,):
            raise ValueError(
                f"expected {self.mesh.num_vertices} vertex values, "
                f"got shape {self.values.shape}")
        if not np.isfinite(self.values).all():
            raise ValueError("nodal field contains non-finite values")


@dataclass
class ControlField:
    """Piecewise-constant function given by one value per mesh cell."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.mesh.num_cells,):
            raise ValueError(
                f"expected {self.mesh.num_cells} cell values, "
                f"got shape {self.values.shape}")
        if not np.isfinite(self.values).all():
            raise ValueError("control field contains non-finite values")


def _require_same_mesh(a: Mesh, b: Mesh) -> None:
    if a is not b:
        raise ValueError("fields live on different meshes")


def _local_to_global(mesh: Mesh, local: np.ndarray) -> sp.csr_matrix:
    """Scatter per-cell 3x3 blocks into a vertex-by-vertex CSR matrix."""
    rows = np.repeat(mesh.cells, 3, axis=1).ravel()
    cols = np.tile(mesh.cells, (1, 3)).ravel()
    nv = mesh.num_vertices
    full = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(nv, nv))
    return full.tocsr()


def assemble_stiffness(mesh: Mesh) -> SparseSymMatrix:
    """Stiffness matrix of the Dirichlet Laplacian on interior vertices.

    P1 elements; boundary rows and columns are eliminated, which keeps
    the matrix symmetric positive definite without penalty terms.  On
    this mesh family the interior stencil is the classic five-point one
    (diagonal 4, four off-diagonal -1 entries).
    """
    pts = mesh.vertices[mesh.cells]
    x = pts[:, :, 0]
    y = pts[:, :, 1]
    # gradient coefficients of the barycentric basis: b_i = y_j - y_k, c_i = x_k - x_j
    b = y[:, [1, 2, 0]] - y[:, [2, 0, 1]]
    c = x[:, [2, 0, 1]] - x[:, [1, 2, 0]]
    two_area = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) \
        - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
    local = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) \
        / (2.0 * two_area)[:, None, None]
    full = _local_to_global(mesh, local)
    ii = mesh.interior
    return SparseSymMatrix.from_scipy(full[ii][:, ii])


def assemble_mass(mesh: Mesh) -> SparseSymMatrix:
    """Full (all-vertex) P1 mass matrix; entry sums per element equal the cell area."""
    local_block = np.array([[2.0, 1.0, 1.0],
                            [1.0, 2.0, 1.0],
                            [1.0, 1.0, 2.0]]) * (mesh.cell_area / 12.0)
    local = np.broadcast_to(local_block, (mesh.num_cells, 3, 3))
    return SparseSymMatrix.from_scipy(_local_to_global(mesh, local))


def control_load(mesh: Mesh, u: ControlField) -> np.ndarray:
    """Load vector of a piecewise-constant control against the P1 hat basis.

    Entry i is ``sum over cells T containing i of u_T |T| / 3``, the exact
    integral of u against the hat function of vertex i.  Returned on all
    vertices; solves restrict it to interior degrees of freedom.
    """
    _require_same_mesh(u.mesh, mesh)
    contrib = u.values * (mesh.cell_area / 3.0)
    out = np.zeros(mesh.num_vertices)
    np.add.at(out, mesh.cells.ravel(), np.repeat(contrib, 3))
    return out


def solve_state(stiffness: SparseSymMatrix, mesh: Mesh, u: ControlField,
                rel_tol: float = 1e-12, max_iter: int | None = None) -> NodalField:
    """Solve -lap(y) = u with zero boundary values."""
    b = control_load(mesh, u)[mesh.interior]
    sol = cg_solve(stiffness, b, rel_tol=rel_tol, max_iter=max_iter)
    values = np.zeros(mesh.num_vertices)
    values[mesh.interior] = sol.x
    return NodalField(mesh, values)


def solve_adjoint(stiffness: SparseSymMatrix, mass: SparseSymMatrix, mesh: Mesh,
                  y: NodalField, y_d: NodalField,
                  rel_tol: float = 1e-12, max_iter: int | None = None) -> NodalField:
    """Solve -lap(p) = y - y_d with zero boundary values.

    The right-hand side is the consistent one, ``M (y - y_d)`` restricted
    to interior vertices, which makes the discrete duality pairing exact.
    """
    _require_same_mesh(y.mesh, mesh)
    _require_same_mesh(y_d.mesh, mesh)
    rhs = spmv(mass, y.values - y_d.values)[mesh.interior]
    sol = cg_solve(stiffness, rhs, rel_tol=rel_tol, max_iter=max_iter)
    values = np.zeros(mesh.num_vertices)
    values[mesh.interior] = sol.x
    return NodalField(mesh, values)


def interpolate_target(mesh: Mesh, f: Callable) -> NodalField:
    """Vertex interpolation of ``f(x1, x2)``; boundary values are kept as-is."""
    x = mesh.vertices[:, 0]
    y = mesh.vertices[:, 1]
    values = np.asarray(f(x, y), dtype=np.float64)
    if values.shape != x.shape:
        values = np.broadcast_to(values, x.shape).copy()
    if not np.isfinite(values).all():
        raise ValueError("target function produced non-finite values")
    return NodalField(mesh, values)


def cell_average(mesh: Mesh, v: NodalField) -> np.ndarray:
    """Mean of the three vertex values per cell.

    Times the cell area this is the exact integral of the piecewise
    linear function over the cell.
    """
    _require_same_mesh(v.mesh, mesh)
    vv = v.values[mesh.cells]
    return (vv[:, 0] + vv[:, 1] + vv[:, 2]) / 3.0


def eval_objective(mass: SparseSymMatrix, y: NodalField, y_d: NodalField,
                   u: ControlField, g: CostIntegrand) -> float:
    """J = 0.5 (y - y_d)' M (y - y_d) + sum_T |T| g(u_T).

    Raises InfeasibleControlError when any cell value of u lies outside
    the effective domain of g.
    """
    _require_same_mesh(y.mesh, y_d.mesh)
    _require_same_mesh(y.mesh, u.mesh)
    g_vals = feasible_values(g, u.values)
    diff = y.values - y_d.values
    tracking = 0.5 * float(diff @ spmv(mass, diff))
    return tracking + u.mesh.cell_area * float(g_vals.sum())
