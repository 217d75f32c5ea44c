"""Uniform right-triangle meshes of the unit square (0,1)^2."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Mesh", "build_unit_square_mesh", "cell_vertex_indices"]


@dataclass(frozen=True)
class Mesh:
    """Structured triangulation of the unit square.

    The square is cut into ``n x n`` grid squares, each split along its
    lower-left to upper-right diagonal into two triangles.  Squares are
    enumerated row by row (y outer, x inner) and the lower triangle of a
    square always precedes the upper one, so the cell ordering is fully
    deterministic.

    Attributes
    ----------
    n : int
        Subdivisions per side.
    vertices : ndarray, shape (num_vertices, 2)
        Vertex coordinates; vertex ``iy * (n + 1) + ix`` sits at
        ``(ix / n, iy / n)``.
    cells : ndarray, shape (num_cells, 3)
        Vertex indices of each triangle, counterclockwise.
    cell_area : float
        Area of any cell, ``1 / (2 n^2)`` (all cells are congruent).
    boundary_mask : ndarray of bool
        True exactly for vertices with a coordinate in {0, 1}.
    h : float
        Mesh size ``sqrt(2) / n`` (length of the longest edge).
    interior : ndarray
        Indices of the non-boundary vertices, ascending.
    """

    n: int
    vertices: np.ndarray
    cells: np.ndarray
    cell_area: float
    boundary_mask: np.ndarray
    h: float
    interior: np.ndarray

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def domain_area(self) -> float:
        return 1.0

    def cell_centroids(self) -> np.ndarray:
        """Barycenters of all cells, shape (num_cells, 2)."""
        return self.vertices[self.cells].mean(axis=1)


def build_unit_square_mesh(n: int) -> Mesh:
    """Triangulate (0,1)^2 into ``2 n^2`` congruent right triangles.

    Deterministic: identical ``n`` always yields identical meshes.
    Rejects ``n < 1``.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)

    side = np.linspace(0.0, 1.0, n + 1)
    xs, ys = np.meshgrid(side, side, indexing="xy")
    vertices = np.column_stack([xs.ravel(), ys.ravel()])

    ix, iy = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    v00 = (iy * (n + 1) + ix).ravel()
    v10 = v00 + 1
    v01 = v00 + (n + 1)
    v11 = v01 + 1
    cells = np.empty((2 * n * n, 3), dtype=np.int64)
    cells[0::2] = np.column_stack([v00, v10, v11])  # lower triangle
    cells[1::2] = np.column_stack([v00, v11, v01])  # upper triangle

    boundary = ((xs == 0.0) | (xs == 1.0) | (ys == 0.0) | (ys == 1.0)).ravel()
    interior = np.flatnonzero(~boundary)

    for arr in (vertices, cells, boundary, interior):
        arr.setflags(write=False)

    return Mesh(
        n=n,
        vertices=vertices,
        cells=cells,
        cell_area=1.0 / (2 * n * n),
        boundary_mask=boundary,
        h=math.sqrt(2.0) / n,
        interior=interior,
    )


def cell_vertex_indices(mesh: Mesh, c: int) -> tuple[int, int, int]:
    """Vertex-index triple of cell ``c``; raises IndexError when out of range."""
    if not 0 <= c < mesh.num_cells:
        raise IndexError(f"cell index {c} out of range [0, {mesh.num_cells})")
    i, j, k = mesh.cells[c]
    return int(i), int(j), int(k)
