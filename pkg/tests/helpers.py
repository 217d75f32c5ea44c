"""Shared test oracles: quadrature-based L2 errors and small problem builders."""

import numpy as np

from pmpdescent import ControlField

# Degree-4 quadrature on the triangle (6 points, barycentric, weights sum to 1).
TRI_BARY = np.array([
    [0.816847572980459, 0.091576213509771, 0.091576213509771],
    [0.091576213509771, 0.816847572980459, 0.091576213509771],
    [0.091576213509771, 0.091576213509771, 0.816847572980459],
    [0.108103018168070, 0.445948490915965, 0.445948490915965],
    [0.445948490915965, 0.108103018168070, 0.445948490915965],
    [0.445948490915965, 0.445948490915965, 0.108103018168070],
])
TRI_WTS = np.array([0.109951743655322] * 3 + [0.223381589678011] * 3)


def l2_error(mesh, nodal_values, exact):
    """L2 distance between a P1 function and a smooth exact one.

    Independent of the assembled mass matrix: integrates the squared
    difference cell by cell with a degree-4 rule.
    """
    pts = mesh.vertices[mesh.cells]
    vals = nodal_values[mesh.cells]
    total = 0.0
    for lam, w in zip(TRI_BARY, TRI_WTS):
        x = np.einsum("q,cqi->ci", lam, pts)
        diff = vals @ lam - exact(x[:, 0], x[:, 1])
        total += w * np.sum(diff * diff)
    return float(np.sqrt(total * mesh.cell_area))


def centroid_control(mesh, f) -> ControlField:
    """Piecewise-constant control sampling f at cell centroids."""
    c = mesh.cell_centroids()
    return ControlField(mesh, np.asarray(f(c[:, 0], c[:, 1]), dtype=float))


def random_integer_control(mesh, rng, bound=10) -> ControlField:
    return ControlField(mesh, rng.integers(-bound, bound + 1, mesh.num_cells).astype(float))


def dense_from(matrix) -> np.ndarray:
    return matrix.to_scipy().toarray()
