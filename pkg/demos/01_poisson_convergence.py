"""State-equation basics: build a mesh, solve, and watch second-order convergence.

The state solver takes a piecewise-constant source per triangle and returns
the piecewise-linear solution with zero boundary values.  Against the
manufactured solution sin(pi x1) sin(pi x2) the L2 error should shrink by
a factor of about four per mesh halving.
"""

import numpy as np

from pmpdescent import (ControlField, Problem, IntegerQuadratic,
                        build_unit_square_mesh)

# a quick look at the mesh family
for n in (1, 4, 32):
    mesh = build_unit_square_mesh(n)
    print(f"n={n:3d}: {mesh.num_vertices:5d} vertices, {mesh.num_cells:5d} cells, "
          f"h={mesh.h:.3e}, cell area {mesh.cell_area:.3e}")
print()

exact = lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y)
source = lambda x, y: 2.0 * np.pi**2 * exact(x, y)

print("manufactured-solution convergence (errors measured at the vertices):")
print(f"{'n':>5} {'max vertex error':>18} {'ratio':>7}")
previous = None
for n in (8, 16, 32, 64):
    problem = Problem.build(n, IntegerQuadratic(0.01, 10))
    mesh = problem.mesh
    centroids = mesh.cell_centroids()
    u = ControlField(mesh, source(centroids[:, 0], centroids[:, 1]))
    y = problem.solve_state(u)
    error = np.max(np.abs(y.values - exact(mesh.vertices[:, 0], mesh.vertices[:, 1])))
    ratio = "" if previous is None else f"{previous / error:7.2f}"
    print(f"{n:5d} {error:18.6e} {ratio:>7}")
    previous = error
print("\nratios near 4 confirm the expected O(h^2) accuracy.")
