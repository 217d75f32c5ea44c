"""The pointwise Hamiltonian and its cellwise minimizer.

For the integer-lattice quadratic cost, minimizing v * pbar + g(v) over the
feasible values has a closed form: round -pbar/alpha to the lattice and
clamp to the box.  The brute-force enumeration is the oracle the closed
form is checked against, including exact ties.
"""

import numpy as np

from pmpdescent import (IntegerQuadratic, Problem, argmin_bruteforce,
                        candidate_control, cell_average)

g = IntegerQuadratic(alpha=0.01, b=10)

print("g samples:", {v: g.eval(v) for v in (0.0, 3.0, 0.5, 11.0)})
print()

print(f"{'pbar':>8} {'argmin v':>9} {'minimum':>10}")
for pbar in (0.0, -0.035, -0.05, -0.5, 0.25, 1.0):
    v, m = g.hamiltonian_argmin(pbar)
    bv, bm = argmin_bruteforce(g, pbar)
    assert (v, m) == (bv, bm)
    print(f"{pbar:8.3f} {v:9.0f} {m:10.4f}")
print()

# pbar = -0.035 is the switch point between 3 and 4: both attain the same
# Hamiltonian and the tie rule prefers the smaller magnitude
print("tie at pbar=-0.035:",
      "H(3) =", g.hamiltonian(3.0, -0.035),
      "H(4) =", g.hamiltonian(4.0, -0.035),
      "-> chooses", g.hamiltonian_argmin(-0.035)[0])
print()

# cellwise candidate control driven by the adjoint of the zero control
problem = Problem.build(16, g)
u0 = problem.zero_control()
p = problem.solve_adjoint(problem.solve_state(u0))
utilde = candidate_control(p, g)
pbar = cell_average(problem.mesh, p)
print("adjoint cell averages span "
      f"[{pbar.min():.4f}, {pbar.max():.4f}]")
values, counts = np.unique(utilde.values, return_counts=True)
print("candidate control histogram (value: cells):")
print({int(v): int(c) for v, c in zip(values, counts)})
