"""One full descent run on the benchmark problem at n = 32.

Each outer iteration switches the control to the cellwise Hamiltonian
minimizer on a greedily chosen cell set, with the set measure tied to a
backtracked step size.  The residual |rho| measures how far the iterate
is from satisfying the pointwise maximum principle; it collapses by
orders of magnitude within a handful of iterations.
"""

import numpy as np

from pmpdescent import (AlgorithmConfig, IntegerQuadratic, Problem, run,
                        verify_pmp)

g = IntegerQuadratic(alpha=0.01, b=10)
problem = Problem.build(32, g)
history = run(problem, AlgorithmConfig(), keep_iterates=True)

print(f"{'k':>3} {'J':>12} {'|rho|':>12} {'t_k':>6} {'|B_k|':>9} {'switched':>9}")
for r in history.records:
    print(f"{r.k:3d} {r.J:12.6f} {r.rho_l1:12.3e} {r.t_k:6.2f} "
          f"{r.set_measure:9.5f} {r.changed_cells:9d}")
print(f"\ntermination: {history.termination} "
      f"after {history.accepted_steps} accepted steps")

u = history.control.values
print(f"final control: integers in [{u.min():.0f}, {u.max():.0f}], "
      f"{np.count_nonzero(u)} of {u.size} cells nonzero")
values, counts = np.unique(u, return_counts=True)
print("level histogram:", {int(v): int(c) for v, c in zip(values, counts)})

violation = verify_pmp(history.control, history.adjoint, g)
print(f"worst cellwise Hamiltonian gap at the final iterate: {violation:.3e}")
print("(zero would mean the discrete maximum principle holds exactly; a few")
print(" cells keep gaps below the single-cell switching threshold ~1e-5)")
