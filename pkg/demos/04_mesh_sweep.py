"""Mesh sweep: iteration counts stay nearly flat while the mesh refines.

Writes the same artifacts the command line produces (per-run iteration
logs, a summary table, side-by-side residual histories) into ./sweep_out.
The residual-history CSV is the data behind a convergence plot; feed it
to any plotting tool.
"""

from pathlib import Path

from pmpdescent.cli import main

out = Path("sweep_out")
code = main(["--sweep", "16,32,64", "--out-dir", str(out), "--dump-control"])
assert code == 0

print("\nartifacts:")
for path in sorted(out.rglob("*")):
    if path.is_file():
        print(" ", path)

print("\nresidual histories (columns per mesh):")
print((out / "rho_history.csv").read_text())
