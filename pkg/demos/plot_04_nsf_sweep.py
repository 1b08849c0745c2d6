"""
Failure-probability sweep on NSFNET overlays
============================================

Sweep a uniform failure probability from 15% down to 0 on both bundled NSF
overlays and compare the optimal mapping with the best single tree.
"""

import sys

from xsurv import load_bundled
from xsurv.experiments import rho_grid, run_sweep, write_csv

grid = rho_grid(0.15, 0.0, 0.005)
print(f"{len(grid)} grid points")

for name in ("nsf-ln1", "nsf-ln2"):
    inst, _ = load_bundled(name)
    rows = run_sweep(inst, grid, mode="uniform")
    print(f"\n{name}: {len(inst.logical.links)} logical links")
    print(" rho    base    tree   ratio  unprotected")
    for r in rows[::5]:
        print(f" {r.rho_or_mean:.3f}  {r.base_phi:.4f}  {r.maxtree_phi:.4f}  {r.ratio:.3f}"
              f"  {r.num_unprotected}")

# Random failure probabilities: five replicates per mean plus their average.
inst, _ = load_bundled("nsf-ln2")
rows = run_sweep(inst, [0.15, 0.1, 0.05], mode="random", sd=0.02, replicates=5, seed=0)
print("\nrandom sweep on nsf-ln2 as CSV:")
write_csv(rows, sys.stdout)
