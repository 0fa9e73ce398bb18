"""Quadratic regression on a 101 x 101 grid with a tilted cost surface.

Costs grow as 0.1 + 6 r1 + r2, so most of the square is expensive and only
a thin strip is cheap.  The run stops at efficiency 0.9999 and keeps the
design whenever the certified bound passes 0.99, 0.999 and 0.9999; points
removed by the deletion rule are flagged.  Writes ``quad_points.csv``
(milestone, r1, r2, weight, deleted) into the current directory for
plotting elsewhere.  Takes about half a minute.
"""
# %%
import csv

import numpy as np

from costdesign import (SolverOptions, partition, quadratic_grid_coordinates,
                        quadratic_grid_instance, solve_equality)

inst = quadratic_grid_instance(101)
part = partition(inst)
print(f"{inst.n} points: {part.n_plus} expensive, {part.n_minus} cheap, "
      f"{part.n_zero} at unit cost")

# %%
levels = (0.99, 0.999, 0.9999)
rep = solve_equality(inst, SolverOptions(target_eff=0.9999, milestones=levels))
for snap in rep.snapshots:
    print(f"eff >= {snap.level}: iteration {snap.iteration:5d}, "
          f"{snap.active:5d} points still active, {snap.elapsed:5.1f} s")

# %% Where does the final design put its weight?
r1, r2 = quadratic_grid_coordinates(101)
heavy = np.argsort(rep.w)[::-1][:8]
print("\nlargest weights (r1, r2, cost, w):")
for k in heavy:
    print(f"  ({r1[k]:.2f}, {r2[k]:.2f})  {inst.costs[k]:.2f}  {rep.w[k]:.4f}")

# %%
with open("quad_points.csv", "w", newline="") as fh:
    out = csv.writer(fh)
    out.writerow(["milestone", "r1", "r2", "weight", "deleted"])
    for snap in rep.snapshots:
        for k in range(inst.n):
            out.writerow([snap.level, r1[k], r2[k], snap.w[k],
                          int(not snap.active_mask[k])])
print("\nwrote quad_points.csv")
