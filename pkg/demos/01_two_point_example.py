"""Two regression points, two constraints, three kinds of optimum.

f(1) = (1, 0) and f(2) = (1, 1), so det M(w) = w1 * w2.  Depending on the
costs the best design spends the whole size, the whole budget, or both.
Run with ``python3 demos/01_two_point_example.py``.
"""
# %%
import numpy as np

from costdesign import DesignInstance, SolverOptions, solve_inequality
from costdesign.oracle import example1_solution

F = np.array([[1.0, 0.0], [1.0, 1.0]])

# %% Cheap points: the size limit binds and the budget is left over.
# Expensive points: only the budget binds.  In between both bind.
for c in [(0.8, 1.0), (2.0, 2.0), (0.5, 1.8)]:
    rep = solve_inequality(DesignInstance(F, c))
    w = rep.w
    print(f"c = {c}: w = {np.round(w, 6)}  via {rep.status.value:13s} "
          f"size {w.sum():.4f}  cost {np.dot(c, w):.4f}  phi {rep.phi:.5f}")
    print(f"{'':14s}closed form {np.round(example1_solution(*c), 6)}")

# %% A coarse map of which constraint binds over the cost square.
grid = np.linspace(0.1, 1.9, 10)
symbol = {"ShortcutSize": "s", "ShortcutCost": "c", "Converged": "b"}
opts = SolverOptions(target_eff=1 - 1e-10)
print("\nbinding constraint (s = size, c = cost, b = both); rows c1, columns c2")
for c1 in grid:
    row = "".join(symbol[solve_inequality(DesignInstance(F, [c1, c2]),
                                          opts).status.value]
                  for c2 in grid)
    print(f"c1 = {c1:.1f}  {row}")
