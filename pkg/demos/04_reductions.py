"""Other constraint pairs reduce to the size-and-cost form.

A raw budget becomes normalized costs; two arbitrary linear constraints
become a size constraint plus a cost constraint after rescaling the
regressors; a trace bound on the information matrix is a cost constraint.
"""
# %%
import numpy as np

from costdesign import (DesignInstance, SolverOptions,
                        general_two_constraint_to_canonical, normalize_costs,
                        solve_equality, solve_inequality,
                        trace_constraint_costs)

rng = np.random.default_rng(1)
F = rng.standard_normal((8, 2))

# %% At most N = 20 runs and 200 currency units; each run costs C.
C = rng.uniform(5.0, 30.0, 8)
c = normalize_costs(C, 20, 200.0)
rep = solve_inequality(DesignInstance(F, c))
print("budget problem:", rep.status.value)
print("  runs per point:", np.round(20 * rep.w, 2))
print(f"  money spent {np.dot(C, 20 * rep.w):.1f} of 200")

# %% Two general constraints c1 . w = 1 and c2 . w = 1.
c1 = rng.uniform(0.5, 2.0, 8)
c2 = c1 * np.where(np.arange(8) < 4, 1.5, 0.6)
inst, back = general_two_constraint_to_canonical(F, c1, c2)
w = back(solve_equality(inst, SolverOptions(target_eff=1 - 1e-8)).w)
print(f"\ntwo general constraints: c1.w = {c1 @ w:.9f}, c2.w = {c2 @ w:.9f}")

# %% tr(Sigma M(w)) <= v is linear in w.
costs = trace_constraint_costs(F, np.diag([1.0, 4.0]), 3.0)
rep = solve_inequality(DesignInstance(F, costs))
M = (F * rep.w[:, None]).T @ F
print(f"\ntrace constraint: {rep.status.value}, "
      f"tr(Sigma M) = {np.trace(np.diag([1.0, 4.0]) @ M):.6f} (bound 3)")
