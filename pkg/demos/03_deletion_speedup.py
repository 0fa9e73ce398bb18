"""How much does discarding redundant points save?

Random problems with 600 candidate points and 4 parameters, solved to
efficiency 0.99999 with the deletion rule applied every l iterations, or
never.  The iteration counts barely move; the time per iteration drops as
the active set shrinks.
"""
# %%
import statistics

from costdesign.cli import run_bench

REPS = 10
rows = run_bench("l", REPS, levels=(1, 4, 16, 64, None), seed=0)

# %%
by_level = {}
for value, rep, seed, iters, elapsed, phi, status in rows:
    by_level.setdefault(value, []).append((iters, elapsed))
print(f"{'l':>5s} {'median iters':>13s} {'median time [s]':>16s}")
for value, runs in by_level.items():
    label = "never" if value is None else str(value)
    print(f"{label:>5s} {statistics.median(i for i, _ in runs):13.0f} "
          f"{statistics.median(t for _, t in runs):16.3f}")
