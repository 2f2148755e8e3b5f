"""How the price settles as training paths and hidden units grow.

Writes a tidy CSV (one row per cell) that any plotting tool can turn into
mean +- std bars.
"""

# %%
import sys

from randstop.bench import ExperimentConfig, convergence_study, write_csv

# %%
base = ExperimentConfig(model_params={"d": 5}, algo="rlsm", itm_only=True)
rows = convergence_study(base, m_grid=[1_000, 4_000, 16_000], K_grid=[5, 20, 100], runs_per_cell=5)

for row in rows:
    print(f"K={row.K - 1:3d} m={row.m:6d}  {row.price_mean:.3f} ({row.price_std:.3f})")

# %%
print()
write_csv(rows, sys.stdout)
