"""A first look at the three path simulators.

Run with ``python demos/01_paths.py``. Everything prints to the terminal.
"""

# %%
import numpy as np

from randstop.sim import FbmConfig, GbmConfig, HestonConfig, TimeGrid, simulate

grid = TimeGrid.equidistant(1.0, 10)
print("dates:", np.round(grid.dates, 2))

# %% Black-Scholes: under the pricing measure the forward is x0 * exp(r T).
gbm = simulate(GbmConfig(d=5), grid, 20_000, seed=0)
print("GBM paths", gbm.values.shape)
print("  mean X_T per asset:", np.round(gbm.values[:, -1].mean(axis=0), 3), " forward:", round(100 * np.exp(0.02), 3))

# %% Heston: stochastic variance, kept non-negative by truncation.
heston = simulate(HestonConfig(d=2), grid, 20_000, seed=0)
print("Heston min variance:", heston.variance.min(), " mean X_T:", np.round(heston.values[:, -1].mean(axis=0), 3))

# %% Fractional Brownian motion: H < 1/2 makes increments anti-correlated.
for hurst in (0.05, 0.5, 0.9):
    fbm = simulate(FbmConfig(hurst=hurst), grid, 20_000, seed=0)
    inc = np.diff(fbm.values[:, :, 0], axis=1)
    corr = np.corrcoef(inc[:, 4], inc[:, 5])[0, 1]
    print(f"fBM H={hurst:.2f}: lag-1 increment correlation {corr:+.3f}  (exact {2 ** (2 * hurst - 1) - 1:+.3f})")

# %% Same seed, same paths, whatever the path count.
a = simulate(GbmConfig(), grid, 10, seed=42).values
b = simulate(GbmConfig(), grid, 5000, seed=42).values[:10]
print("first 10 paths identical:", np.array_equal(a, b))
