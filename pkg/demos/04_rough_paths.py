"""Stopping fractional Brownian motion: where memory pays.

With H = 0.05 the process is far from Markov. A reservoir that sees the whole
path prices the identity payoff well above a feedforward readout that only
sees the current value.
"""

# %%
from randstop.bench import ExperimentConfig, run_experiment

# %%
for hurst in (0.05, 0.5, 0.9):
    print(f"\nH={hurst}")
    for algo in ("rlsm", "rrlsm", "rfqi"):
        cfg = ExperimentConfig(
            model="fbm",
            model_params={"hurst": hurst},
            payoff="identity",
            algo=algo,
            m=5_000,
            N=100,
            repetitions=3,
        )
        row = run_experiment(cfg)
        print(f"  {algo:5s} {row.price_mean:.4f} ({row.price_std:.4f})  {row.runtime_median_s:.2f}s/run")
