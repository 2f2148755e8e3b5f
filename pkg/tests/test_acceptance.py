"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``ACCEPTANCE Cn PASS|FAIL`` line (plus indented
detail lines) before asserting, so ``pytest -v tests/test_acceptance.py``
doubles as a report. Option payoffs on GBM are priced by the backward
induction family with in-the-money regression; the all-paths variant is
printed alongside for reference.
"""

import math
import time

import numpy as np
import pytest

from randstop import algos, bench
from randstop.bench import ExperimentConfig, pooled_standard_error, run_experiment
from randstop.features import eval_feedforward, init_random_basis, init_recurrent_basis, recurrent_states
from randstop.oracle import bermudan_oracle
from randstop.payoff import Payoff
from randstop.sim import FbmConfig, GbmConfig, HestonConfig, TimeGrid, simulate

pytestmark = pytest.mark.acceptance

LS_FAMILY = {"rlsm", "rrlsm", "lsm"}
_CACHE = {}


def _run(cfg: ExperimentConfig):
    key = cfg.fingerprint()
    if key not in _CACHE:
        _CACHE[key] = run_experiment(cfg)
    return _CACHE[key]


def _gbm(algo, d, payoff="max_call", x0=100.0, itm=None, **kw):
    itm_only = (algo in LS_FAMILY) if itm is None else itm
    return ExperimentConfig(
        model="gbm", model_params={"d": d, "x0": x0}, payoff=payoff, algo=algo,
        itm_only=itm_only, **kw,
    )


def _se(row):
    return row.price_std / math.sqrt(row.repetitions)


def report(capsys, criterion, ok, summary, details=()):
    with capsys.disabled():
        print(f"\nACCEPTANCE {criterion} {'PASS' if ok else 'FAIL'}: {summary}")
        for line in details:
            print(f"    {line}")
    return ok


# -- C1 ----------------------------------------------------------------------


def test_c1_put_matches_tree_oracle(capsys):
    ok, details = True, []
    for algo in ("rlsm", "lsm", "rfqi", "fqi"):
        start = time.perf_counter()
        for x0 in (90.0, 100.0, 110.0):
            ref = bermudan_oracle("put", x0, 100.0, 0.02, 0.2, 1.0, 10)
            cfg = _gbm(algo, 1, "geometric_put", x0, hidden_size=20)
            row = _run(cfg)
            err = row.price_mean - ref
            tol = max(0.015 * ref, 3 * _se(row))
            good = abs(err) <= tol
            ok &= good
            details.append(
                f"{algo:5s} x0={x0:5.1f} price={row.price_mean:8.4f} oracle={ref:8.4f} "
                f"err={100 * err / ref:+6.2f}% tol={tol:.4f} {'ok' if good else 'MISS'}"
            )
        elapsed = time.perf_counter() - start
        ok &= elapsed < 60
        details.append(f"{algo:5s} total time {elapsed:.1f}s (limit 60s)")
    for algo in ("rlsm", "lsm"):
        for x0 in (90.0, 100.0, 110.0):
            ref = bermudan_oracle("put", x0, 100.0, 0.02, 0.2, 1.0, 10)
            row = _run(_gbm(algo, 1, "geometric_put", x0, itm=False, hidden_size=20))
            details.append(
                f"info: {algo} all-path regression x0={x0:5.1f} err={100 * (row.price_mean - ref) / ref:+6.2f}%"
            )
    assert report(capsys, "C1", ok, "d=1 Bermudan put within max(1.5%, 3 SE) of the tree", details)


# -- C2 ----------------------------------------------------------------------


def test_c2_baseline_agreement(capsys):
    start = time.perf_counter()
    ok, details = True, []
    for d in (1, 5):
        for ours, theirs in (("rlsm", "lsm"), ("rfqi", "fqi")):
            a, b = _run(_gbm(ours, d)), _run(_gbm(theirs, d))
            gap, se = abs(a.price_mean - b.price_mean), pooled_standard_error(a, b)
            good = gap <= 3 * se
            ok &= good
            details.append(
                f"d={d:2d} {ours}={a.price_mean:8.4f} {theirs}={b.price_mean:8.4f} "
                f"|diff|={gap:.4f} 3*pooled SE={3 * se:.4f} {'ok' if good else 'MISS'}"
            )
    elapsed = time.perf_counter() - start
    ok &= elapsed < 300
    details.append(f"time {elapsed:.1f}s (limit 300s, includes cached runs)")
    assert report(capsys, "C2", ok, "RLSM~LSM and RFQI~FQI on max-call within 3 pooled SE", details)


# -- C3 ----------------------------------------------------------------------


def test_c3_fitted_iteration_dominates(capsys):
    start = time.perf_counter()
    ok, details = True, []
    for d in (5, 10):
        rfqi, rlsm = _run(_gbm("rfqi", d)), _run(_gbm("rlsm", d))
        se = pooled_standard_error(rfqi, rlsm)
        good = rfqi.price_mean >= rlsm.price_mean - se
        ok &= good
        details.append(
            f"d={d:2d} rfqi={rfqi.price_mean:8.4f} rlsm={rlsm.price_mean:8.4f} "
            f"pooled SE={se:.4f} {'ok' if good else 'MISS'}"
        )
    elapsed = time.perf_counter() - start
    ok &= elapsed < 300
    details.append(f"time {elapsed:.1f}s (limit 300s)")
    assert report(capsys, "C3", ok, "RFQI >= RLSM - 1 pooled SE on max-call", details)


# -- C4 ----------------------------------------------------------------------

C4_CONFIGS = [
    ("gbm", GbmConfig(d=1), "max_call"),
    ("gbm", GbmConfig(d=5), "max_call"),
    ("gbm", GbmConfig(d=1, x0=90.0), "geometric_put"),
    ("heston", HestonConfig(d=2), "basket_call"),
    ("fbm", FbmConfig(hurst=0.05), "identity"),
]


def test_c4_lower_bounds(capsys):
    start = time.perf_counter()
    grid = TimeGrid.equidistant(1.0, 10)
    ok, details = True, []
    for model, model_cfg, payoff in C4_CONFIGS:
        g = Payoff(payoff)
        for algo in bench.ALGOS:
            params = {f: getattr(model_cfg, f) for f in model_cfg.__dataclass_fields__}
            cfg = ExperimentConfig(
                model=model, model_params=params, payoff=payoff, algo=algo, m=20_000,
                itm_only=algo in LS_FAMILY and g.non_negative, repetitions=1,
            )
            misses = []
            for seed in range(3):
                paths = simulate(model_cfg, grid, 2 * cfg.m, seed)
                est = bench.price_once(cfg, paths, bench.BASIS_SEED_OFFSET + seed)
                g0 = float(g(paths.values[0, 0]))
                if not est.price >= g0:
                    misses.append(f"seed {seed}: p0={est.price:.6f} < g(x0)={g0:.6f}")
                if model == "gbm" and payoff == "max_call":
                    alpha = grid.discount_factor(model_cfg.r)
                    euro = alpha**grid.num_dates * g(paths.values[paths.m:, -1])
                    bound = euro.mean() - 3 * euro.std(ddof=1) / math.sqrt(euro.size)
                    if not est.price >= bound:
                        misses.append(f"seed {seed}: p0={est.price:.4f} < European - 3 SE = {bound:.4f}")
            ok &= not misses
            status = "ok" if not misses else "; ".join(misses)
            details.append(f"{model:6s} d={model_cfg.d} {payoff:13s} {algo:5s} {status}")
    elapsed = time.perf_counter() - start
    details.append(f"time {elapsed:.1f}s (limit 60s)")
    ok &= elapsed < 60
    assert report(capsys, "C4", ok, "p0 >= g(x0) everywhere, p0 >= European - 3 SE on GBM max-call", details)


# -- C5 ----------------------------------------------------------------------


def _replay_stopping(theta, features, g, N):
    """Stopping dates implied by per-date readouts, recomputed from scratch."""
    tau = np.full(g.shape[0], N)
    stopped = np.zeros(g.shape[0], dtype=bool)
    for n in range(1, N):
        now = ~stopped & (g[:, n] >= features(n) @ theta[n - 1])
        tau[now] = n
        stopped |= now
    return tau


def test_c5_values_come_from_stopping_rules(capsys):
    start = time.perf_counter()
    grid = TimeGrid.equidistant(1.0, 10)
    ok, details = True, []
    for model_cfg, payoff, alpha in [
        (GbmConfig(d=5), "max_call", grid.discount_factor(0.02)),
        (HestonConfig(d=2), "geometric_put", grid.discount_factor(0.02)),
        (FbmConfig(hurst=0.05), "identity", 1.0),
    ]:
        g = Payoff(payoff)
        paths = simulate(model_cfg, grid, 1000, seed=5)
        gv = g(paths.values)
        ff = init_random_basis(model_cfg.d, 21, seed=1)
        rec = init_recurrent_basis(model_cfg.d, 21, seed=1)
        states = recurrent_states(rec, paths.values, grid.num_dates - 1)
        rec_phi = np.concatenate([states, np.ones(states.shape[:2] + (1,))], axis=-1)
        for name, est, features in [
            ("rlsm", algos.price_rlsm(paths, g, alpha, ff), lambda n: eval_feedforward(ff, paths.values[:, n])),
            ("rrlsm", algos.price_rrlsm(paths, g, alpha, rec), lambda n: rec_phi[:, n]),
        ]:
            tau = _replay_stopping(est.theta.per_date, features, gv, grid.num_dates)
            expected = alpha ** (tau - 1) * gv[np.arange(paths.num_paths), tau]
            exact = np.array_equal(est.path_values, expected) and np.array_equal(tau, est.stopping_dates)
            ok &= exact
            details.append(f"{type(model_cfg).__name__:12s} {name:5s} {'exact' if exact else 'MISMATCH'}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 10
    details.append(f"time {elapsed:.1f}s (limit 10s)")
    assert report(capsys, "C5", ok, "per-path values equal alpha^(tau-1) g(x_tau) of the replayed rule", details)


# -- C6 ----------------------------------------------------------------------

C6_M = (2_000, 8_000, 32_000)
C6_K = (5, 20, 100)


def test_c6_convergence_study(capsys):
    start = time.perf_counter()
    base = _gbm("rlsm", 5, repetitions=20)
    rows = bench.convergence_study(base, C6_M, C6_K, runs_per_cell=20)
    cell = {(r.K - 1, r.m): r for r in rows}
    reference = cell[(20, 32_000)].price_mean
    ok, details = True, []
    for K in C6_K:
        stds = [cell[(K, m)].price_std for m in C6_M]
        means = [cell[(K, m)].price_mean for m in C6_M]
        ups = [(a, b) for a, b in zip(stds, stds[1:]) if b > a]
        std_ok = len(ups) <= 1 and all(b <= 1.2 * a for a, b in ups)
        gaps = [abs(x - reference) for x in means]
        gap_ok = gaps[-1] <= gaps[0]
        ok &= std_ok and gap_ok
        details.append(
            f"K={K:3d} mean={[round(x, 3) for x in means]} std={[round(s, 3) for s in stds]} "
            f"gap={[round(x, 3) for x in gaps]} std {'ok' if std_ok else 'MISS'} gap {'ok' if gap_ok else 'MISS'}"
        )
    small_m = min(C6_M)
    details.append(
        f"info: at m={small_m} mean price K=100 {cell[(100, small_m)].price_mean:.3f} "
        f"vs K=5 {cell[(5, small_m)].price_mean:.3f}"
    )
    elapsed = time.perf_counter() - start
    ok &= elapsed < 1200
    details.append(f"time {elapsed:.1f}s (limit 1200s)")
    assert report(capsys, "C6", ok, "std non-increasing in m, gap to m=32k/K=20 shrinks", details)


# -- C7 ----------------------------------------------------------------------


def _fbm(algo):
    return ExperimentConfig(
        model="fbm", model_params={"hurst": 0.05}, payoff="identity", algo=algo,
        m=10_000, N=100, repetitions=10,
    )


def test_c7_path_memory_matters(capsys):
    start = time.perf_counter()
    rlsm, rrlsm, rfqi = (_run(_fbm(a)) for a in ("rlsm", "rrlsm", "rfqi"))
    se = pooled_standard_error(rrlsm, rlsm)
    sep_ok = rrlsm.price_mean - rlsm.price_mean > 2 * se
    rl_ok = rfqi.price_mean <= rrlsm.price_mean
    elapsed = time.perf_counter() - start
    ok = sep_ok and rl_ok and elapsed < 300
    details = [
        f"rlsm={rlsm.price_mean:.4f} ({rlsm.price_std:.4f})  rrlsm={rrlsm.price_mean:.4f} "
        f"({rrlsm.price_std:.4f})  rfqi={rfqi.price_mean:.4f} ({rfqi.price_std:.4f})",
        f"rrlsm - rlsm = {rrlsm.price_mean - rlsm.price_mean:.4f} vs 2 pooled SE = {2 * se:.4f} "
        f"{'ok' if sep_ok else 'MISS'}",
        f"rfqi <= rrlsm {'ok' if rl_ok else 'MISS'}",
        f"median pricing time per run: rrlsm {rrlsm.runtime_median_s:.2f}s",
        f"time {elapsed:.1f}s (limit 300s)",
    ]
    assert report(capsys, "C7", ok, "fBM H=0.05: RRLSM > RLSM + 2 SE and RFQI <= RRLSM", details)


# -- C8 ----------------------------------------------------------------------


def test_c8_parameter_counts(capsys):
    details, ok = [], True
    for d in (20, 50):
        cfg = _gbm("rfqi", d, m=200, N=10, repetitions=1)
        paths = simulate(cfg.model_config(), TimeGrid.equidistant(1.0, 10), 400, 0)
        est = bench.price_once(cfg, paths, 1)
        n = est.theta.num_parameters
        ok &= n == 21 == cfg.num_features
        details.append(f"rfqi d={d}: {n} trainable parameters")
    for N, hidden in ((10, 20), (7, 5)):
        cfg = _gbm("rlsm", 3, m=200, N=N, hidden_size=hidden, repetitions=1)
        paths = simulate(cfg.model_config(), TimeGrid.equidistant(1.0, N), 400, 0)
        est = bench.price_once(cfg, paths, 1)
        K = hidden + 1
        good = est.theta.num_parameters == (N - 1) * K and est.theta.per_date.shape == (N - 1, K)
        ok &= good
        details.append(f"rlsm N={N} K={K}: {est.theta.num_parameters} = (N-1)*K {'ok' if good else 'MISS'}")
    assert report(capsys, "C8", ok, "RFQI has K=21 weights, RLSM has (N-1)*K", details)


# -- C9 ----------------------------------------------------------------------

C9_MODELS = {
    "gbm": (GbmConfig(d=3), Payoff("max_call"), 0.02),
    "heston": (HestonConfig(d=2), Payoff("geometric_put"), 0.02),
    "fbm": (FbmConfig(hurst=0.05), Payoff("identity"), 0.0),
}


def test_c9_homogeneity_and_determinism(capsys):
    start = time.perf_counter()
    grid = TimeGrid.equidistant(1.0, 10)
    ok, details = True, []
    for model, (model_cfg, g, r) in C9_MODELS.items():
        alpha = grid.discount_factor(r)
        paths = simulate(model_cfg, grid, 4000, seed=3)
        for algo in bench.ALGOS:
            cfg = ExperimentConfig(
                model=model, model_params={"d": model_cfg.d}, payoff=g.kind.value, algo=algo, m=2000
            )
            if algo == "rlsm":
                basis = init_random_basis(model_cfg.d, 21, seed=7)
                price = lambda gg: algos.price_rlsm(paths, gg, alpha, basis)
            elif algo == "rrlsm":
                basis = init_recurrent_basis(model_cfg.d, 21, seed=7)
                price = lambda gg: algos.price_rrlsm(paths, gg, alpha, basis)
            elif algo == "rfqi":
                basis = init_random_basis(model_cfg.d + 2, cfg.num_features, seed=7)
                price = lambda gg: algos.price_rfqi(paths, gg, alpha, basis)
            elif algo == "lsm":
                price = lambda gg: algos.price_lsm(paths, gg, alpha)
            else:
                price = lambda gg: algos.price_fqi(paths, gg, alpha)
            base, again = price(g), price(g)
            det = again.price == base.price and np.array_equal(again.path_values, base.path_values)
            worst = 0.0
            for lam in (2.0, 0.25, 3.7):
                scaled = price(g.scaled(lam)).price
                worst = max(worst, abs(scaled - lam * base.price) / max(abs(lam * base.price), 1e-300))
            good = det and worst <= 1e-12
            ok &= good
            details.append(
                f"{model:6s} {algo:5s} deterministic={det} max rel homogeneity error={worst:.1e} "
                f"{'ok' if good else 'MISS'}"
            )
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120
    details.append(f"time {elapsed:.1f}s (limit 120s)")
    assert report(capsys, "C9", ok, "homogeneity (rel 1e-12) and determinism, 5 algorithms x 3 models", details)
