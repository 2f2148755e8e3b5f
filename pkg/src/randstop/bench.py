"""Experiment harness: configs, repeated runs, sweeps and result files.

Config files are flat ``key = value`` text, one key per line, ``#`` starts a
comment. Sub-settings use dotted keys (``model.sigma = 0.2``). Unknown keys
are rejected. See the README for the full key reference.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import algos
from .errors import ConfigError, NumericalError, RandstopError
from .features import (
    RRLSM_INPUT_STD,
    RRLSM_RECURRENT_STD,
    Activation,
    ActivationKind,
    PolyBasis,
    init_random_basis,
    init_recurrent_basis,
)
from .payoff import Payoff, PayoffKind
from .sim import FbmConfig, GbmConfig, HestonConfig, TimeGrid, simulate

THREADS_ENV = "RANDSTOP_THREADS"
BASIS_SEED_OFFSET = 10**6

MODELS = {"gbm": GbmConfig, "heston": HestonConfig, "fbm": FbmConfig}
ALGOS = ("rlsm", "rfqi", "rrlsm", "lsm", "fqi")
DEFAULT_ACTIVATION = {"rlsm": "leaky_relu", "rfqi": "leaky_relu", "rrlsm": "tanh"}

FIXED_COLUMNS = (
    "fingerprint", "algo", "model", "payoff", "d", "x0", "N", "m", "K",
    "price_mean", "price_std", "runtime_median_s",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One pricing experiment, repeated ``repetitions`` times.

    ``hidden_size`` and ``activation`` left as ``None`` take the per-algorithm
    defaults (20 nodes, or ``min(20, d)`` for RFQI; leaky ReLU, or tanh for
    RRLSM). ``hidden_size`` is ignored by the polynomial baselines.
    """

    model: str = "gbm"
    model_params: dict = field(default_factory=dict)
    payoff: str = "max_call"
    strike: float = 100.0
    algo: str = "rlsm"
    m: int = 20_000
    N: int = 10
    T: float = 1.0
    hidden_size: Optional[int] = None
    activation: Optional[str] = None
    leaky_slope: float = 0.01
    weight_std: float = 1.0
    bias_std: float = 1.0
    input_std: float = RRLSM_INPUT_STD
    recurrent_std: float = RRLSM_RECURRENT_STD
    itm_only: bool = False
    ridge: float = 0.0
    tol: float = algos.DEFAULT_TOL
    max_iters: int = algos.DEFAULT_MAX_ITERS
    evaluation: str = "rule"
    repetitions: int = 10
    base_seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {sorted(MODELS)}, got {self.model!r}")
        if self.algo not in ALGOS:
            raise ConfigError(f"algo must be one of {ALGOS}, got {self.algo!r}")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.m < 1:
            raise ConfigError(f"m must be >= 1, got {self.m}")
        if self.hidden_size is not None and self.hidden_size < 1:
            raise ConfigError(f"hidden_size must be >= 1, got {self.hidden_size}")
        if self.evaluation not in algos.EVALUATIONS:
            raise ConfigError(f"evaluation must be one of {algos.EVALUATIONS}, got {self.evaluation!r}")
        object.__setattr__(self, "model_params", dict(self.model_params))
        # Build once so that invalid sub-configs fail at construction time.
        self.model_config()
        self.payoff_fn()
        TimeGrid.equidistant(self.T, self.N)
        if self.activation is not None:
            try:
                Activation(self.activation, self.leaky_slope)
            except ValueError as exc:
                raise ConfigError(f"invalid activation {self.activation!r}: {exc}") from None

    def model_config(self):
        cls = MODELS[self.model]
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(self.model_params) - names
        if unknown:
            raise ConfigError(f"unknown {self.model} parameters: {sorted(unknown)}")
        return cls(**self.model_params)

    def payoff_fn(self) -> Payoff:
        try:
            kind = PayoffKind(self.payoff)
        except ValueError:
            raise ConfigError(f"unknown payoff {self.payoff!r}") from None
        return Payoff(kind, self.strike)

    @property
    def d(self) -> int:
        return self.model_config().d

    @property
    def hidden(self) -> int:
        if self.hidden_size is not None:
            return self.hidden_size
        return algos.default_hidden_size(self.algo, self.d)

    @property
    def num_features(self) -> int:
        d = self.d
        if self.algo == "lsm":
            return PolyBasis(d).size
        if self.algo == "fqi":
            return PolyBasis(d + 2).size
        return self.hidden + 1

    def activation_fn(self) -> Activation:
        kind = self.activation or DEFAULT_ACTIVATION.get(self.algo, "leaky_relu")
        return Activation(ActivationKind(kind), self.leaky_slope)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["model_params"] = dict(sorted(self.model_params.items()))
        return out

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


# -- config file format ------------------------------------------------------

_TOP_KEYS = {"model", "payoff", "algo", "m", "repetitions", "base_seed"}
_GRID_KEYS = {"grid.N": "N", "grid.T": "T"}
_PAYOFF_KEYS = {"payoff.strike": "strike"}
_ALGO_KEYS = {
    "algo.hidden_size": "hidden_size",
    "algo.activation": "activation",
    "algo.leaky_slope": "leaky_slope",
    "algo.weight_std": "weight_std",
    "algo.bias_std": "bias_std",
    "algo.input_std": "input_std",
    "algo.recurrent_std": "recurrent_std",
    "algo.itm_only": "itm_only",
    "algo.ridge": "ridge",
    "algo.tol": "tol",
    "algo.max_iters": "max_iters",
    "algo.evaluation": "evaluation",
}
_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def _coerce(name: str, raw: str, annotation: str):
    text = raw.strip()
    try:
        if "bool" in annotation:
            low = text.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(text)
        if "Optional" in annotation and text.lower() in ("", "none", "default"):
            return None
        if "int" in annotation:
            return int(text)
        if "float" in annotation:
            return float(text)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {text!r} as {annotation}") from None
    return text


def _model_value(key: str, raw: str):
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    return int(value) if key.endswith(".d") and value.is_integer() else value


def parse_config(text: str) -> ExperimentConfig:
    values, model_params, seen = {}, {}, set()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        if key in _TOP_KEYS:
            name = key
        elif key in _GRID_KEYS:
            name = _GRID_KEYS[key]
        elif key in _PAYOFF_KEYS:
            name = _PAYOFF_KEYS[key]
        elif key in _ALGO_KEYS:
            name = _ALGO_KEYS[key]
        elif key.startswith("model."):
            model_params[key[len("model."):]] = _model_value(key, raw)
            continue
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[name] = _coerce(key, raw, str(_FIELD_TYPES[name]))
    return ExperimentConfig(model_params=model_params, **values)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _dump_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, str):
        return value
    return repr(value)


def dump_config(cfg: ExperimentConfig) -> str:
    """Inverse of :func:`parse_config`."""
    lines = [f"model = {cfg.model}"]
    lines += [f"model.{k} = {v!r}" for k, v in sorted(cfg.model_params.items())]
    lines += [f"payoff = {cfg.payoff}", f"payoff.strike = {cfg.strike!r}", f"algo = {cfg.algo}"]
    for key, name in _ALGO_KEYS.items():
        lines.append(f"{key} = {_dump_value(getattr(cfg, name))}")
    lines += [f"grid.N = {cfg.N}", f"grid.T = {cfg.T!r}"]
    lines += [f"m = {cfg.m}", f"repetitions = {cfg.repetitions}", f"base_seed = {cfg.base_seed}"]
    return "\n".join(lines) + "\n"


# -- running -----------------------------------------------------------------


@dataclass
class RunRecord:
    rep: int
    path_seed: int
    basis_seed: int
    estimate: algos.PriceEstimate
    simulation_s: float
    pricing_s: float


@dataclass
class ResultRow:
    fingerprint: str
    algo: str
    model: str
    payoff: str
    d: int
    x0: float
    N: int
    m: int
    K: int
    price_mean: float
    price_std: float
    runtime_median_s: float
    prices: list
    diagnostics: dict = field(default_factory=dict)

    @property
    def repetitions(self) -> int:
        return len(self.prices)


def rep_seeds(cfg: ExperimentConfig, rep: int) -> tuple:
    return cfg.base_seed + rep, cfg.base_seed + BASIS_SEED_OFFSET + rep


def _discount(cfg: ExperimentConfig, grid: TimeGrid) -> float:
    r = cfg.model_params.get("r", MODELS[cfg.model]().r if cfg.model != "fbm" else 0.0)
    return grid.discount_factor(r)


def price_once(cfg: ExperimentConfig, paths, basis_seed: int) -> algos.PriceEstimate:
    """Build the algorithm's basis from ``basis_seed`` and price ``paths``."""
    g = cfg.payoff_fn()
    alpha = _discount(cfg, paths.grid)
    d = paths.d
    if cfg.algo == "rlsm":
        basis = init_random_basis(
            d, cfg.hidden + 1, cfg.weight_std, cfg.bias_std, cfg.activation_fn(), basis_seed
        )
        return algos.price_rlsm(paths, g, alpha, basis, cfg.itm_only, cfg.ridge)
    if cfg.algo == "rrlsm":
        basis = init_recurrent_basis(
            d, cfg.hidden + 1, cfg.input_std, cfg.recurrent_std, cfg.bias_std,
            cfg.activation_fn(), basis_seed,
        )
        return algos.price_rrlsm(paths, g, alpha, basis, cfg.itm_only, cfg.ridge)
    if cfg.algo == "rfqi":
        basis = init_random_basis(
            d + 2, cfg.hidden + 1, cfg.weight_std, cfg.bias_std, cfg.activation_fn(), basis_seed
        )
        return algos.price_rfqi(
            paths, g, alpha, basis, cfg.tol, cfg.max_iters, cfg.ridge, cfg.evaluation
        )
    if cfg.algo == "lsm":
        return algos.price_lsm(paths, g, alpha, PolyBasis(d), cfg.itm_only, cfg.ridge)
    return algos.price_fqi(
        paths, g, alpha, PolyBasis(d + 2), cfg.tol, cfg.max_iters, cfg.ridge, cfg.evaluation
    )


def run_repetition(cfg: ExperimentConfig, rep: int) -> RunRecord:
    path_seed, basis_seed = rep_seeds(cfg, rep)
    try:
        grid = TimeGrid.equidistant(cfg.T, cfg.N)
        start = time.perf_counter()
        paths = simulate(cfg.model_config(), grid, 2 * cfg.m, path_seed)
        simulated = time.perf_counter()
        estimate = price_once(cfg, paths, basis_seed)
        priced = time.perf_counter()
    except RandstopError as exc:
        raise type(exc)(f"rep {rep} (path seed {path_seed}, basis seed {basis_seed}): {exc}") from exc
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        raise NumericalError(
            f"rep {rep} (path seed {path_seed}, basis seed {basis_seed}): {exc}"
        ) from exc
    return RunRecord(rep, path_seed, basis_seed, estimate, simulated - start, priced - simulated)


def thread_count(threads: Optional[int] = None) -> int:
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "1")
        try:
            threads = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if threads < 1:
        raise ConfigError(f"thread count must be >= 1, got {threads}")
    return threads


def run_records(cfg: ExperimentConfig, threads: Optional[int] = None) -> list:
    reps = range(cfg.repetitions)
    n = thread_count(threads)
    if n == 1:
        return [run_repetition(cfg, j) for j in reps]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(lambda j: run_repetition(cfg, j), reps))


def summarize(cfg: ExperimentConfig, records: Sequence[RunRecord]) -> ResultRow:
    prices = [float(r.estimate.price) for r in sorted(records, key=lambda r: r.rep)]
    std = statistics.stdev(prices) if len(prices) > 1 else 0.0
    model = cfg.model_config()
    return ResultRow(
        fingerprint=cfg.fingerprint(),
        algo=cfg.algo,
        model=cfg.model,
        payoff=cfg.payoff,
        d=model.d,
        x0=float(model.x0),
        N=cfg.N,
        m=cfg.m,
        K=cfg.num_features,
        price_mean=float(np.mean(prices)),
        price_std=float(std),
        runtime_median_s=float(statistics.median(r.pricing_s for r in records)),
        prices=prices,
        diagnostics={
            "simulation_median_s": float(statistics.median(r.simulation_s for r in records)),
            "path_seeds": [r.path_seed for r in records],
            "basis_seeds": [r.basis_seed for r in records],
            "converged": [bool(r.estimate.converged) for r in records],
            "iterations": [r.estimate.iterations for r in records],
            "warnings": sorted({w for r in records for w in r.estimate.warnings}),
            "config": cfg.to_dict(),
        },
    )


def run_experiment(cfg: ExperimentConfig, threads: Optional[int] = None) -> ResultRow:
    return summarize(cfg, run_records(cfg, threads))


def convergence_study(
    base: ExperimentConfig,
    m_grid: Iterable[int],
    K_grid: Iterable[int],
    runs_per_cell: int = 20,
    threads: Optional[int] = None,
) -> list:
    """One row per ``(m, hidden size)`` cell, ``runs_per_cell`` runs each."""
    m_grid, K_grid = list(m_grid), list(K_grid)
    if not m_grid or not K_grid:
        raise ConfigError("convergence grids must be non-empty")
    rows = []
    for hidden in K_grid:
        for m in m_grid:
            cfg = base.replace(m=int(m), hidden_size=int(hidden), repetitions=runs_per_cell)
            rows.append(run_experiment(cfg, threads))
    return rows


# -- output ------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def csv_header(num_reps: int) -> list:
    return list(FIXED_COLUMNS) + [f"rep_{j}" for j in range(num_reps)]


def write_csv(rows: Sequence[ResultRow], fh) -> None:
    num_reps = max((r.repetitions for r in rows), default=0)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(csv_header(num_reps))
    for row in rows:
        fixed = [_fmt(getattr(row, c)) for c in FIXED_COLUMNS]
        reps = [_fmt(p) for p in row.prices] + [""] * (num_reps - row.repetitions)
        writer.writerow(fixed + reps)


def emit_csv(rows: Sequence[ResultRow], path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_csv(path) -> list:
    """Parse a file written by :func:`emit_csv` back into :class:`ResultRow`s."""
    ints = {"d", "N", "m", "K"}
    floats = {"x0", "price_mean", "price_std", "runtime_median_s"}
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            kw = {}
            for col in FIXED_COLUMNS:
                raw = rec[col]
                kw[col] = int(raw) if col in ints else float(raw) if col in floats else raw
            reps = sorted((k for k in rec if k.startswith("rep_")), key=lambda k: int(k[4:]))
            kw["prices"] = [float(rec[k]) for k in reps if rec[k] != ""]
            rows.append(ResultRow(**kw))
    return rows


def to_json(rows: Sequence[ResultRow]) -> str:
    return json.dumps([dataclasses.asdict(r) for r in rows], indent=2, default=str)


def emit_json(rows: Sequence[ResultRow], path) -> None:
    try:
        Path(path).write_text(to_json(rows), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_json(path) -> list:
    return [ResultRow(**rec) for rec in json.loads(Path(path).read_text(encoding="utf-8"))]


def pooled_standard_error(a: ResultRow, b: ResultRow) -> float:
    """Standard error of the difference of two mean prices."""
    return math.sqrt(a.price_std**2 / a.repetitions + b.price_std**2 / b.repetitions)
