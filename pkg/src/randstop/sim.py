"""Path simulation for the three underlying models.

All simulators return a :class:`PathSet` holding ``num_paths`` trajectories on
the dates of a :class:`TimeGrid`, with ``values[:, 0, :] == x0`` exactly.

Random numbers come from Philox (a counter-based 64-bit generator). Paths are
grouped into fixed blocks of :data:`PATHS_PER_BLOCK`; each block draws from its
own substream keyed by ``(seed, stream, block)``, so path ``i`` depends only on
the seed and its index, never on ``num_paths`` or on how blocks are scheduled.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, NumericalError

PATHS_PER_BLOCK = 1024
MAX_FBM_DATES = 2048

_STREAM_ASSET = 0
_STREAM_VARIANCE = 1
_STREAM_FBM = 2


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Exercise dates ``0 = t_0 < t_1 < ... < t_N = T``."""

    maturity: float
    num_dates: int
    dates: np.ndarray = field(repr=False)

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype=float)
        if self.num_dates < 1:
            raise ConfigError(f"num_dates must be >= 1, got {self.num_dates}")
        if dates.shape != (self.num_dates + 1,):
            raise ConfigError("dates must have length num_dates + 1")
        if not np.all(np.isfinite(dates)):
            raise ConfigError("dates must be finite")
        if dates[0] != 0.0 or dates[-1] != self.maturity:
            raise ConfigError("dates must start at 0 and end at maturity")
        if np.any(np.diff(dates) <= 0):
            raise ConfigError("dates must be strictly increasing")
        dates.setflags(write=False)
        object.__setattr__(self, "dates", dates)

    @classmethod
    def equidistant(cls, maturity: float, num_dates: int) -> "TimeGrid":
        if not (math.isfinite(maturity) and maturity > 0):
            raise ConfigError(f"maturity must be positive and finite, got {maturity}")
        if num_dates < 1:
            raise ConfigError(f"num_dates must be >= 1, got {num_dates}")
        dates = np.linspace(0.0, maturity, num_dates + 1)
        dates[-1] = maturity
        return cls(maturity, int(num_dates), dates)

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.dates)

    def discount_factor(self, r: float) -> float:
        """Per-step discount ``exp(-r * dt)``; requires an equidistant grid."""
        steps = self.dt
        if not np.allclose(steps, steps[0], rtol=1e-12, atol=0.0):
            raise ConfigError("a single step-wise discount factor needs equidistant dates")
        return math.exp(-r * self.maturity / self.num_dates)


@dataclass(frozen=True, eq=False)
class PathSet:
    """Simulated trajectories, shape ``(num_paths, N + 1, d)``.

    ``variance`` is only populated by the Heston simulator and holds the
    truncated (non-negative) variance used at each date.
    """

    values: np.ndarray = field(repr=False)
    grid: TimeGrid
    model_tag: str
    seed: int
    variance: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 3 or values.shape[1] != self.grid.num_dates + 1:
            raise ConfigError(
                f"values must have shape (paths, {self.grid.num_dates + 1}, d), got {values.shape}"
            )
        if values.shape[0] < 2 or values.shape[0] % 2:
            raise ConfigError(f"number of paths must be even and >= 2, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise NumericalError("simulated paths contain non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.variance is not None:
            var = np.asarray(self.variance, dtype=float)
            var.setflags(write=False)
            object.__setattr__(self, "variance", var)

    @property
    def num_paths(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        """Size of each half (training and evaluation)."""
        return self.values.shape[0] // 2

    @property
    def d(self) -> int:
        return self.values.shape[2]

    @property
    def x0(self) -> np.ndarray:
        return self.values[0, 0]

    def with_values(self, values: np.ndarray) -> "PathSet":
        return PathSet(values, self.grid, self.model_tag, self.seed, self.variance)


def _check_finite(**params):
    for name, value in params.items():
        if not math.isfinite(value):
            raise ConfigError(f"{name} must be finite, got {value}")


@dataclass(frozen=True)
class GbmConfig:
    d: int = 1
    x0: float = 100.0
    r: float = 0.02
    sigma: float = 0.2

    def __post_init__(self):
        _check_finite(x0=self.x0, r=self.r, sigma=self.sigma)
        if self.d < 1:
            raise ConfigError(f"d must be >= 1, got {self.d}")
        if self.x0 <= 0:
            raise ConfigError(f"x0 must be positive, got {self.x0}")
        if self.sigma < 0:
            raise ConfigError(f"sigma must be non-negative, got {self.sigma}")


@dataclass(frozen=True)
class HestonConfig:
    d: int = 1
    x0: float = 100.0
    r: float = 0.02
    sigma_vol: float = 0.2
    v_inf: float = 0.01
    kappa: float = 2.0
    rho: float = -0.3
    v0: float = 0.01

    def __post_init__(self):
        _check_finite(
            x0=self.x0, r=self.r, sigma_vol=self.sigma_vol, v_inf=self.v_inf,
            kappa=self.kappa, rho=self.rho, v0=self.v0,
        )
        if self.d < 1:
            raise ConfigError(f"d must be >= 1, got {self.d}")
        if self.x0 <= 0:
            raise ConfigError(f"x0 must be positive, got {self.x0}")
        if self.sigma_vol < 0 or self.v_inf < 0 or self.kappa < 0 or self.v0 < 0:
            raise ConfigError("sigma_vol, v_inf, kappa and v0 must be non-negative")
        if abs(self.rho) > 1:
            raise ConfigError(f"rho must lie in [-1, 1], got {self.rho}")


@dataclass(frozen=True)
class FbmConfig:
    d: int = 1
    hurst: float = 0.5
    x0: float = 0.0

    def __post_init__(self):
        _check_finite(hurst=self.hurst, x0=self.x0)
        if self.d < 1:
            raise ConfigError(f"d must be >= 1, got {self.d}")
        if not 0 < self.hurst < 1:
            raise ConfigError(f"hurst must lie in (0, 1), got {self.hurst}")


def _check_num_paths(num_paths: int):
    if num_paths < 2 or num_paths % 2:
        raise ConfigError(f"num_paths must be even and >= 2, got {num_paths}")


def standard_normals(seed: int, stream: int, num_paths: int, per_path: tuple) -> np.ndarray:
    """Standard normals of shape ``(num_paths, *per_path)`` from per-block substreams."""
    out = np.empty((num_paths, *per_path))
    for block, start in enumerate(range(0, num_paths, PATHS_PER_BLOCK)):
        stop = min(start + PATHS_PER_BLOCK, num_paths)
        ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, stream, block])
        rng = np.random.Generator(np.random.Philox(ss))
        out[start:stop] = rng.standard_normal((stop - start, *per_path))
    return out


def simulate_gbm(cfg: GbmConfig, grid: TimeGrid, num_paths: int, seed: int) -> PathSet:
    """Exact log-normal sampling of ``d`` independent Black-Scholes assets."""
    _check_num_paths(num_paths)
    z = standard_normals(seed, _STREAM_ASSET, num_paths, (grid.num_dates, cfg.d))
    brownian = np.cumsum(np.sqrt(grid.dt)[None, :, None] * z, axis=1)
    t = grid.dates[1:, None]
    log_growth = (cfg.r - 0.5 * cfg.sigma**2) * t[None] + cfg.sigma * brownian
    values = np.empty((num_paths, grid.num_dates + 1, cfg.d))
    values[:, 0, :] = cfg.x0
    values[:, 1:, :] = cfg.x0 * np.exp(log_growth)
    return PathSet(values, grid, "gbm", seed)


def simulate_heston(cfg: HestonConfig, grid: TimeGrid, num_paths: int, seed: int) -> PathSet:
    """Euler scheme with full truncation of the variance.

    The asset step is taken in log space so that, with constant variance, it
    coincides with :func:`simulate_gbm` driven by the same normals.
    """
    _check_num_paths(num_paths)
    n_dates, d = grid.num_dates, cfg.d
    z_asset = standard_normals(seed, _STREAM_ASSET, num_paths, (n_dates, d))
    z_perp = standard_normals(seed, _STREAM_VARIANCE, num_paths, (n_dates, d))
    z_var = cfg.rho * z_asset + math.sqrt(1.0 - cfg.rho**2) * z_perp

    values = np.empty((num_paths, n_dates + 1, d))
    variance = np.empty((num_paths, n_dates + 1, d))
    values[:, 0, :] = cfg.x0
    variance[:, 0, :] = cfg.v0
    log_x = np.full((num_paths, d), math.log(cfg.x0))
    v = np.full((num_paths, d), float(cfg.v0))
    for n, dt in enumerate(grid.dt):
        v_pos = np.maximum(v, 0.0)
        vol = np.sqrt(v_pos)
        log_x = log_x + (cfg.r - 0.5 * v_pos) * dt + vol * math.sqrt(dt) * z_asset[:, n]
        v = v - cfg.kappa * (v_pos - cfg.v_inf) * dt + cfg.sigma_vol * vol * math.sqrt(dt) * z_var[:, n]
        values[:, n + 1] = np.exp(log_x)
        variance[:, n + 1] = np.maximum(v, 0.0)
    return PathSet(values, grid, "heston", seed, variance=variance)


def fbm_covariance(dates: np.ndarray, hurst: float) -> np.ndarray:
    """Covariance of fractional Brownian motion at the given (positive) times."""
    t = np.asarray(dates, dtype=float)
    h2 = 2.0 * hurst
    return 0.5 * (t[:, None] ** h2 + t[None, :] ** h2 - np.abs(t[:, None] - t[None, :]) ** h2)


@functools.lru_cache(maxsize=32)
def _fbm_factor(dates: tuple, hurst: float) -> np.ndarray:
    cov = fbm_covariance(np.array(dates), hurst)
    scale = float(np.max(np.diag(cov)))
    jitter = 0.0
    for attempt in range(4):
        try:
            factor = np.linalg.cholesky(cov + jitter * np.eye(len(dates)))
            factor.setflags(write=False)
            return factor
        except np.linalg.LinAlgError:
            jitter = 1e-12 * scale * 10.0**attempt
    raise NumericalError(
        f"Cholesky of the fBM covariance failed (H={hurst}, N={len(dates)}, "
        f"max diag={scale:.3e}, last jitter={jitter:.1e}, "
        f"min eigenvalue={np.linalg.eigvalsh(cov)[0]:.3e})"
    )


def simulate_fbm(cfg: FbmConfig, grid: TimeGrid, num_paths: int, seed: int) -> PathSet:
    """Exact Gaussian sampling through the Cholesky factor of the covariance."""
    _check_num_paths(num_paths)
    if grid.num_dates > MAX_FBM_DATES:
        raise ConfigError(f"fBM sampling supports at most {MAX_FBM_DATES} dates, got {grid.num_dates}")
    factor = _fbm_factor(tuple(grid.dates[1:]), float(cfg.hurst))
    z = standard_normals(seed, _STREAM_FBM, num_paths, (cfg.d, grid.num_dates))
    values = np.empty((num_paths, grid.num_dates + 1, cfg.d))
    values[:, 0, :] = cfg.x0
    values[:, 1:, :] = cfg.x0 + np.swapaxes(z @ factor.T, 1, 2)
    return PathSet(values, grid, "fbm", seed)


def simulate(cfg, grid: TimeGrid, num_paths: int, seed: int) -> PathSet:
    """Dispatch on the type of ``cfg``."""
    if isinstance(cfg, GbmConfig):
        return simulate_gbm(cfg, grid, num_paths, seed)
    if isinstance(cfg, HestonConfig):
        return simulate_heston(cfg, grid, num_paths, seed)
    if isinstance(cfg, FbmConfig):
        return simulate_fbm(cfg, grid, num_paths, seed)
    raise ConfigError(f"unknown model config {type(cfg).__name__}")
