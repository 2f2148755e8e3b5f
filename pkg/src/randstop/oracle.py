"""Reference prices for single-asset options under Black-Scholes.

Used as ground truth in tests: the closed-form European price and a
Cox-Ross-Rubinstein tree with a configurable set of exercise levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np
from scipy.special import ndtr

from .errors import ConfigError

STEPS_PER_DATE = 200


def _intrinsic(kind: str, s, strike):
    if kind == "call":
        return np.maximum(s - strike, 0.0)
    if kind == "put":
        return np.maximum(strike - s, 0.0)
    raise ConfigError(f"option kind must be 'call' or 'put', got {kind!r}")


def bs_european(kind: str, x0: float, strike: float, r: float, sigma: float, T: float) -> float:
    """Black-Scholes price of a European call or put (no dividends)."""
    if x0 <= 0 or strike <= 0 or T <= 0:
        raise ConfigError("x0, strike and T must be positive")
    if sigma < 0:
        raise ConfigError("sigma must be non-negative")
    df = math.exp(-r * T)
    if sigma == 0:
        return float(_intrinsic(kind, x0, strike * df))
    vol = sigma * math.sqrt(T)
    d1 = (math.log(x0 / strike) + (r + 0.5 * sigma**2) * T) / vol
    d2 = d1 - vol
    if kind == "call":
        return float(x0 * ndtr(d1) - strike * df * ndtr(d2))
    if kind == "put":
        return float(strike * df * ndtr(-d2) - x0 * ndtr(-d1))
    raise ConfigError(f"option kind must be 'call' or 'put', got {kind!r}")


@dataclass(frozen=True)
class TreeSpec:
    steps: int
    r: float
    sigma: float
    T: float
    x0: float
    strike: float
    exercise_dates: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "exercise_dates", frozenset(int(k) for k in self.exercise_dates))
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if self.x0 <= 0 or self.strike <= 0 or self.T <= 0 or self.sigma < 0:
            raise ConfigError("x0, strike, T must be positive and sigma non-negative")
        if any(k < 0 or k > self.steps for k in self.exercise_dates):
            raise ConfigError("exercise levels must lie in 0..steps")

    @classmethod
    def bermudan(
        cls,
        num_dates: int,
        r: float,
        sigma: float,
        T: float,
        x0: float,
        strike: float,
        steps_per_date: int = STEPS_PER_DATE,
        include_start: bool = True,
    ) -> "TreeSpec":
        """Tree whose exercise levels coincide with ``num_dates`` equidistant dates."""
        steps = steps_per_date * num_dates
        first = 0 if include_start else 1
        levels = frozenset(k * steps_per_date for k in range(first, num_dates + 1))
        return cls(steps, r, sigma, T, x0, strike, levels)


def tree_price(spec: TreeSpec, kind: str) -> float:
    """Backward induction on a recombining CRR tree.

    Early exercise is allowed only on ``spec.exercise_dates``; maturity is
    always paid out.
    """
    n, dt = spec.steps, spec.T / spec.steps
    df = math.exp(-spec.r * dt)
    levels = spec.exercise_dates
    if spec.sigma == 0:
        # Degenerate tree: a single deterministic path.
        best = -math.inf
        for k in sorted(levels | {n}):
            s = spec.x0 * math.exp(spec.r * k * dt)
            best = max(best, math.exp(-spec.r * k * dt) * float(_intrinsic(kind, s, spec.strike)))
        return best
    u = math.exp(spec.sigma * math.sqrt(dt))
    d = 1.0 / u
    q = (1.0 / df - d) / (u - d)
    if not 0 < q < 1:
        raise ConfigError(f"risk-neutral probability {q:.4f} outside (0, 1); increase steps")
    j = np.arange(n + 1)
    values = _intrinsic(kind, spec.x0 * u ** (2 * j - n), spec.strike)
    for level in range(n - 1, -1, -1):
        values = df * (q * values[1:] + (1 - q) * values[:-1])
        if level in levels:
            j = np.arange(level + 1)
            values = np.maximum(values, _intrinsic(kind, spec.x0 * u ** (2 * j - level), spec.strike))
    return float(values[0])


def bermudan_oracle(
    kind: str,
    x0: float,
    strike: float,
    r: float,
    sigma: float,
    T: float,
    num_dates: int,
    steps_per_date: int = STEPS_PER_DATE,
) -> float:
    """Bermudan price with exercise at ``t_0, ..., t_N`` on an aligned tree."""
    spec = TreeSpec.bermudan(num_dates, r, sigma, T, x0, strike, steps_per_date)
    return tree_price(spec, kind)
