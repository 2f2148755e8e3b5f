"""Regression-based optimal stopping pricers.

Two control flows cover all five algorithms:

* backward induction (RLSM, RRLSM, LSM): one readout per date, fitted on the
  training half; the continuation estimate is used only to decide whether to
  stop, and the price is the discounted payoff of the resulting rule;
* fitted iteration (RFQI, FQI): one readout shared by all dates through a
  time-augmented input, refitted until it stops moving; by default the price
  is again the discounted payoff of the rule "stop once ``g >= c``".

In both, paths ``0..m-1`` are the training half and ``m..2m-1`` the
evaluation half; only the evaluation half contributes to the price.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, ShapeError
from .features import (
    PolyBasis,
    RandomBasis,
    RecurrentBasis,
    augment_relative_time,
    augment_time,
    eval_feedforward,
    eval_poly,
    recurrent_states,
)
from .regress import LeastSquares
from .sim import PathSet

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITERS = 100
POLY_COST_WARN_DIM = 40
EVALUATIONS = ("rule", "max")

PayoffFn = Callable[[np.ndarray], np.ndarray]


class OverfitWarning(UserWarning):
    """Fewer training paths than regression features."""


class CostWarning(UserWarning):
    """The polynomial basis is large enough to make regression slow."""


@dataclass
class ThetaSchedule:
    """Trained readout weights.

    ``per_date[n - 1]`` is the readout for date ``n`` (backward induction);
    ``global_`` is the single shared readout (fitted iteration).
    """

    per_date: Optional[np.ndarray] = None
    global_: Optional[np.ndarray] = None

    def __post_init__(self):
        if (self.per_date is None) == (self.global_ is None):
            raise ValueError("exactly one of per_date and global_ must be set")

    @property
    def num_parameters(self) -> int:
        weights = self.per_date if self.per_date is not None else self.global_
        return int(np.asarray(weights).size)


@dataclass
class PriceEstimate:
    price: float
    exercise_fraction: np.ndarray
    theta: ThetaSchedule
    duration: float
    seed: int
    path_values: np.ndarray = field(repr=False)
    stopping_dates: Optional[np.ndarray] = field(default=None, repr=False)
    iterations: Optional[int] = None
    converged: bool = True
    warnings: list = field(default_factory=list)


def discount_factor(r: float, paths: PathSet) -> float:
    """Step-wise discount ``exp(-r * dt)`` for the paths' (equidistant) grid."""
    return paths.grid.discount_factor(r)


def default_hidden_size(algo: str, d: int) -> int:
    """Hidden width: 20 nodes, capped at the number of assets for RFQI."""
    return min(20, d) if algo.lower() == "rfqi" else 20


def _check_alpha(alpha: float):
    if not 0 < alpha <= 1:
        raise ConfigError(f"discount factor must lie in (0, 1], got {alpha}")


def _payoff_matrix(payoff: PayoffFn, paths: PathSet) -> np.ndarray:
    g = np.asarray(payoff(paths.values), dtype=float)
    if g.shape != paths.values.shape[:2]:
        raise ShapeError(f"payoff returned shape {g.shape}, expected {paths.values.shape[:2]}")
    return g


def _backward_induction(
    paths: PathSet,
    payoff: PayoffFn,
    alpha: float,
    features: Callable[[int], np.ndarray],
    K: int,
    itm_only: bool = False,
    ridge: float = 0.0,
) -> PriceEstimate:
    _check_alpha(alpha)
    start = time.perf_counter()
    notes = []
    m, N = paths.m, paths.grid.num_dates
    if m < K:
        msg = f"{m} training paths for {K} features: the readout will overfit"
        warnings.warn(msg, OverfitWarning, stacklevel=3)
        notes.append(msg)
    g = _payoff_matrix(payoff, paths)

    # Each path carries its stopping date and the payoff collected there; the
    # pathwise value at date n is then alpha**(tau - n) * g(x_tau).
    tau = np.full(paths.num_paths, N)
    g_tau = g[:, N].copy()
    thetas = np.zeros((max(N - 1, 0), K))
    for n in range(N - 1, 0, -1):
        phi = features(n)
        target = g_tau[:m] * alpha ** (tau[:m] - n)
        rows = g[:m, n] > 0 if itm_only else slice(None)
        if itm_only and not np.any(rows):
            notes.append(f"date {n}: no in-the-money training path, exercise skipped")
            continue
        theta = LeastSquares(phi[:m][rows], ridge=ridge).solve(target[rows])
        thetas[n - 1] = theta
        exercise = g[:, n] >= phi @ theta
        if itm_only:
            exercise &= g[:, n] > 0
        tau[exercise] = n
        g_tau[exercise] = g[exercise, n]

    p1 = g_tau * alpha ** (tau - 1)
    continuation = float(np.mean(alpha * p1[m:]))
    price = max(float(g[0, 0]), continuation)
    fraction = np.array([np.mean(tau[m:] == n) for n in range(1, N + 1)])
    return PriceEstimate(
        price=price,
        exercise_fraction=fraction,
        theta=ThetaSchedule(per_date=thetas),
        duration=time.perf_counter() - start,
        seed=paths.seed,
        path_values=p1,
        stopping_dates=tau,
        warnings=notes,
    )


def _fitted_iteration(
    paths: PathSet,
    payoff: PayoffFn,
    alpha: float,
    features: Callable[[int, slice], np.ndarray],
    K: int,
    tol: float,
    max_iters: int,
    ridge: float = 0.0,
    evaluation: str = "rule",
) -> PriceEstimate:
    _check_alpha(alpha)
    if evaluation not in EVALUATIONS:
        raise ConfigError(f"evaluation must be one of {EVALUATIONS}, got {evaluation!r}")
    if max_iters < 1:
        raise ConfigError(f"max_iters must be >= 1, got {max_iters}")
    start = time.perf_counter()
    notes = []
    m, N = paths.m, paths.grid.num_dates
    train, held_out = slice(0, m), slice(m, None)
    g = _payoff_matrix(payoff, paths)
    theta = np.zeros(K)
    iterations, converged = 0, True

    tau = np.full(paths.num_paths, N)
    if N > 1:
        if m * (N - 1) < K:
            msg = f"{m * (N - 1)} pooled training rows for {K} features: the readout will overfit"
            warnings.warn(msg, OverfitWarning, stacklevel=3)
            notes.append(msg)
        # Rows are ordered date-major: row (n - 1) * m + i is path i at date n.
        phi = np.concatenate([features(n, train) for n in range(1, N)], axis=0)
        solver = LeastSquares(phi, ridge=ridge)
        g_inner = g[train, 1:N].T
        g_last = g[train, N]
        converged = False
        for iterations in range(1, max_iters + 1):
            value = np.maximum(g_inner, (phi @ theta).reshape(N - 1, m))
            next_value = np.vstack([value[1:], g_last[None]])
            new_theta = solver.solve(alpha * next_value.ravel())
            step = np.linalg.norm(new_theta - theta)
            theta = new_theta
            if step <= tol * np.linalg.norm(new_theta):
                converged = True
                break
        if not converged:
            notes.append(f"readout did not converge within {max_iters} iterations")
        c_train = (phi @ theta).reshape(N - 1, m).T
        c_eval = np.stack([features(n, held_out) @ theta for n in range(1, N)], axis=1)
        continuation = np.concatenate([c_train, c_eval], axis=0)
        exercise = g[:, 1:N] >= continuation
        # First date at which the learned rule stops, N if it never does.
        tau = np.where(exercise.any(axis=1), exercise.argmax(axis=1) + 1, N)

    g_tau = g[np.arange(paths.num_paths), tau]
    if evaluation == "rule" or N == 1:
        p1 = g_tau * alpha ** (tau - 1)
    else:
        p1 = np.maximum(g[:, 1], continuation[:, 0])
    fraction = np.array([np.mean(tau[m:] == n) for n in range(1, N + 1)])
    price = max(float(g[0, 0]), float(np.mean(alpha * p1[m:])))
    return PriceEstimate(
        price=price,
        exercise_fraction=fraction,
        theta=ThetaSchedule(global_=theta),
        duration=time.perf_counter() - start,
        seed=paths.seed,
        path_values=p1,
        stopping_dates=tau if evaluation == "rule" else None,
        iterations=iterations,
        converged=converged,
        warnings=notes,
    )


def price_rlsm(
    paths: PathSet,
    g: PayoffFn,
    alpha: float,
    basis: RandomBasis,
    itm_only: bool = False,
    ridge: float = 0.0,
) -> PriceEstimate:
    """Randomized least squares Monte Carlo."""
    if basis.in_dim != paths.d:
        raise ShapeError(f"basis expects {basis.in_dim} inputs, paths have d={paths.d}")
    x = paths.values
    return _backward_induction(
        paths, g, alpha, lambda n: eval_feedforward(basis, x[:, n]), basis.K, itm_only, ridge
    )


def price_rrlsm(
    paths: PathSet,
    g: PayoffFn,
    alpha: float,
    basis: RecurrentBasis,
    itm_only: bool = False,
    ridge: float = 0.0,
) -> PriceEstimate:
    """Randomized recurrent least squares Monte Carlo."""
    if basis.in_dim != paths.d:
        raise ShapeError(f"reservoir expects {basis.in_dim} inputs, paths have d={paths.d}")
    states = recurrent_states(basis, paths.values, paths.grid.num_dates - 1)
    phi = np.concatenate([states, np.ones(states.shape[:2] + (1,))], axis=-1)
    return _backward_induction(paths, g, alpha, lambda n: phi[:, n], basis.K, itm_only, ridge)


def price_lsm(
    paths: PathSet,
    g: PayoffFn,
    alpha: float,
    pb: Optional[PolyBasis] = None,
    itm_only: bool = False,
    ridge: float = 0.0,
) -> PriceEstimate:
    """Longstaff-Schwartz with all monomials up to degree two."""
    pb = pb or PolyBasis(paths.d)
    if pb.d != paths.d:
        raise ShapeError(f"polynomial basis has d={pb.d}, paths have d={paths.d}")
    if pb.d > POLY_COST_WARN_DIM:
        warnings.warn(f"degree-2 basis has {pb.size} terms for d={pb.d}", CostWarning, stacklevel=2)
    x = paths.values
    return _backward_induction(
        paths, g, alpha, lambda n: eval_poly(pb, x[:, n]), pb.size, itm_only, ridge
    )


def price_rfqi(
    paths: PathSet,
    g: PayoffFn,
    alpha: float,
    basis: RandomBasis,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    ridge: float = 0.0,
    evaluation: str = "rule",
) -> PriceEstimate:
    """Randomized fitted Q-iteration on inputs ``(n, N - n, x_n)``.

    With ``evaluation="rule"`` the price is the value of the stopping rule
    "stop at the first date where ``g >= c``" on the evaluation half, a
    low-biased estimate like the backward-induction pricers. ``"max"``
    prices with ``max(g(x_1), c(1, x_1))`` instead, which inherits any
    upward error of the fitted continuation.
    """
    if basis.in_dim != paths.d + 2:
        raise ShapeError(f"time-augmented basis needs {paths.d + 2} inputs, got {basis.in_dim}")
    x, N = paths.values, paths.grid.num_dates

    def features(n, rows):
        return eval_feedforward(basis, augment_time(n, N, x[rows, n]))

    return _fitted_iteration(paths, g, alpha, features, basis.K, tol, max_iters, ridge, evaluation)


def price_fqi(
    paths: PathSet,
    g: PayoffFn,
    alpha: float,
    pb: Optional[PolyBasis] = None,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    ridge: float = 0.0,
    evaluation: str = "rule",
) -> PriceEstimate:
    """Fitted Q-iteration with degree-2 polynomials of ``(x, t/T, 1 - t/T)``.

    ``evaluation`` is as for :func:`price_rfqi`.
    """
    pb = pb or PolyBasis(paths.d + 2)
    if pb.d != paths.d + 2:
        raise ShapeError(f"FQI polynomial basis needs d={paths.d + 2}, got {pb.d}")
    x, grid = paths.values, paths.grid
    if pb.d > POLY_COST_WARN_DIM:
        warnings.warn(f"degree-2 basis has {pb.size} terms for d={pb.d}", CostWarning, stacklevel=2)

    def features(n, rows):
        return eval_poly(pb, augment_relative_time(grid.dates[n] / grid.maturity, x[rows, n]))

    return _fitted_iteration(paths, g, alpha, features, pb.size, tol, max_iters, ridge, evaluation)
