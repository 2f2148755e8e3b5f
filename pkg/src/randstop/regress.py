"""Rank-robust ordinary least squares for the readout weights."""

from __future__ import annotations

import numpy as np

from .errors import NumericalError, ShapeError

RCOND = 1e-10


class LeastSquares:
    """Factored design matrix that can be solved against many targets.

    The thin SVD of ``X`` is computed once; singular values below
    ``rcond * s_max`` are treated as zero, which yields the minimum-norm
    minimiser when ``X`` is rank deficient. A positive ``ridge`` adds an L2
    penalty ``ridge * |theta|**2`` to the objective.
    """

    def __init__(self, X, rcond: float = RCOND, ridge: float = 0.0):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] < 1:
            raise ShapeError(f"design matrix must be 2-D with at least one row, got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise NumericalError("design matrix contains non-finite entries")
        if ridge < 0:
            raise ValueError(f"ridge must be non-negative, got {ridge}")
        self.shape = X.shape
        try:
            u, s, vt = np.linalg.svd(X, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD of the {X.shape} design matrix did not converge") from exc
        keep = s > rcond * s[0] if s.size and s[0] > 0 else np.zeros_like(s, dtype=bool)
        self.rank = int(keep.sum())
        if ridge > 0:
            inv = np.where(keep, s / (s * s + ridge), 0.0)
        else:
            inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
        self._u = u
        self._inv = inv
        self._vt = vt

    def solve(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.shape[0],):
            raise ShapeError(f"targets must have shape ({self.shape[0]},), got {y.shape}")
        if not np.all(np.isfinite(y)):
            raise NumericalError("regression targets contain non-finite entries")
        return self._vt.T @ (self._inv * (self._u.T @ y))


def solve_ls(X, y, rcond: float = RCOND, ridge: float = 0.0) -> np.ndarray:
    """Minimiser of ``|X theta - y|**2`` (minimum-norm when not unique)."""
    return LeastSquares(X, rcond=rcond, ridge=ridge).solve(y)
