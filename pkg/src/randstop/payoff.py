"""Exercise payoffs evaluated on (batches of) state vectors.

Payoffs act on undiscounted prices; discounting is the pricers' job.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, ShapeError


class PayoffKind(str, enum.Enum):
    MAX_CALL = "max_call"
    GEOMETRIC_PUT = "geometric_put"
    BASKET_CALL = "basket_call"
    IDENTITY = "identity"
    MAX = "max"
    MEAN = "mean"


_STRUCK = {PayoffKind.MAX_CALL, PayoffKind.GEOMETRIC_PUT, PayoffKind.BASKET_CALL}


@dataclass(frozen=True)
class Payoff:
    """Payoff ``g`` with strike ``K`` (ignored by identity, max and mean).

    Calling the payoff on an array of shape ``(..., d)`` returns shape ``(...)``.
    ``scale`` multiplies the whole payoff and is mainly useful for checking
    homogeneity of the pricers.
    """

    kind: PayoffKind
    strike: float = 100.0
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PayoffKind(self.kind))
        if self.kind in _STRUCK and not self.strike > 0:
            raise ConfigError(f"strike must be positive for {self.kind.value}, got {self.strike}")
        if not np.isfinite(self.scale) or self.scale <= 0:
            raise ConfigError(f"scale must be positive and finite, got {self.scale}")

    @property
    def non_negative(self) -> bool:
        return self.kind in _STRUCK

    def scaled(self, factor: float) -> "Payoff":
        return Payoff(self.kind, self.strike, self.scale * factor)

    def __call__(self, x) -> np.ndarray:
        return evaluate(self, x)


def evaluate(p: Payoff, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        raise ShapeError("payoff input needs a trailing asset axis")
    kind, strike = p.kind, p.strike
    if kind is PayoffKind.MAX_CALL:
        out = np.maximum(x.max(axis=-1) - strike, 0.0)
    elif kind is PayoffKind.BASKET_CALL:
        out = np.maximum(x.mean(axis=-1) - strike, 0.0)
    elif kind is PayoffKind.GEOMETRIC_PUT:
        if np.any(x <= 0):
            raise DomainError("geometric put needs strictly positive prices")
        geo = np.exp(np.log(x).mean(axis=-1))
        out = np.maximum(strike - geo, 0.0)
    elif kind is PayoffKind.IDENTITY:
        if x.shape[-1] != 1:
            raise ConfigError(f"identity payoff is only defined for d=1, got d={x.shape[-1]}")
        out = x[..., 0].copy()
    elif kind is PayoffKind.MAX:
        out = x.max(axis=-1)
    elif kind is PayoffKind.MEAN:
        out = x.mean(axis=-1)
    else:  # pragma: no cover
        raise ConfigError(f"unknown payoff kind {kind}")
    if p.scale != 1.0:
        out = p.scale * out
    return out
