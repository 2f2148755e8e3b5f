"""Frozen random hidden layers and the degree-2 polynomial basis.

Every feature map here ends with a constant column equal to exactly 1, so a
readout ``theta`` of length ``K`` carries its own intercept.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError

DEFAULT_LEAKY_SLOPE = 0.01
RRLSM_INPUT_STD = 0.0008
RRLSM_RECURRENT_STD = 0.11


class ActivationKind(str, enum.Enum):
    LEAKY_RELU = "leaky_relu"
    TANH = "tanh"


@dataclass(frozen=True)
class Activation:
    kind: ActivationKind = ActivationKind.LEAKY_RELU
    slope: float = DEFAULT_LEAKY_SLOPE

    def __post_init__(self):
        object.__setattr__(self, "kind", ActivationKind(self.kind))
        if self.kind is ActivationKind.LEAKY_RELU and not 0 < self.slope < 1:
            raise ConfigError(f"leaky ReLU slope must lie in (0, 1), got {self.slope}")

    def __call__(self, z: np.ndarray) -> np.ndarray:
        if self.kind is ActivationKind.TANH:
            return np.tanh(z)
        return np.where(z >= 0, z, self.slope * z)


LEAKY_RELU = Activation(ActivationKind.LEAKY_RELU)
TANH = Activation(ActivationKind.TANH)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ConfigError("basis parameters must be finite")
    a.setflags(write=False)
    return a


def _with_constant(hidden: np.ndarray) -> np.ndarray:
    out = np.empty(hidden.shape[:-1] + (hidden.shape[-1] + 1,))
    out[..., :-1] = hidden
    out[..., -1] = 1.0
    return out


def _rng(seed: int, tag: int) -> np.random.Generator:
    ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, tag])
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True, eq=False)
class RandomBasis:
    """Feedforward random layer ``x -> (act(A x + b), 1)``."""

    A: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    activation: Activation = LEAKY_RELU

    def __post_init__(self):
        A, b = _frozen(self.A), _frozen(self.b)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise ShapeError(f"A must be (K-1, in_dim) and b (K-1,), got {A.shape} and {b.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def K(self) -> int:
        return self.A.shape[0] + 1

    @property
    def in_dim(self) -> int:
        return self.A.shape[1]

    def __call__(self, x) -> np.ndarray:
        return eval_feedforward(self, x)

    def digest(self) -> str:
        h = hashlib.sha256()
        for arr in (self.A, self.b):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update(repr(self.activation).encode())
        return h.hexdigest()


@dataclass(frozen=True, eq=False)
class RecurrentBasis:
    """Random reservoir ``h_n = act(A_x x_n + A_h h_{n-1} + b)`` with ``h_0 = 0``."""

    A_x: np.ndarray = field(repr=False)
    A_h: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    activation: Activation = TANH

    def __post_init__(self):
        A_x, A_h, b = _frozen(self.A_x), _frozen(self.A_h), _frozen(self.b)
        hidden = b.shape[0] if b.ndim == 1 else -1
        if A_x.ndim != 2 or A_x.shape[0] != hidden or A_h.shape != (hidden, hidden):
            raise ShapeError(
                f"inconsistent reservoir shapes A_x={A_x.shape}, A_h={A_h.shape}, b={b.shape}"
            )
        object.__setattr__(self, "A_x", A_x)
        object.__setattr__(self, "A_h", A_h)
        object.__setattr__(self, "b", b)

    @property
    def K(self) -> int:
        return self.b.shape[0] + 1

    @property
    def in_dim(self) -> int:
        return self.A_x.shape[1]

    def digest(self) -> str:
        h = hashlib.sha256()
        for arr in (self.A_x, self.A_h, self.b):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update(repr(self.activation).encode())
        return h.hexdigest()

    def feedforward_equivalent(self) -> RandomBasis:
        """The feedforward layer ``(A_x, b)`` this reservoir reduces to when ``A_h = 0``."""
        return RandomBasis(self.A_x, self.b, self.activation)


@dataclass(frozen=True)
class PolyBasis:
    """All monomials of degree <= 2 in ``d`` variables."""

    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ConfigError(f"d must be >= 1, got {self.d}")

    @property
    def size(self) -> int:
        return 1 + 2 * self.d + self.d * (self.d - 1) // 2

    @property
    def K(self) -> int:
        return self.size

    @property
    def in_dim(self) -> int:
        return self.d

    def __call__(self, x) -> np.ndarray:
        return eval_poly(self, x)


def init_random_basis(
    in_dim: int,
    K: int,
    weight_std: float = 1.0,
    bias_std: float = 1.0,
    activation: Activation = LEAKY_RELU,
    seed: int = 0,
) -> RandomBasis:
    """Draw ``A`` and ``b`` with i.i.d. centred normal entries."""
    if K < 2:
        raise ConfigError(f"K must be >= 2 (at least one hidden node), got {K}")
    if in_dim < 1:
        raise ConfigError(f"in_dim must be >= 1, got {in_dim}")
    if weight_std < 0 or bias_std < 0:
        raise ConfigError("standard deviations must be non-negative")
    rng = _rng(seed, 0)
    A = weight_std * rng.standard_normal((K - 1, in_dim))
    b = bias_std * rng.standard_normal(K - 1)
    return RandomBasis(A, b, activation)


def init_recurrent_basis(
    d: int,
    K: int,
    input_std: float = RRLSM_INPUT_STD,
    recurrent_std: float = RRLSM_RECURRENT_STD,
    bias_std: float = 1.0,
    activation: Activation = TANH,
    seed: int = 0,
) -> RecurrentBasis:
    if K < 2:
        raise ConfigError(f"K must be >= 2 (at least one hidden node), got {K}")
    if d < 1:
        raise ConfigError(f"d must be >= 1, got {d}")
    if min(input_std, recurrent_std, bias_std) < 0:
        raise ConfigError("standard deviations must be non-negative")
    rng = _rng(seed, 1)
    A_x = input_std * rng.standard_normal((K - 1, d))
    A_h = recurrent_std * rng.standard_normal((K - 1, K - 1))
    b = bias_std * rng.standard_normal(K - 1)
    return RecurrentBasis(A_x, A_h, b, activation)


def _check_last_axis(x: np.ndarray, expected: int, what: str):
    if x.ndim == 0 or x.shape[-1] != expected:
        raise ShapeError(f"{what} expects trailing dimension {expected}, got shape {x.shape}")


def eval_feedforward(basis: RandomBasis, x) -> np.ndarray:
    """Features ``(act(A x + b), 1)`` for ``x`` of shape ``(..., in_dim)``."""
    x = np.asarray(x, dtype=float)
    _check_last_axis(x, basis.in_dim, "random basis")
    return _with_constant(basis.activation(x @ basis.A.T + basis.b))


def augment_time(n, N: int, x) -> np.ndarray:
    """Prepend the raw date counters ``(n, N - n)`` to ``x``."""
    x = np.asarray(x, dtype=float)
    n = np.broadcast_to(np.asarray(n, dtype=float), x.shape[:-1])
    if np.any(n < 0) or np.any(n > N):
        raise ConfigError(f"date index must lie in [0, {N}]")
    return np.concatenate([n[..., None], (N - n)[..., None], x], axis=-1)


def augment_relative_time(t_over_T, x) -> np.ndarray:
    """Append the relative date ``t/T`` and ``1 - t/T`` to ``x``."""
    x = np.asarray(x, dtype=float)
    s = np.broadcast_to(np.asarray(t_over_T, dtype=float), x.shape[:-1])
    return np.concatenate([x, s[..., None], (1.0 - s)[..., None]], axis=-1)


def eval_time_augmented(basis: RandomBasis, n, N: int, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    _check_last_axis(x, basis.in_dim - 2, "time-augmented basis")
    return eval_feedforward(basis, augment_time(n, N, x))


def recurrent_step(basis: RecurrentBasis, x, h_prev) -> np.ndarray:
    """One reservoir update; returns the new hidden state (without the constant)."""
    x = np.asarray(x, dtype=float)
    h_prev = np.asarray(h_prev, dtype=float)
    _check_last_axis(x, basis.in_dim, "reservoir input")
    _check_last_axis(h_prev, basis.K - 1, "reservoir state")
    return basis.activation(x @ basis.A_x.T + h_prev @ basis.A_h.T + basis.b)


def recurrent_states(basis: RecurrentBasis, x_path: np.ndarray, num_states: int) -> np.ndarray:
    """Sweep the reservoir over dates ``1..num_states`` of every path.

    ``x_path`` has shape ``(paths, N + 1, d)``; the result has shape
    ``(paths, num_states + 1, K - 1)`` with row 0 equal to ``h_0 = 0`` and row
    ``n`` the state after reading ``x_n``.
    """
    x_path = np.asarray(x_path, dtype=float)
    states = np.zeros((x_path.shape[0], num_states + 1, basis.K - 1))
    for n in range(1, num_states + 1):
        states[:, n] = recurrent_step(basis, x_path[:, n], states[:, n - 1])
    return states


def eval_poly(pb: PolyBasis, x) -> np.ndarray:
    """``[1, x_i, x_i**2, x_i*x_j for i<j]`` with cross terms in lexicographic order."""
    x = np.asarray(x, dtype=float)
    _check_last_axis(x, pb.d, "polynomial basis")
    d = pb.d
    out = np.empty(x.shape[:-1] + (pb.size,))
    out[..., 0] = 1.0
    out[..., 1 : 1 + d] = x
    out[..., 1 + d : 1 + 2 * d] = x * x
    i, j = np.triu_indices(d, k=1)
    out[..., 1 + 2 * d :] = x[..., i] * x[..., j]
    return out
