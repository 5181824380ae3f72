"""Randomized single-hidden-layer feature networks.

A network maps an input ``z`` to ``sum_i W_i * act(A_i . z + b_i)``. The hidden
weights ``A`` and biases ``b`` are drawn once and frozen; only the output
weights ``W`` are ever fitted.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit

__all__ = [
    "Activation",
    "Analytic",
    "FiniteDifference",
    "FeatureNetwork",
    "MultiIndex",
    "init_random",
    "eval_features",
    "eval_feature_derivative",
    "eval_network",
    "resolve_backend",
]


class Activation(str, enum.Enum):
    TANH = "tanh"
    SIGMOID = "sigmoid"

    def __call__(self, z, order: int = 0):
        """Evaluate the activation (``order=0``) or its 1st/2nd derivative."""
        if self is Activation.TANH:
            s = np.tanh(z)
            if order == 0:
                return s
            ds = 1.0 - s * s
            if order == 1:
                return ds
            if order == 2:
                return -2.0 * s * ds
        else:
            s = _sigmoid(z)
            if order == 0:
                return s
            ds = s * (1.0 - s)
            if order == 1:
                return ds
            if order == 2:
                return ds * (1.0 - 2.0 * s)
        raise ValueError(f"activation derivative of order {order} not supported")

    @classmethod
    def parse(cls, value) -> "Activation":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(
                f"unknown activation {value!r}; expected one of {[a.value for a in cls]}"
            ) from None


def _sigmoid(z):
    return expit(z)


@dataclass(frozen=True)
class MultiIndex:
    """Per-coordinate derivative orders, total order at most 2."""

    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if any(e < 0 for e in entries):
            raise ValueError(f"multi-index entries must be nonnegative, got {entries}")
        if sum(entries) > 2:
            raise ValueError(f"derivative order {sum(entries)} > 2 is not supported")
        object.__setattr__(self, "entries", entries)

    @property
    def order(self) -> int:
        return sum(self.entries)

    @property
    def dim(self) -> int:
        return len(self.entries)

    @classmethod
    def zero(cls, dim: int) -> "MultiIndex":
        return cls((0,) * dim)

    @classmethod
    def unit(cls, dim: int, *axes: int) -> "MultiIndex":
        """Multi-index with one count per listed axis (``unit(3, 0, 0)`` is d^2/dz0^2)."""
        entries = [0] * dim
        for a in axes:
            entries[a] += 1
        return cls(tuple(entries))

    def axes(self) -> list[int]:
        """Expanded list of differentiated axes, e.g. (1, 0, 1) -> [0, 2]."""
        return [j for j, e in enumerate(self.entries) for _ in range(e)]


@dataclass(frozen=True)
class Analytic:
    """Closed-form derivatives of ``act(A . z + b)``."""


@dataclass(frozen=True)
class FiniteDifference:
    """Central differences: ``h1`` for first-order, ``h2`` for second-order directions."""

    h1: float = 1e-6
    h2: float = 1e-3

    def __post_init__(self):
        if not (self.h1 > 0 and self.h2 > 0):
            raise ValueError(f"finite-difference steps must be positive, got {self.h1}, {self.h2}")


def resolve_backend(backend) -> Analytic | FiniteDifference:
    if backend is None:
        return Analytic()
    if isinstance(backend, (Analytic, FiniteDifference)):
        return backend
    if isinstance(backend, str):
        key = backend.lower()
        if key == "analytic":
            return Analytic()
        if key in ("fd", "finite_difference", "finitedifference"):
            return FiniteDifference()
    raise ValueError(f"unknown derivative backend {backend!r}")


@dataclass
class FeatureNetwork:
    """Random hidden layer ``(A, b)`` plus optional trained output weights ``W``."""

    hidden_weights: np.ndarray
    hidden_biases: np.ndarray
    activation: Activation = Activation.TANH
    output_weights: np.ndarray | None = field(default=None)

    def __post_init__(self):
        A = np.array(self.hidden_weights, dtype=float, ndmin=2)
        b = np.array(self.hidden_biases, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise ValueError(f"hidden weights have {A.shape[0]} rows but {b.shape[0]} biases")
        if A.shape[0] == 0:
            raise ValueError("network width must be at least 1")
        A.setflags(write=False)
        b.setflags(write=False)
        self.hidden_weights = A
        self.hidden_biases = b
        self.activation = Activation.parse(self.activation)
        if self.output_weights is not None:
            self.set_output_weights(self.output_weights)

    @property
    def width(self) -> int:
        return self.hidden_weights.shape[0]

    @property
    def input_dim(self) -> int:
        return self.hidden_weights.shape[1]

    @property
    def is_trained(self) -> bool:
        return self.output_weights is not None

    def set_output_weights(self, weights) -> None:
        W = np.asarray(weights, dtype=float).reshape(-1)
        if W.shape[0] != self.width:
            raise ValueError(f"output weights have length {W.shape[0]}, expected {self.width}")
        self.output_weights = W

    def preactivation(self, points) -> np.ndarray:
        Z = _check_points(points, self.input_dim)
        return Z @ self.hidden_weights.T + self.hidden_biases

    @classmethod
    def concatenate(cls, nets: Sequence["FeatureNetwork"]) -> "FeatureNetwork":
        """Stack several networks side by side into one wider network."""
        act = nets[0].activation
        if any(n.activation is not act for n in nets):
            raise ValueError("cannot concatenate networks with different activations")
        return cls(
            np.vstack([n.hidden_weights for n in nets]),
            np.concatenate([n.hidden_biases for n in nets]),
            act,
        )


_EVAL_BLOCK_FLOATS = 1 << 23


def _check_points(points, input_dim: int) -> np.ndarray:
    Z = np.asarray(points, dtype=float)
    if Z.ndim == 1:
        Z = Z.reshape(1, -1)
    if Z.ndim != 2 or Z.shape[1] != input_dim:
        raise ValueError(f"points must have shape (n, {input_dim}), got {np.shape(points)}")
    return Z


def init_random(
    input_dim: int,
    width: int,
    activation=Activation.TANH,
    weight_low: float = -0.01,
    weight_high: float = 0.01,
    seed: int = 0,
) -> FeatureNetwork:
    """Draw ``A`` (row-major) then ``b`` i.i.d. uniform on ``[weight_low, weight_high]``.

    The stream is numpy's PCG64 seeded through ``SeedSequence(seed)``, so the
    same ``(seed, input_dim, width, range)`` always produce identical arrays.
    """
    if not weight_low < weight_high:
        raise ValueError(f"invalid weight range [{weight_low}, {weight_high}]")
    if int(width) < 1:
        raise ValueError(f"width must be at least 1, got {width}")
    if int(input_dim) < 1:
        raise ValueError(f"input_dim must be at least 1, got {input_dim}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    A = rng.uniform(weight_low, weight_high, size=(int(width), int(input_dim)))
    b = rng.uniform(weight_low, weight_high, size=int(width))
    return FeatureNetwork(A, b, Activation.parse(activation))


def eval_features(net: FeatureNetwork, points) -> np.ndarray:
    """Feature matrix with entry ``(k, i) = act(A_i . z_k + b_i)``."""
    return net.activation(net.preactivation(points))


def eval_feature_derivative(net: FeatureNetwork, points, alpha, backend=None) -> np.ndarray:
    """Partial derivative ``D^alpha`` of every feature at every point.

    ``alpha`` is a :class:`MultiIndex` (or a plain sequence of orders) over the
    network input coordinates.
    """
    if not isinstance(alpha, MultiIndex):
        alpha = MultiIndex(tuple(alpha))
    if alpha.dim != net.input_dim:
        raise ValueError(f"multi-index has length {alpha.dim}, network input_dim is {net.input_dim}")
    backend = resolve_backend(backend)
    Z = _check_points(points, net.input_dim)
    if alpha.order == 0:
        return eval_features(net, Z)
    if isinstance(backend, Analytic):
        scale = np.ones(net.width)
        for j in alpha.axes():
            scale = scale * net.hidden_weights[:, j]
        return net.activation(net.preactivation(Z), alpha.order) * scale
    return _finite_difference(net, Z, alpha, backend)


def _finite_difference(net, Z, alpha: MultiIndex, fd: FiniteDifference) -> np.ndarray:
    axes = alpha.axes()

    def shifted(*steps):
        Zs = Z.copy()
        for j, h in steps:
            Zs[:, j] += h
        return eval_features(net, Zs)

    if alpha.order == 1:
        (j,) = axes
        h = fd.h1
        return (shifted((j, h)) - shifted((j, -h))) / (2.0 * h)
    j, k = axes
    h = fd.h2
    if j == k:
        return (shifted((j, h)) - 2.0 * eval_features(net, Z) + shifted((j, -h))) / (h * h)
    # 4-point cross stencil
    return (
        shifted((j, h), (k, h))
        - shifted((j, h), (k, -h))
        - shifted((j, -h), (k, h))
        + shifted((j, -h), (k, -h))
    ) / (4.0 * h * h)


def eval_network(net: FeatureNetwork, points) -> np.ndarray:
    """Network output ``eval_features(net, points) @ W``."""
    if net.output_weights is None:
        raise ValueError("network is untrained: output weights are not set")
    Z = _check_points(points, net.input_dim)
    # bounded memory for large test sets
    rows = max(1, _EVAL_BLOCK_FLOATS // net.width)
    if len(Z) <= rows:
        return eval_features(net, Z) @ net.output_weights
    return np.concatenate(
        [eval_features(net, Z[k : k + rows]) @ net.output_weights for k in range(0, len(Z), rows)]
    )
