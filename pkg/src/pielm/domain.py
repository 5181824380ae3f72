"""Space-time boxes and the affine input normalization used by the networks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["BoxDomain", "Normalization"]


@dataclass(frozen=True)
class BoxDomain:
    """The box ``prod_j [lower_j, upper_j]`` in space, times ``(0, time_horizon)``."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    time_horizon: float = 1.0

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi) or not lo:
            raise ValueError("lower and upper bounds must be nonempty and of equal length")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError(f"every lower bound must be below its upper bound: {lo} vs {hi}")
        if self.time_horizon < 0:
            raise ValueError("time horizon must be nonnegative")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, d: int, low: float, high: float, time_horizon: float = 1.0) -> "BoxDomain":
        return cls((low,) * d, (high,) * d, time_horizon)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def lengths(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)

    def contains(self, points, atol: float = 1e-12) -> np.ndarray:
        """Row mask of space-time points lying in the closed box."""
        P = np.atleast_2d(np.asarray(points, dtype=float))
        x, t = P[:, : self.dim], P[:, self.dim]
        lo, hi = np.asarray(self.lower), np.asarray(self.upper)
        tol = atol * np.maximum(1.0, np.abs(hi))
        inside = np.all((x >= lo - tol) & (x <= hi + tol), axis=1)
        return inside & (t >= -atol) & (t <= self.time_horizon + atol)

    def corners(self) -> np.ndarray:
        """All ``2**d`` spatial corners (only sensible for small ``d``)."""
        grid = np.array(np.meshgrid(*zip(self.lower, self.upper), indexing="ij"))
        return grid.reshape(self.dim, -1).T


@dataclass(frozen=True)
class Normalization:
    """Per-coordinate map ``x -> (x - shift) / scale``; time passes through unchanged."""

    shift: tuple[float, ...]
    scale: tuple[float, ...]

    def __post_init__(self):
        shift = tuple(float(v) for v in np.atleast_1d(self.shift))
        scale = tuple(float(v) for v in np.atleast_1d(self.scale))
        if len(shift) != len(scale):
            raise ValueError("shift and scale must have equal length")
        if any(s <= 0 for s in scale):
            raise ValueError("normalization scales must be positive")
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "scale", scale)

    @classmethod
    def identity(cls, d: int) -> "Normalization":
        return cls((0.0,) * d, (1.0,) * d)

    @classmethod
    def to_unit_box(cls, domain: BoxDomain) -> "Normalization":
        return cls(domain.lower, tuple(domain.lengths))

    @property
    def dim(self) -> int:
        return len(self.shift)

    def input_scale(self) -> np.ndarray:
        """Scale of every network input, time included (time scale is 1)."""
        return np.append(np.asarray(self.scale), 1.0)

    def normalize(self, points) -> np.ndarray:
        P = np.array(points, dtype=float, ndmin=2)
        P[:, : self.dim] = (P[:, : self.dim] - np.asarray(self.shift)) / np.asarray(self.scale)
        return P

    def unnormalize(self, points) -> np.ndarray:
        P = np.array(points, dtype=float, ndmin=2)
        P[:, : self.dim] = P[:, : self.dim] * np.asarray(self.scale) + np.asarray(self.shift)
        return P
