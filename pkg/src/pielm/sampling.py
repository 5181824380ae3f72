"""Collocation points, test points and Monte Carlo (Feynman-Kac) boundary data.

Every routine is a pure function of its inputs and an integer seed. Seeds are
expanded through ``numpy.random.SeedSequence`` with a fixed stream tag so that
collocation, test and Monte Carlo draws never share a stream.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .domain import BoxDomain

__all__ = [
    "CollocationSet",
    "BlackScholesModel",
    "HestonModel",
    "McBoundarySpec",
    "sample_collocation",
    "sample_test_set",
    "bs_boundary_values",
    "heston_boundary_values",
    "mc_expectation",
    "rng_for",
]

# stream tags mixed into every SeedSequence
_COLLOCATION = 0xC011
_TEST = 0x7E57
_MC_FRESH = 0x3C0
_MC_SHARED = 0x5A2ED

# upper bound on floats materialized per Monte Carlo block
_MC_BLOCK_FLOATS = 1 << 22


def rng_for(seed: int, *stream) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *stream])))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PIELM_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class CollocationSet:
    """Interior, spatial-boundary and initial-time points, each of shape ``(n, d + 1)``."""

    interior: np.ndarray
    spatial_boundary: np.ndarray
    temporal_boundary: np.ndarray

    @property
    def counts(self) -> tuple[int, int, int]:
        return len(self.interior), len(self.spatial_boundary), len(self.temporal_boundary)


def sample_collocation(domain: BoxDomain, n_int: int, n_sb: int, n_tb: int, seed: int = 0) -> CollocationSet:
    """Uniform random collocation points for a space-time box.

    Boundary faces are picked with probability proportional to their
    ``(d-1)``-volume, so the spatial-boundary points are uniform on the surface
    even when the box is not a cube.
    """
    if min(n_int, n_sb, n_tb) < 0:
        raise ValueError("collocation counts must be nonnegative")
    d = domain.dim
    lo, hi = np.asarray(domain.lower), np.asarray(domain.upper)
    T = domain.time_horizon
    rng = rng_for(seed, _COLLOCATION)

    interior = np.empty((n_int, d + 1))
    interior[:, :d] = rng.uniform(lo, hi, size=(n_int, d))
    interior[:, d] = rng.uniform(0.0, T, size=n_int)

    spatial = np.empty((n_sb, d + 1))
    spatial[:, :d] = rng.uniform(lo, hi, size=(n_sb, d))
    spatial[:, d] = rng.uniform(0.0, T, size=n_sb)
    lengths = domain.lengths
    # area of the face orthogonal to axis j is prod(lengths) / lengths[j]
    face_weight = 1.0 / lengths
    axis = rng.choice(d, size=n_sb, p=face_weight / face_weight.sum())
    upper_side = rng.random(n_sb) < 0.5
    rows = np.arange(n_sb)
    spatial[rows, axis] = np.where(upper_side, hi[axis], lo[axis])

    temporal = np.zeros((n_tb, d + 1))
    temporal[:, :d] = rng.uniform(lo, hi, size=(n_tb, d))
    return CollocationSet(interior, spatial, temporal)


def sample_test_set(domain: BoxDomain, n_test: int, seed: int = 0) -> np.ndarray:
    """Uniform points on the closed space-time box, shape ``(n_test, d + 1)``."""
    if n_test < 1:
        raise ValueError("n_test must be at least 1")
    d = domain.dim
    rng = rng_for(seed, _TEST)
    P = np.empty((n_test, d + 1))
    P[:, :d] = rng.uniform(domain.lower, domain.upper, size=(n_test, d))
    P[:, d] = rng.uniform(0.0, domain.time_horizon, size=n_test)
    return P


@dataclass(frozen=True)
class BlackScholesModel:
    """Uncorrelated geometric Brownian motions with common drift ``mu``."""

    mu: float
    volatilities: tuple[float, ...]

    def __post_init__(self):
        vol = tuple(float(v) for v in np.atleast_1d(self.volatilities))
        if any(v <= 0 for v in vol):
            raise ValueError("volatilities must be positive")
        object.__setattr__(self, "volatilities", vol)

    @property
    def dim(self) -> int:
        return len(self.volatilities)

    def noise_channels(self) -> int:
        return self.dim

    def terminal(self, x: np.ndarray, t: np.ndarray, Z: np.ndarray) -> np.ndarray:
        """States at time ``t`` given standard normals ``Z``.

        ``x``: ``(b, d)``, ``t``: ``(b,)``, ``Z``: ``(b or 1, n_s, d)`` -> ``(b, n_s, d)``.
        """
        eps = np.asarray(self.volatilities)
        t = t[:, None, None]
        drift = (self.mu - 0.5 * eps**2) * t
        return x[:, None, :] * np.exp(drift + eps * np.sqrt(t) * Z)


@dataclass(frozen=True)
class HestonModel:
    """Multi-asset Heston dynamics in (stock, variance) coordinate pairs.

    The sample paths follow the truncated closed-form step used for the
    boundary data: for each pair the stock is
    ``x_s exp((alpha - v/2) t + sqrt(t) Z1 sqrt(v))`` and the variance is
    ``max(max(c, max(c, sqrt(v)) + beta/2 (rho W1 + sqrt(1-rho^2) W2))^2
    + (kappa theta - beta^2/4 - kappa v) t, 0)`` with ``c = beta/2 sqrt(t)``.
    """

    alpha: float = 0.05
    beta: float = 0.2
    kappa: float = 0.6
    theta: float = 0.04
    rho: float = -0.2

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"correlation rho must lie in [-1, 1], got {self.rho}")
        if self.kappa <= 0 or self.theta <= 0:
            raise ValueError("kappa and theta must be positive")
        if not 2.0 * self.kappa * self.theta > self.beta**2:
            raise ValueError(
                f"Feller condition violated: 2*kappa*theta = {2 * self.kappa * self.theta} "
                f"<= beta^2 = {self.beta**2}"
            )

    def noise_channels(self, d: int) -> int:
        return d

    def terminal(self, x: np.ndarray, t: np.ndarray, Z: np.ndarray) -> np.ndarray:
        d = x.shape[1]
        if d % 2:
            raise ValueError(f"Heston dimension must be even, got {d}")
        s, v = x[:, None, 0::2], x[:, None, 1::2]
        sqrt_t = np.sqrt(t)[:, None, None]
        t = t[:, None, None]
        W1 = sqrt_t * Z[..., 0::2]
        W2 = sqrt_t * Z[..., 1::2]
        sqrt_v = np.sqrt(v)
        stock = s * np.exp((self.alpha - 0.5 * v) * t + W1 * sqrt_v)
        c = 0.5 * self.beta * sqrt_t
        noise = 0.5 * self.beta * (self.rho * W1 + np.sqrt(1.0 - self.rho**2) * W2)
        inner = np.maximum(c, np.maximum(c, sqrt_v) + noise)
        drift = (self.kappa * self.theta - 0.25 * self.beta**2 - self.kappa * v) * t
        var = np.maximum(inner**2 + drift, 0.0)
        out = np.empty(np.broadcast_shapes(stock.shape[:-1], Z.shape[:-1]) + (d,))
        out[..., 0::2] = stock
        out[..., 1::2] = var
        return out


Model = Union[BlackScholesModel, HestonModel]
Payoff = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class McBoundarySpec:
    """Sample size, dynamics and seed of a Feynman-Kac sample mean."""

    n_samples: int
    model: Model
    seed: int = 0
    shared_noise: bool = False

    def __post_init__(self):
        if int(self.n_samples) < 1:
            raise ValueError("n_samples must be at least 1")


def _channels(model: Model, d: int) -> int:
    return model.noise_channels() if isinstance(model, BlackScholesModel) else model.noise_channels(d)


def mc_expectation(points, spec: McBoundarySpec, payoff: Payoff, return_stderr: bool = False):
    """Sample mean of ``payoff(X_t^x)`` at each space-time point ``(x, t)``.

    By default every point gets fresh noise from its own substream
    ``(seed, point index)``; with ``spec.shared_noise`` a single bank of
    normals is reused for all points. Either way the result does not depend
    on ``PIELM_THREADS``.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    d = P.shape[1] - 1
    x, t = P[:, :d], P[:, d]
    if np.any(t < 0):
        raise ValueError("Monte Carlo boundary data requires t >= 0")
    model = spec.model
    if isinstance(model, HestonModel) and d % 2:
        raise ValueError(f"Heston dimension must be even, got {d}")
    if isinstance(model, BlackScholesModel) and model.dim != d:
        raise ValueError(f"model has {model.dim} volatilities but points have dimension {d}")
    n_s = int(spec.n_samples)
    m = _channels(model, d)
    n = len(P)
    block = max(1, _MC_BLOCK_FLOATS // (n_s * max(m, d)))

    bank = None
    if spec.shared_noise:
        bank = rng_for(spec.seed, _MC_SHARED).standard_normal((1, n_s, m))

    def run(start: int):
        stop = min(start + block, n)
        if bank is None:
            Z = np.stack(
                [rng_for(spec.seed, _MC_FRESH, k).standard_normal((n_s, m)) for k in range(start, stop)]
            )
        else:
            Z = bank
        values = payoff(model.terminal(x[start:stop], t[start:stop], Z))
        mean = values.mean(axis=1)
        if n_s > 1:
            se = values.std(axis=1, ddof=1) / np.sqrt(n_s)
        else:
            se = np.full(stop - start, np.nan)
        return mean, se

    starts = range(0, n, block)
    threads = _threads()
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    if parts:
        mean = np.concatenate([p[0] for p in parts])
        se = np.concatenate([p[1] for p in parts])
    else:
        mean = se = np.empty(0)
    return (mean, se) if return_stderr else mean


def bs_boundary_values(points, spec: McBoundarySpec, payoff: Payoff, return_stderr: bool = False):
    """Black-Scholes boundary data: sample mean of ``payoff(x * exp((mu - eps^2/2) t + eps sqrt(t) Z))``."""
    if not isinstance(spec.model, BlackScholesModel):
        raise ValueError("bs_boundary_values requires a BlackScholesModel spec")
    return mc_expectation(points, spec, payoff, return_stderr)


def heston_boundary_values(points, spec: McBoundarySpec, payoff: Payoff, return_stderr: bool = False):
    """Heston boundary data: sample mean of the truncated pairwise stock/variance step."""
    if not isinstance(spec.model, HestonModel):
        raise ValueError("heston_boundary_values requires a HestonModel spec")
    return mc_expectation(points, spec, payoff, return_stderr)
