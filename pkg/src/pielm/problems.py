"""Linear PDE problems on space-time boxes and their collocation operator.

A problem is ``sum_alpha a_alpha(x, t) D^alpha u = f`` in the interior, with
Dirichlet data on the spatial boundary and an initial condition at ``t = 0``.
Network inputs are normalized coordinates; coefficients and data always see
physical coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Sequence, Union

import numpy as np

from .domain import BoxDomain, Normalization
from .features import (
    Analytic,
    FeatureNetwork,
    MultiIndex,
    eval_feature_derivative,
    resolve_backend,
)
from .sampling import (
    BlackScholesModel,
    HestonModel,
    McBoundarySpec,
    bs_boundary_values,
    heston_boundary_values,
    mc_expectation,
)

__all__ = [
    "OperatorTerm",
    "ExactReference",
    "McOracle",
    "PdeProblem",
    "apply_operator",
    "make_heat_problem",
    "make_black_scholes_problem",
    "make_heston_problem",
    "default_volatilities",
    "call_on_max_payoff",
    "basket_put_payoff",
]

Coefficient = Union[float, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class OperatorTerm:
    """One summand ``coeff(x, t) * D^alpha u`` of the interior operator."""

    alpha: MultiIndex
    coeff: Coefficient = 1.0

    def __post_init__(self):
        if not isinstance(self.alpha, MultiIndex):
            object.__setattr__(self, "alpha", MultiIndex(tuple(self.alpha)))

    def coefficient(self, points: np.ndarray) -> np.ndarray:
        c = self.coeff(points) if callable(self.coeff) else self.coeff
        return np.broadcast_to(np.asarray(c, dtype=float), (len(points),))


@dataclass(frozen=True)
class ExactReference:
    solution: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class McOracle:
    """Feynman-Kac sample mean used as the reference solution."""

    spec: McBoundarySpec


DataSource = Union[Callable[[np.ndarray], np.ndarray], McBoundarySpec]


@dataclass(frozen=True)
class PdeProblem:
    domain: BoxDomain
    interior_terms: tuple[OperatorTerm, ...]
    interior_rhs: Callable[[np.ndarray], np.ndarray]
    spatial_boundary_data: DataSource
    initial_data: Callable[[np.ndarray], np.ndarray]
    normalization: Normalization
    reference: ExactReference | McOracle | None = None
    payoff: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        terms = tuple(self.interior_terms)
        if not terms:
            raise ValueError("a PDE problem needs at least one interior term")
        d1 = self.domain.dim + 1
        for term in terms:
            if term.alpha.dim != d1:
                raise ValueError(f"operator term {term.alpha.entries} is not over {d1} space-time inputs")
        if self.normalization.dim != self.domain.dim:
            raise ValueError("normalization dimension does not match the domain")
        if isinstance(self.spatial_boundary_data, McBoundarySpec) and self.payoff is None:
            raise ValueError("Monte Carlo boundary data needs a payoff")
        object.__setattr__(self, "interior_terms", terms)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def input_dim(self) -> int:
        return self.domain.dim + 1

    def rhs(self, points) -> np.ndarray:
        return _as_values(self.interior_rhs(points), len(points))

    def boundary_values(self, points, return_stderr: bool = False):
        src = self.spatial_boundary_data
        if isinstance(src, McBoundarySpec):
            fn = heston_boundary_values if isinstance(src.model, HestonModel) else bs_boundary_values
            return fn(points, src, self.payoff, return_stderr)
        values = _as_values(src(points), len(points))
        return (values, np.zeros(len(points))) if return_stderr else values

    def initial_values(self, points) -> np.ndarray:
        P = np.atleast_2d(points)
        return _as_values(self.initial_data(P[:, : self.dim]), len(P))

    def reference_values(self, points):
        """Reference solution and its standard error (zero for exact references)."""
        ref = self.reference
        if ref is None:
            raise ValueError(f"problem {self.name!r} has no reference solution")
        if isinstance(ref, ExactReference):
            return _as_values(ref.solution(points), len(points)), np.zeros(len(points))
        return mc_expectation(points, ref.spec, self.payoff, return_stderr=True)

    def network_inputs(self, points) -> np.ndarray:
        return self.normalization.normalize(points)

    def check_points(self, points) -> np.ndarray:
        P = np.atleast_2d(np.asarray(points, dtype=float))
        if P.shape[1] != self.input_dim:
            raise ValueError(f"points must have {self.input_dim} columns (x, t), got {P.shape[1]}")
        outside = ~self.domain.contains(P)
        if outside.any():
            k = int(np.argmax(outside))
            raise ValueError(f"point {k} = {P[k].tolist()} lies outside the closed domain")
        return P


def _as_values(v, n: int) -> np.ndarray:
    return np.array(np.broadcast_to(np.asarray(v, dtype=float), (n,)))


def apply_operator(problem: PdeProblem, net: FeatureNetwork, points, backend=None) -> np.ndarray:
    """Interior operator applied to every feature: ``(n_points, width)``.

    Entry ``(k, i)`` is ``sum_terms a(x_k, t_k) D^alpha phi_i(x_k, t_k)`` with
    derivatives in physical coordinates (chain-rule factors of the
    normalization folded in).
    """
    P = problem.check_points(points)
    Z = problem.network_inputs(P)
    backend = resolve_backend(backend)
    inv_scale = 1.0 / problem.normalization.input_scale()
    A = net.hidden_weights
    if A.shape[1] != problem.input_dim:
        raise ValueError(f"network input_dim {A.shape[1]} does not match problem input_dim {problem.input_dim}")

    if not isinstance(backend, Analytic):
        H = np.zeros((len(P), net.width))
        for term in problem.interior_terms:
            chain = np.prod(inv_scale ** np.asarray(term.alpha.entries))
            D = eval_feature_derivative(net, Z, term.alpha, backend)
            H += (chain * term.coefficient(P))[:, None] * D
        return H

    # Group terms by order: sum_t c_t(x) prod_j A_ij^alpha_tj = (C @ M)[k, i] per order
    pre = net.preactivation(Z)
    H = np.zeros((len(P), net.width))
    for order in (0, 1, 2):
        terms = [t for t in problem.interior_terms if t.alpha.order == order]
        if not terms:
            continue
        C = np.empty((len(P), len(terms)))
        M = np.empty((len(terms), net.width))
        for j, term in enumerate(terms):
            chain = np.prod(inv_scale ** np.asarray(term.alpha.entries))
            C[:, j] = chain * term.coefficient(P)
            weight = np.ones(net.width)
            for axis in term.alpha.axes():
                weight = weight * A[:, axis]
            M[j] = weight
        H += (C @ M) * net.activation(pre, order)
    return H


def _term(dim: int, *axes: int, coeff: Coefficient = 1.0) -> OperatorTerm:
    return OperatorTerm(MultiIndex.unit(dim, *axes), coeff)


def _zero(points):
    return np.zeros(len(points))


# Module-level helpers keep problem objects picklable.


def _heat_exact(points, d):
    P = np.atleast_2d(points)
    return np.sum(P[:, :d] ** 2, axis=1) / d + 2.0 * P[:, d]


def _heat_initial(x, d):
    return np.sum(np.atleast_2d(x) ** 2, axis=1) / d


def make_heat_problem(d: int) -> PdeProblem:
    """``u_t - Laplace u = 0`` on ``[0, 1]^d x (0, 1)`` with exact solution ``|x|^2/d + 2t``."""
    if int(d) < 1:
        raise ValueError("dimension d must be at least 1")
    d = int(d)
    n = d + 1
    terms = [_term(n, d, coeff=1.0)] + [_term(n, j, j, coeff=-1.0) for j in range(d)]
    exact = partial(_heat_exact, d=d)
    return PdeProblem(
        domain=BoxDomain.cube(d, 0.0, 1.0, 1.0),
        interior_terms=tuple(terms),
        interior_rhs=_zero,
        spatial_boundary_data=exact,
        initial_data=partial(_heat_initial, d=d),
        normalization=Normalization.identity(d),
        reference=ExactReference(exact),
        name="heat",
        params={"d": d},
    )


def default_volatilities(d: int) -> tuple[float, ...]:
    """``0.1 + i/200`` for ``i = 1..d``."""
    return tuple(0.1 + i / 200.0 for i in range(1, d + 1))


def call_on_max_payoff(x, strike: float = 100.0):
    """``max(max_i x_i - strike, 0)`` over the last axis."""
    return np.maximum(np.max(x, axis=-1) - strike, 0.0)


def basket_put_payoff(x, strike: float = 110.0):
    """``max(strike - mean of the stock (even-index) coordinates, 0)``."""
    return np.maximum(strike - np.mean(x[..., 0::2], axis=-1), 0.0)


def _bs_diffusion(points, i, vol):
    return -0.5 * (vol * points[:, i]) ** 2


def _linear_coeff(points, i, c):
    return c * points[:, i]


def make_black_scholes_problem(
    d: int,
    mu: float = -0.05,
    volatilities: Sequence[float] | None = None,
    n_samples: int = 16384,
    mc_seed: int = 0,
    oracle_samples: int = 65536,
    oracle_seed: int = 1,
    oracle_shared_noise: bool = True,
) -> PdeProblem:
    """Black-Scholes call-on-max problem on ``[90, 110]^d`` with Monte Carlo boundary data."""
    if int(d) < 1:
        raise ValueError("dimension d must be at least 1")
    d = int(d)
    vol = default_volatilities(d) if volatilities is None else tuple(float(v) for v in volatilities)
    if len(vol) != d:
        raise ValueError(f"expected {d} volatilities, got {len(vol)}")
    n = d + 1
    terms = [_term(n, d, coeff=1.0)]
    for i in range(d):
        terms.append(_term(n, i, i, coeff=partial(_bs_diffusion, i=i, vol=vol[i])))
        terms.append(_term(n, i, coeff=partial(_linear_coeff, i=i, c=-mu)))
    model = BlackScholesModel(mu, vol)
    domain = BoxDomain.cube(d, 90.0, 110.0, 1.0)
    return PdeProblem(
        domain=domain,
        interior_terms=tuple(terms),
        interior_rhs=_zero,
        spatial_boundary_data=McBoundarySpec(n_samples, model, mc_seed),
        initial_data=call_on_max_payoff,
        normalization=Normalization.to_unit_box(domain),
        reference=McOracle(McBoundarySpec(oracle_samples, model, oracle_seed, oracle_shared_noise)),
        payoff=call_on_max_payoff,
        name="black_scholes",
        params={"d": d, "mu": mu, "volatilities": vol},
    )


def _heston_stock_diffusion(points, s, v):
    return -0.5 * np.abs(points[:, v]) * points[:, s] ** 2


def _heston_mean_reversion(points, v, kappa, theta):
    return -kappa * (theta - points[:, v])


def make_heston_problem(
    d: int,
    alpha: float = 0.05,
    beta: float = 0.2,
    kappa: float = 0.6,
    theta: float = 0.04,
    rho: float = -0.2,
    n_samples: int = 16384,
    mc_seed: int = 0,
    oracle_samples: int = 65536,
    oracle_seed: int = 1,
    oracle_shared_noise: bool = True,
) -> PdeProblem:
    """Heston basket-put problem on ``prod([90, 110] x [0.02, 0.2])``.

    Coordinates alternate (stock, variance). The interior operator is, per pair,
    ``-alpha s d_s - kappa (theta - v) d_v - |v|/2 s^2 d_ss - 2 s beta rho d_sv - beta^2 d_vv``
    plus ``d_t``. The cross and vol-of-vol coefficients are kept exactly in
    this form although they differ from the textbook Heston generator.
    """
    d = int(d)
    if d < 2 or d % 2:
        raise ValueError(f"Heston dimension must be a positive even integer, got {d}")
    model = HestonModel(alpha, beta, kappa, theta, rho)  # validates Feller and rho
    n = d + 1
    terms = [_term(n, d, coeff=1.0)]
    for s in range(0, d, 2):
        v = s + 1
        terms.append(_term(n, s, coeff=partial(_linear_coeff, i=s, c=-alpha)))
        terms.append(_term(n, v, coeff=partial(_heston_mean_reversion, v=v, kappa=kappa, theta=theta)))
        terms.append(_term(n, s, s, coeff=partial(_heston_stock_diffusion, s=s, v=v)))
        terms.append(_term(n, s, v, coeff=partial(_linear_coeff, i=s, c=-2.0 * beta * rho)))
        terms.append(_term(n, v, v, coeff=-(beta**2)))
    lower = tuple(90.0 if j % 2 == 0 else 0.02 for j in range(d))
    upper = tuple(110.0 if j % 2 == 0 else 0.2 for j in range(d))
    domain = BoxDomain(lower, upper, 1.0)
    return PdeProblem(
        domain=domain,
        interior_terms=tuple(terms),
        interior_rhs=_zero,
        spatial_boundary_data=McBoundarySpec(n_samples, model, mc_seed),
        initial_data=basket_put_payoff,
        normalization=Normalization.to_unit_box(domain),
        reference=McOracle(McBoundarySpec(oracle_samples, model, oracle_seed, oracle_shared_noise)),
        payoff=basket_put_payoff,
        name="heston",
        params={"d": d, "alpha": alpha, "beta": beta, "kappa": kappa, "theta": theta, "rho": rho},
    )
