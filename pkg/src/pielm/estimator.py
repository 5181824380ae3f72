"""scikit-learn style front ends.

:class:`PIELMSolver` runs the whole sample -> assemble -> solve pipeline in
``fit`` and evaluates the trained network in ``predict``.
:class:`RandomFeatureTransformer` exposes the frozen random hidden layer as a
plain transformer so it can sit in a :class:`~sklearn.pipeline.Pipeline`.
"""

from __future__ import annotations

import time

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .assembly import assemble
from .features import Activation, eval_features, eval_network, init_random, resolve_backend
from .lstsq import SolveOptions, solve_min_norm
from .problems import PdeProblem
from .sampling import CollocationSet, sample_collocation

__all__ = ["PIELMSolver", "RandomFeatureTransformer"]


class PIELMSolver(RegressorMixin, BaseEstimator):
    """Physics-informed extreme learning machine for a linear PDE problem.

    Parameters
    ----------
    problem : PdeProblem
        Operator, domain, data and normalization.
    width : int
        Number of random features ``N``.
    activation : {'tanh', 'sigmoid'}
    weight_range : (float, float)
        Hidden weights and biases are i.i.d. uniform on this interval.
    n_int, n_sb, n_tb : int
        Interior, spatial-boundary and initial-time collocation counts.
    beta1, beta2 : float
        Row scaling of the spatial-boundary and initial-time blocks.
    backend : {'analytic', 'fd'}
        Feature derivatives in closed form or by central differences.
    solver : {'svd', 'qr'}
    rcond : float
        Relative singular-value cutoff of the SVD solve.
    random_state : int
        Seed of the hidden weights.
    collocation_seed : int or None
        Seed of the collocation points; defaults to ``random_state``.

    Attributes
    ----------
    network_ : FeatureNetwork
    coef_ : ndarray of shape (width,)
    system_ : LinearSystem
    solve_report_ : SolveReport
    fit_time_ : float
    """

    def __init__(
        self,
        problem: PdeProblem | None = None,
        width: int = 800,
        activation: str = "tanh",
        weight_range: tuple[float, float] = (-0.01, 0.01),
        n_int: int = 8192,
        n_sb: int = 2048,
        n_tb: int = 6144,
        beta1: float = 1.0,
        beta2: float = 1.0,
        backend: str = "analytic",
        solver: str = "svd",
        rcond: float = 1e-14,
        random_state: int = 0,
        collocation_seed: int | None = None,
        keep_system: bool = False,
    ):
        self.problem = problem
        self.width = width
        self.activation = activation
        self.weight_range = weight_range
        self.n_int = n_int
        self.n_sb = n_sb
        self.n_tb = n_tb
        self.beta1 = beta1
        self.beta2 = beta2
        self.backend = backend
        self.solver = solver
        self.rcond = rcond
        self.random_state = random_state
        self.collocation_seed = collocation_seed
        self.keep_system = keep_system

    def fit(self, X: CollocationSet | None = None, y=None):
        """Sample (unless ``X`` is a ready :class:`CollocationSet`), assemble and solve.

        ``y`` is ignored; the targets come from the problem's data.
        """
        if not isinstance(self.problem, PdeProblem):
            raise ValueError("PIELMSolver needs a PdeProblem as `problem`")
        low, high = self.weight_range
        start = time.perf_counter()
        net = init_random(
            self.problem.input_dim, self.width, Activation.parse(self.activation), low, high, self.random_state
        )
        if X is None:
            seed = self.random_state if self.collocation_seed is None else self.collocation_seed
            X = sample_collocation(self.problem.domain, self.n_int, self.n_sb, self.n_tb, seed)
        elif not isinstance(X, CollocationSet):
            raise TypeError("X must be a CollocationSet or None")
        system = assemble(self.problem, net, X, resolve_backend(self.backend), self.beta1, self.beta2)
        W, report = solve_min_norm(system, SolveOptions(self.solver, self.rcond))
        if not np.all(np.isfinite(W)):
            raise FloatingPointError("least-squares solve produced non-finite weights")
        net.set_output_weights(W)
        self.fit_time_ = time.perf_counter() - start
        self.network_ = net
        self.coef_ = W
        self.solve_report_ = report
        self.system_ = system if self.keep_system else None
        self.n_features_in_ = self.problem.input_dim
        return self

    def predict(self, X):
        """Approximate solution at physical space-time points ``X`` of shape ``(n, d + 1)``."""
        check_is_fitted(self, "network_")
        X = check_array(X, ensure_min_features=self.n_features_in_)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns, expected {self.n_features_in_} (x, t)")
        return eval_network(self.network_, self.problem.network_inputs(X))


class RandomFeatureTransformer(TransformerMixin, BaseEstimator):
    """Map ``X`` to ``act(X A^T + b)`` with frozen uniform random ``A``, ``b``.

    >>> from sklearn.linear_model import LinearRegression
    >>> from sklearn.pipeline import make_pipeline
    >>> elm = make_pipeline(RandomFeatureTransformer(width=50, weight_range=(-1, 1)),
    ...                     LinearRegression(fit_intercept=False))
    """

    def __init__(self, width: int = 800, activation: str = "tanh", weight_range=(-1.0, 1.0), random_state: int = 0):
        self.width = width
        self.activation = activation
        self.weight_range = weight_range
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X)
        low, high = self.weight_range
        self.network_ = init_random(X.shape[1], self.width, self.activation, low, high, self.random_state)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "network_")
        X = check_array(X)
        return eval_features(self.network_, X)
