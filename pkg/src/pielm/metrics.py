"""Test-set error against exact or Monte Carlo references, and width sweeps."""

from __future__ import annotations

import time
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from .features import FeatureNetwork, eval_network
from .problems import ExactReference, PdeProblem
from .sampling import sample_test_set

__all__ = ["ErrorReport", "evaluate_error", "relative_l2", "fit_log_slope", "convergence_study"]


@dataclass(frozen=True)
class ErrorReport:
    l2_error: float
    relative_l2: float
    n_test: int
    wall_time_seconds: float
    seed_bundle: dict = field(default_factory=dict)
    reference_stderr: float = 0.0
    errors: np.ndarray | None = field(default=None, repr=False, compare=False)
    reference_norm: float | None = None

    def recompute_relative_l2(self) -> float:
        return float(np.linalg.norm(self.errors) / self.reference_norm)


def relative_l2(prediction, reference) -> float:
    reference = np.asarray(reference, dtype=float)
    return float(np.linalg.norm(np.asarray(prediction, dtype=float) - reference) / np.linalg.norm(reference))


# Monte Carlo references are expensive; repeated evaluations on the same
# test set (e.g. several weight seeds) reuse them.
_REFERENCE_CACHE: OrderedDict = OrderedDict()
_CACHE_SIZE = 8


def _reference(problem: PdeProblem, n_test: int, seed: int):
    points = sample_test_set(problem.domain, n_test, seed)
    if isinstance(problem.reference, ExactReference):
        values, se = problem.reference_values(points)
        return points, values, se
    key = (problem.reference, problem.payoff, problem.domain, int(n_test), int(seed))
    if key not in _REFERENCE_CACHE:
        _REFERENCE_CACHE[key] = problem.reference_values(points)
        while len(_REFERENCE_CACHE) > _CACHE_SIZE:
            _REFERENCE_CACHE.popitem(last=False)
    values, se = _REFERENCE_CACHE[key]
    return points, values, se


def evaluate_error(problem: PdeProblem, model, n_test: int = 100_000, seed: int = 0, seed_bundle=None) -> ErrorReport:
    """Discrete L2 and relative L2 errors on a uniform random test set.

    ``model`` is a trained :class:`FeatureNetwork` (fed normalized inputs), a
    fitted estimator with ``predict``, or any callable on physical points.
    ``reference_stderr`` is the Monte Carlo standard error of the reference
    propagated to the relative error (zero for exact references).
    """
    if problem.reference is None:
        raise ValueError(f"problem {problem.name!r} has no reference solution")
    start = time.perf_counter()
    points, u, se = _reference(problem, n_test, seed)
    if isinstance(model, FeatureNetwork):
        u_hat = eval_network(model, problem.network_inputs(points))
    elif hasattr(model, "predict"):
        u_hat = model.predict(points)
    else:
        u_hat = np.asarray(model(points), dtype=float)
    errors = u_hat - u
    u_norm = float(np.linalg.norm(u))
    return ErrorReport(
        l2_error=float(np.sqrt(np.mean(errors**2))),
        relative_l2=float(np.linalg.norm(errors) / u_norm),
        n_test=int(n_test),
        wall_time_seconds=time.perf_counter() - start,
        seed_bundle=dict(seed_bundle or {"test": seed}),
        reference_stderr=float(np.linalg.norm(se) / u_norm),
        errors=errors,
        reference_norm=u_norm,
    )


def fit_log_slope(widths, errors) -> float | None:
    """Least-squares slope of ``log(error)`` against ``log(width)``; None for a single width."""
    widths = np.asarray(widths, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if widths.size < 2:
        return None
    x, y = np.log(widths), np.log(errors)
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))


def convergence_study(estimator, widths, repeats: int = 1, seeds=None, n_test: int = 100_000, test_seed: int = 0):
    """Fit ``estimator`` for every width and repeat; summarize relative L2 errors.

    ``seeds`` lists one ``random_state`` per repeat (default ``0..repeats-1``);
    the collocation seed follows it. Returns ``(rows, slope)`` where each row
    is ``{"width", "median", "iqr", "errors"}`` and ``slope`` is the fitted
    log-log rate of the medians (None for a single width). The slope is
    reported, not checked against any theoretical rate.
    """
    widths = [int(w) for w in widths]
    if any(b <= a for a, b in zip(widths, widths[1:])):
        raise ValueError("widths must be strictly increasing")
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    seeds = list(range(repeats)) if seeds is None else list(seeds)[:repeats]
    problem = estimator.get_params()["problem"]
    rows = []
    for width in widths:
        errs = []
        for seed in seeds:
            est = clone(estimator).set_params(width=width, random_state=seed, collocation_seed=seed)
            est.fit()
            errs.append(evaluate_error(problem, est.network_, n_test, test_seed).relative_l2)
        q1, med, q3 = np.percentile(errs, [25, 50, 75])
        rows.append({"width": width, "median": float(med), "iqr": float(q3 - q1), "errors": errs})
    return rows, fit_log_slope(widths, [r["median"] for r in rows])
