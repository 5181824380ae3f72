import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.linear_model import LinearRegression
from sklearn.pipeline import make_pipeline

from pielm.estimator import PIELMSolver, RandomFeatureTransformer
from pielm.metrics import evaluate_error
from pielm.problems import make_heat_problem
from pielm.sampling import sample_collocation, sample_test_set


@pytest.fixture(scope="module")
def heat_small():
    return make_heat_problem(2)


def test_fit_predict_heat(heat_small):
    est = PIELMSolver(heat_small, width=200, n_int=1000, n_sb=300, n_tb=500, random_state=3).fit()
    X = sample_test_set(heat_small.domain, 500, seed=9)
    pred = est.predict(X)
    assert np.linalg.norm(pred - heat_small.reference.solution(X)) / np.linalg.norm(heat_small.reference.solution(X)) < 1e-4
    assert est.coef_.shape == (200,)
    assert est.score(X, heat_small.reference.solution(X)) > 0.999999


def test_params_and_clone(heat_small):
    est = PIELMSolver(heat_small, width=10, beta1=5.0)
    params = est.get_params()
    assert params["width"] == 10 and params["beta1"] == 5.0
    other = clone(est).set_params(width=20)
    assert other.width == 20 and est.width == 10


def test_predict_before_fit(heat_small):
    with pytest.raises(NotFittedError):
        PIELMSolver(heat_small).predict(np.zeros((1, 3)))


def test_predict_validates_columns(heat_small):
    est = PIELMSolver(heat_small, width=5, n_int=20, n_sb=10, n_tb=10).fit()
    with pytest.raises(ValueError):
        est.predict(np.zeros((3, 2)))
    with pytest.raises(ValueError):
        est.predict(np.full((3, 3), np.nan))


def test_fit_with_given_collocation(heat_small):
    colloc = sample_collocation(heat_small.domain, 100, 50, 50, seed=1)
    a = PIELMSolver(heat_small, width=30, keep_system=True).fit(colloc)
    b = PIELMSolver(heat_small, width=30, n_int=100, n_sb=50, n_tb=50, collocation_seed=1).fit()
    assert a.system_.shape == (200, 30)
    assert np.array_equal(a.coef_, b.coef_)
    with pytest.raises(TypeError):
        PIELMSolver(heat_small, width=3).fit(np.zeros((4, 3)))


def test_backends_agree(heat_small):
    kw = dict(width=40, n_int=400, n_sb=100, n_tb=200, random_state=0, weight_range=(-1, 1))
    a = PIELMSolver(heat_small, backend="analytic", **kw).fit()
    b = PIELMSolver(heat_small, backend="fd", **kw).fit()
    ea = evaluate_error(heat_small, a.network_, 1000, 0).relative_l2
    eb = evaluate_error(heat_small, b.network_, 1000, 0).relative_l2
    assert ea < 5e-2 and eb < 5e-2
    assert abs(ea - eb) <= 0.1 * ea


def test_requires_problem():
    with pytest.raises(ValueError):
        PIELMSolver().fit()


def test_random_feature_transformer_pipeline():
    rng = np.random.default_rng(0)
    X = rng.uniform(-1, 1, size=(400, 2))
    y = np.sin(2 * X[:, 0]) * X[:, 1]
    model = make_pipeline(
        RandomFeatureTransformer(width=200, weight_range=(-3, 3), random_state=1),
        LinearRegression(fit_intercept=False),
    )
    model.fit(X, y)
    assert model.score(X, y) > 0.999
    feats = RandomFeatureTransformer(width=7).fit_transform(X)
    assert feats.shape == (400, 7)
    with pytest.raises(NotFittedError):
        RandomFeatureTransformer().transform(X)
