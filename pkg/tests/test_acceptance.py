"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Randomized runs are judged on the median of five seed repeats. The heavy
end-to-end criteria (1-5 and the heat slope of 12) take about 15 minutes on a
single core; select the fast ones with ``-m "not slow"``.
"""

import functools

import numpy as np
import pytest

from pielm.config import ExperimentConfig
from pielm.experiments import median_relative_error, run_experiment, table_configs
from pielm.features import MultiIndex, eval_feature_derivative, init_random
from pielm.metrics import fit_log_slope
from pielm.problems import call_on_max_payoff
from pielm.sampling import BlackScholesModel, McBoundarySpec, bs_boundary_values

REPEATS = 5

# pinned tolerances
HEAT_D5_MAX_ERROR = 2.7e-5
HEAT_D5_MAX_SECONDS = 60.0
BS_D1_MAX_ERROR = 0.03
HESTON_D2_MAX_ERROR = 0.07
MC_MAX_SECONDS = 300.0
DERIVATIVE_MAX_ABS = 1e-4
NORMAL_EQ_REL = 1e-8
RECOVERY_REL = 1e-8
MC_SIGMAS = 5.0
MC_HALVING_TOL = 0.30
SLOPE_ABS = 1e-12


@functools.lru_cache(maxsize=None)
def median_run(problem, d, activation="tanh", width=800, **overrides):
    cfg = ExperimentConfig.for_problem(problem, d, activation=activation, width=width, **overrides)
    median, reports, rows = median_relative_error(cfg, REPEATS)
    times = [float(r["wall_time"]) for r in rows]
    return median, [rep.relative_l2 for rep in reports], max(times)


@pytest.mark.slow
def test_criterion_01_heat_d5_tanh(record_criterion):
    median, errors, worst = median_run("heat", 5)
    ok = median <= HEAT_D5_MAX_ERROR and worst <= HEAT_D5_MAX_SECONDS
    record_criterion(1, ok, f"heat d=5 N=800 tanh median {median:.3e} (<= {HEAT_D5_MAX_ERROR}), slowest run {worst:.1f}s")
    assert ok


@pytest.mark.slow
@pytest.mark.parametrize("activation", ["tanh", "sigmoid"])
def test_criterion_02_heat_d10_monotone(record_criterion, activation):
    medians = [median_run("heat", 10, activation, n)[0] for n in (800, 1600, 3200)]
    ok = medians[0] > medians[1] > medians[2]
    prev = test_criterion_02_heat_d10_monotone.results
    prev[activation] = (ok, medians)
    detail = "; ".join(f"{a}: " + " > ".join(f"{m:.2e}" for m in ms) for a, (_, ms) in sorted(prev.items()))
    record_criterion(2, all(v[0] for v in prev.values()), f"heat d=10 medians over N=800,1600,3200 ({detail})")
    assert ok


test_criterion_02_heat_d10_monotone.results = {}


@pytest.mark.slow
def test_criterion_03_heat_d50_sigmoid_beats_tanh(record_criterion):
    sig = median_run("heat", 50, "sigmoid", 1600)[0]
    tanh = median_run("heat", 50, "tanh", 1600)[0]
    ok = sig < tanh
    record_criterion(3, ok, f"heat d=50 N=1600 sigmoid {sig:.3e} vs tanh {tanh:.3e}")
    assert ok


@pytest.mark.slow
def test_criterion_04_black_scholes_d1(record_criterion):
    median, _, worst = median_run("black_scholes", 1, oracle_samples=65536)
    ok = median <= BS_D1_MAX_ERROR and worst <= MC_MAX_SECONDS
    record_criterion(4, ok, f"black-scholes d=1 median {median:.3e} (<= {BS_D1_MAX_ERROR}), slowest run {worst:.1f}s")
    assert ok


@pytest.mark.slow
def test_criterion_05_heston_d2(record_criterion):
    median, _, worst = median_run("heston", 2, beta1=800.0, beta2=800.0)
    ok = median <= HESTON_D2_MAX_ERROR and worst <= MC_MAX_SECONDS
    record_criterion(5, ok, f"heston d=2 median {median:.3e} (<= {HESTON_D2_MAX_ERROR}), slowest run {worst:.1f}s")
    assert ok


def test_criterion_06_high_dimensional_rows_substituted(record_criterion):
    # d >= 50 rows are outside the desk policy; criteria 7-12 stand in for them
    desk = [c for t in ("T1", "T2", "T3", "T4", "T5") for c in table_configs(t, "desk")]
    full = [c for t in ("T1", "T2", "T3", "T4", "T5") for c in table_configs(t, "full")]
    ok = all(c.d < 50 for c in desk) and any(c.d >= 50 for c in full)
    record_criterion(6, ok, "d >= 50 rows available at full scale only; substituted by property criteria 7-12")
    assert ok


def test_criterion_07_derivative_backends_agree(record_criterion):
    rng = np.random.default_rng(7)
    worst = 0.0
    for activation in ("tanh", "sigmoid"):
        dim = 4
        net = init_random(dim, 64, activation, -1.0, 1.0, seed=3)
        points = rng.uniform(-2, 2, size=(1000, dim))
        cols = rng.integers(0, net.width, size=1000)
        alphas = [MultiIndex.unit(dim, *ax) for ax in [()] + [(i,) for i in range(dim)]]
        alphas += [MultiIndex.unit(dim, i, j) for i in range(dim) for j in range(i, dim)]
        for alpha in alphas:
            exact = eval_feature_derivative(net, points, alpha, "analytic")[np.arange(1000), cols]
            approx = eval_feature_derivative(net, points, alpha, "fd")[np.arange(1000), cols]
            worst = max(worst, float(np.max(np.abs(exact - approx))))
    ok = worst <= DERIVATIVE_MAX_ABS
    record_criterion(7, ok, f"max |analytic - fd| = {worst:.2e} over 1000 pairs x 15 multi-indices x 2 activations")
    assert ok


def _system(H, T):
    from pielm.assembly import LinearSystem, RowBlocks

    m = H.shape[0]
    return LinearSystem(H, T, RowBlocks(slice(0, m), slice(m, m), slice(m, m)))


def test_criterion_08_least_squares(record_criterion):
    from pielm.lstsq import solve_min_norm

    rng = np.random.default_rng(8)
    worst_normal = 0.0
    for _ in range(50):
        m, n = int(rng.integers(40, 300)), int(rng.integers(2, 40))
        H = rng.normal(size=(m, n)) * np.exp(rng.uniform(-3, 3, size=n))
        T = rng.normal(size=m)
        W, _ = solve_min_norm(_system(H, T))
        r = H @ W - T
        worst_normal = max(worst_normal, np.linalg.norm(H.T @ r) / (np.linalg.norm(H, 2) * np.linalg.norm(r)))
    min_norm_ok = True
    for _ in range(20):
        m, n, k = int(rng.integers(30, 100)), int(rng.integers(5, 20)), int(rng.integers(1, 4))
        B = rng.normal(size=(m, n))
        H = np.column_stack([B, B[:, :k] @ rng.normal(size=(k, k))])
        T = rng.normal(size=m)
        W, _ = solve_min_norm(_system(H, T))
        # the minimum-norm solution lies in the row space: orthogonal to the null space
        _, s, Vt = np.linalg.svd(H)
        null = Vt[np.sum(s > 1e-10 * s[0]) :]
        min_norm_ok &= bool(np.linalg.norm(null @ W) <= 1e-8 * np.linalg.norm(W))
        min_norm_ok &= bool(np.allclose(W, np.linalg.pinv(H) @ T, rtol=1e-8, atol=1e-10))
    ok = worst_normal <= NORMAL_EQ_REL and min_norm_ok
    record_criterion(8, ok, f"worst normal-equation residual {worst_normal:.1e}; minimum-norm on 20 deficient systems: {min_norm_ok}")
    assert ok


def test_criterion_09_consistent_recovery(record_criterion):
    from pielm.lstsq import SolveOptions, solve_min_norm

    rng = np.random.default_rng(9)
    worst = 0.0
    for method in ("svd", "qr"):
        for _ in range(10):
            m, n = int(rng.integers(50, 400)), int(rng.integers(5, 50))
            H = rng.normal(size=(m, n))
            w_star = rng.normal(size=n)
            W, _ = solve_min_norm(_system(H, H @ w_star), SolveOptions(method))
            worst = max(worst, np.linalg.norm(W - w_star) / np.linalg.norm(w_star))
    ok = worst <= RECOVERY_REL
    record_criterion(9, ok, f"worst relative recovery error {worst:.1e} (svd and qr)")
    assert ok


def test_criterion_10_mc_sanity(record_criterion):
    model = BlackScholesModel(-0.05, (0.105,))
    x, t = 103.0, 0.9

    def linear(s):
        return s[..., 0]

    mean, se = bs_boundary_values([[x, t]], McBoundarySpec(1_000_000, model, 10), linear, return_stderr=True)
    sigmas = abs(mean[0] - x * np.exp(-0.05 * t)) / se[0]
    small = bs_boundary_values([[x, t]], McBoundarySpec(65536, model, 11), linear, return_stderr=True)[1][0]
    big = bs_boundary_values([[x, t]], McBoundarySpec(4 * 65536, model, 11), linear, return_stderr=True)[1][0]
    ratio = small / big
    ok = sigmas <= MC_SIGMAS and abs(ratio - 2.0) <= MC_HALVING_TOL * 2.0
    record_criterion(10, ok, f"bias {sigmas:.2f} standard errors; stderr ratio at 4x samples {ratio:.3f}")
    assert ok
    # the call-on-max estimator is finite and nonnegative
    assert bs_boundary_values([[x, t]], McBoundarySpec(4096, model, 0), call_on_max_payoff)[0] >= 0


def test_criterion_11_determinism(record_criterion):
    configs = [
        ExperimentConfig.for_problem("heat", 3, width=100, n_int=500, n_sb=200, n_tb=200, n_test=2000),
        ExperimentConfig.for_problem(
            "black_scholes", 1, width=60, n_int=300, n_sb=100, n_tb=100, n_s=256, oracle_samples=512, n_test=64
        ),
        ExperimentConfig.for_problem(
            "heston", 2, width=60, n_int=300, n_sb=100, n_tb=100, n_s=128, oracle_samples=256, n_test=32
        ),
    ]
    same = True
    for cfg in configs:
        a, b = run_experiment(cfg)[1], run_experiment(cfg)[1]
        a.pop("wall_time"), b.pop("wall_time")
        same &= a == b
    record_criterion(11, same, "heat, black-scholes and heston rows identical modulo wall_time")
    assert same


@pytest.mark.slow
def test_criterion_12_convergence_rate(record_criterion):
    widths = [800, 1600, 3200, 6400]
    synthetic = fit_log_slope(widths, [0.37 * w**-1.5 for w in widths])
    synthetic_ok = abs(synthetic + 1.5) <= SLOPE_ABS
    medians = [median_run("heat", 10, "tanh", n)[0] for n in (800, 1600, 3200)]
    slope = fit_log_slope([800, 1600, 3200], medians)
    ok = synthetic_ok and slope < 0
    record_criterion(12, ok, f"synthetic slope error {abs(synthetic + 1.5):.1e}; heat d=10 tanh slope {slope:.3f}")
    assert ok
