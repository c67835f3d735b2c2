import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sint
from scipy import stats

from robust_shrink import distributions as D
from robust_shrink.losses import (DivergenceError, WeightedLossSpec, exp_loss_estimator, log_weight, loss,
                                  normal_posterior, optimal_estimate, weight)
from robust_shrink.posterior_eb import PosteriorProblem, posterior_mean_quadrature

COG_AT_MODE = (1 / math.pi) * math.sqrt(2 * math.pi * 2.19)


def test_weights():
    assert weight(WeightedLossSpec("SquareLoss"), 17.0) == 1.0
    assert weight(WeightedLossSpec("ExponentialWeight", 2.0, 1.0), 2.0) == 1.0
    w = weight(WeightedLossSpec("CauchyOverGaussian", -1.0), -1.0)
    assert w == pytest.approx(COG_AT_MODE, rel=1e-14)
    assert w == pytest.approx(1.1808, abs=5e-4)


def test_cauchy_over_gaussian_weight_is_density_ratio():
    spec = WeightedLossSpec("CauchyOverGaussian", 0.4)
    t = np.linspace(-6, 6, 13)
    ref = stats.cauchy(0.4, 1).pdf(t) / stats.norm(0.4, math.sqrt(2.19)).pdf(t)
    assert np.allclose(weight(spec, t), ref, rtol=1e-13)


def test_loss_examples():
    assert loss(WeightedLossSpec("SquareLoss"), 2.0, 0.0) == 4.0
    spec = WeightedLossSpec("CauchyOverGaussian", 3.0)
    assert loss(spec, 3.0, 4.0) == pytest.approx(COG_AT_MODE, rel=1e-14)
    for s in (spec, WeightedLossSpec("ExponentialWeight", 0.0, 2.0)):
        assert loss(s, 1.7, 1.7) == 0.0


def test_cauchy_over_gaussian_super_quadratic():
    spec = WeightedLossSpec("CauchyOverGaussian", 0.0)
    th = np.array([0.0, 2.0, 5.0, 10.0, 20.0])
    w = weight(spec, th)
    assert np.all(np.diff(w[1:]) > 0) and w[-1] > 1e30
    # locally quadratic at the anchor
    assert loss(spec, 1e-6, 1.0) / (1.0 - 1e-6) ** 2 == pytest.approx(weight(spec, 0.0), rel=1e-9)


def test_invalid_specs():
    with pytest.raises(ValueError):
        WeightedLossSpec("ExponentialWeight", 0.0, -1.0)
    with pytest.raises(ValueError):
        WeightedLossSpec("CauchyOverGaussian", 0.0, gaussian_var=0.0)
    with pytest.raises(ValueError):
        WeightedLossSpec("Hinge")


def test_square_loss_gives_posterior_mean():
    m, v = 1.3, 0.6
    est = optimal_estimate(WeightedLossSpec("SquareLoss"), lambda t: stats.norm(m, math.sqrt(v)).pdf(t),
                           points=[m])
    assert est == pytest.approx(m, abs=1e-10)


def test_bridge_on_baseball_data(xs, hp):
    M = hp.M
    spec = WeightedLossSpec("CauchyOverGaussian", M)
    for x in xs:
        mu1, v = normal_posterior(float(x), M, 2.19)
        est = optimal_estimate(spec, log_posterior=lambda t: -0.5 * (t - mu1) ** 2 / v, points=[mu1])
        ref = posterior_mean_quadrature(PosteriorProblem(float(x), D.cauchy(M, 1.0)))
        assert est == pytest.approx(ref, abs=1e-6)


def _brute_force_exp(mu1, v, M, r):
    sd = math.sqrt(v)
    f = lambda t: math.exp(r * abs(t - M) - 0.5 * (t - mu1) ** 2 / v)
    lo, hi = mu1 - r * v - 40 * sd, mu1 + r * v + 40 * sd
    pts = sorted({M, mu1})
    den = sint.quad(f, lo, hi, points=[p for p in pts if lo < p < hi], epsabs=0, epsrel=1e-13, limit=500)[0]
    num = sint.quad(lambda t: (t - M) * f(t), lo, hi, points=[p for p in pts if lo < p < hi],
                    epsabs=1e-12 * den, epsrel=1e-13, limit=500)[0]
    return M + num / den


GRID = list(itertools.product([-3.0, -1.0, 0.0, 1.5, 4.0], [0.2, 0.5, 1.0, 2.0, 4.0], [0.1, 0.5, 1.0, 2.0, 3.0]))


@pytest.mark.parametrize("d, v, r", GRID)
def test_exp_loss_closed_form_grid(d, v, r):
    M = 0.7
    got = exp_loss_estimator(M + d, v, M, r)
    assert got == pytest.approx(_brute_force_exp(M + d, v, M, r), abs=1e-6)


@pytest.mark.parametrize("d, v, r", [(0.0, 1.0, 0.5), (2.0, 0.5, 1.0), (-1.0, 2.0, 1.5)])
def test_exp_loss_closed_form_vs_engine(d, v, r):
    M = -3.3
    mu1 = M + d
    spec = WeightedLossSpec("ExponentialWeight", M, r)
    est = optimal_estimate(spec, log_posterior=lambda t: -0.5 * (t - mu1) ** 2 / v, points=[mu1],
                           scale=math.sqrt(v))
    assert exp_loss_estimator(mu1, v, M, r) == pytest.approx(est, abs=1e-8)


def test_exp_loss_pulls_away_from_anchor():
    M = 0.0
    got = exp_loss_estimator(M + 2, 0.5, M, 1.0)
    assert got > M + 2


def test_exp_loss_small_rate_limit():
    assert exp_loss_estimator(1.234, 0.8, -2.0, 1e-8) == pytest.approx(1.234, abs=1e-6)


def test_exp_loss_no_overflow():
    v = exp_loss_estimator(40.0, 3.0, -40.0, 30.0)
    assert math.isfinite(v) and v == pytest.approx(40.0 + 30.0 * 3.0, rel=1e-6)


def test_exponential_weight_against_cauchy_posterior_diverges():
    spec = WeightedLossSpec("ExponentialWeight", 0.0, 1.0)
    with pytest.raises(DivergenceError):
        optimal_estimate(spec, lambda t: 1 / (math.pi * (1 + t * t)))


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.floats(0.05, 5), st.floats(0.01, 4))
def test_exp_loss_symmetry(d, v, r):
    # reflecting about M reflects the estimate
    M = 1.0
    a = exp_loss_estimator(M + d, v, M, r)
    b = exp_loss_estimator(M - d, v, M, r)
    assert (a - M) == pytest.approx(-(b - M), abs=1e-9 * (1 + abs(a - M)))


@settings(max_examples=40, deadline=None)
@given(st.floats(-10, 10), st.floats(0.01, 100), st.floats(-10, 10))
def test_normal_posterior_matches_precision_form(x, var, m):
    mean, post_var = normal_posterior(x, m, var)
    assert post_var == pytest.approx(1 / (1 + 1 / var), rel=1e-12)
    assert mean == pytest.approx(post_var * (x + m / var), rel=1e-9, abs=1e-12)


def test_log_weight_consistent():
    spec = WeightedLossSpec("CauchyOverGaussian", 0.0)
    assert math.exp(log_weight(spec, 3.0)) == pytest.approx(weight(spec, 3.0))
