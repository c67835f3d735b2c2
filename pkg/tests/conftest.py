import time

import numpy as np
import pytest

from robust_shrink import dataset, mcmc, posterior_eb

# reference Table 2 values, rows in Table 1 order
TABLE2 = {
    "1": [.290, .286, .282, .277, .273, .273, .269, .265, .259, .259, .255, .255, .255, .255, .255, .250, .245, .240],
    "2": [.304, .296, .288, .281, .275, .275, .269, .264, .258, .258, .252, .252, .252, .252, .252, .245, .237, .228],
    "3": [.314, .301, .291, .282, .275, .275, .270, .264, .259, .259, .254, .254, .253, .253, .253, .247, .238, .226],
    "4": [.282, .279, .277, .273, .270, .270, .267, .264, .261, .260, .257, .257, .257, .257, .257, .254, .251, .247],
    "5": [.298, .291, .285, .279, .273, .273, .268, .264, .259, .259, .254, .254, .254, .254, .254, .248, .242, .234],
    "6": [.291, .283, .2762, .272, .269, .269, .266, .263, .260, .260, .258, .257, .257, .257, .257, .254, .249, .242],
    "7": [.309, .296, .287, .279, .273, .273, .269, .263, .259, .259, .253, .254, .253, .253, .254, .247, .240, .230],
}
TABLE2_MSE = {"mle": 4.184, "mean": 1.348, "1": 1.196, "2": 1.187, "3": 1.137,
              "4": 1.198, "5": 1.168, "6": 1.108, "7": 1.117}


@pytest.fixture(scope="session")
def players():
    return dataset.load_canonical()


@pytest.fixture(scope="session")
def xs(players):
    return dataset.observed_scores(players)


@pytest.fixture(scope="session")
def hp(xs):
    return posterior_eb.fit_empirical_hyperparams(xs)


@pytest.fixture(scope="session")
def eb_results(players):
    out = {m: posterior_eb.predict_eb_model(m, players) for m in (1, 2, 3)}
    out["mle"] = posterior_eb.predict_baseline("mle", players)
    out["mean"] = posterior_eb.predict_baseline("mean", players)
    return out


# wall-clock seconds of the default-length runs, filled by ``full_bayes``
FULL_BAYES_SECONDS = {}


@pytest.fixture(scope="session")
def full_bayes(players):
    """Default-length runs (4 chains x 50k, seed 0) of Models 4-7."""
    cfg = mcmc.McmcConfig()
    out = {}
    for m in (4, 5, 6, 7):
        t0 = time.perf_counter()
        out[m] = mcmc.run_full_bayes(m, players, cfg)
        FULL_BAYES_SECONDS[m] = time.perf_counter() - t0
    return out
