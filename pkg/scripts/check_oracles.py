"""Cross-check the numerical engines against independent references.

* posterior means of Models 4-7: MCMC vs grid integration of the collapsed model
* the Cauchy/ScBeta2 closed form vs its mixture integral (scipy)
* Example-1 closed form vs brute-force quadrature

    python scripts/check_oracles.py --iters 20000
"""

import argparse
import math

import numpy as np
from scipy import integrate as sint

from robust_shrink import dataset, mcmc
from robust_shrink import distributions as D
from robust_shrink.collapsed import model4_posterior_means_1d, posterior_means
from robust_shrink.losses import exp_loss_estimator


def mcmc_vs_grid(iters, seed):
    players = dataset.load_canonical()
    xs = dataset.observed_scores(players)
    cfg = mcmc.McmcConfig(n_iter=iters, n_burnin=iters // 5, seed=seed)
    print("model  max|z|   Clemente(mcmc)  Clemente(grid)")
    for m in (4, 5, 6, 7):
        trace, res = mcmc.run_full_bayes(m, players, cfg)
        grid = model4_posterior_means_1d(xs) if m == 4 else posterior_means(mcmc.model_spec(m), xs)
        z = (trace.posterior_means() - grid) / trace.mc_standard_errors()
        print(f"{m:>5}{np.max(np.abs(z)):>8.2f}{res.estimates[0]:>16.4f}"
              f"{dataset.inverse_transform(grid[0]):>16.4f}")


def scbeta2_mixture():
    worst = 0.0
    for b in (0.5, 1.0, 4.0):
        for t in np.geomspace(1e-3, 1e3, 25):
            mix = sint.quad(D.cauchy_scbeta2_mixture_integrand(t, b), 0, np.inf, epsabs=0, epsrel=1e-13,
                            limit=400)[0]
            worst = max(worst, abs(D.cauchy_scbeta2_density(t, b) - mix))
    print(f"Cauchy/ScBeta2 closed form vs mixture: max abs diff {worst:.2e}")


def exp_loss():
    worst = 0.0
    for d in (-3, -1, 0, 1.5, 4):
        for v in (0.2, 1.0, 4.0):
            for r in (0.1, 1.0, 3.0):
                f = lambda t: math.exp(r * abs(t) - 0.5 * (t - d) ** 2 / v)
                lo, hi = d - r * v - 40 * math.sqrt(v), d + r * v + 40 * math.sqrt(v)
                den = sint.quad(f, lo, hi, points=[0.0, d] if d else [0.0], limit=400)[0]
                num = sint.quad(lambda t: t * f(t), lo, hi, points=[0.0, d] if d else [0.0], limit=400,
                                epsabs=1e-12 * den)[0]
                worst = max(worst, abs(exp_loss_estimator(d, v, 0.0, r) - num / den))
    print(f"exponential-weight closed form vs quadrature: max abs diff {worst:.2e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iters", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    scbeta2_mixture()
    exp_loss()
    mcmc_vs_grid(args.iters, args.seed)
