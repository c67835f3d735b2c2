"""Deterministic posterior means for the hierarchical models.

Given the common location and scale the ``mu_i`` are independent, and for a
unit-variance normal likelihood Tweedie's formula gives
``E[mu | x] = x + d/dx log m(x)`` where ``m`` is the prior convolved with
``N(0, 1)``.  The convolutions have closed forms:

* Normal(M, s2):   ``N(x - M; 0, 1 + s2)``
* Laplace(M, w):   an erfc pair, written with ``log_ndtr``
* Cauchy(M, w):    the Voigt profile, via the Faddeeva function

so only the (M, scale) hyperposterior is left to integrate, on a grid.
This shares no code with the samplers and is used to check them.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .mcmc import HierarchicalModelSpec

SQRT2 = math.sqrt(2.0)


def normal_marginal(d, var):
    """log m and the Tweedie shift for a N(0, var) prior at offset ``d = x - M``."""
    v = 1.0 + var
    return -0.5 * d * d / v - 0.5 * np.log(2 * np.pi * v), -d / v


def laplace_marginal(d, w):
    """Laplace prior with scale ``w`` (density ``exp(-|t|/w) / 2w``)."""
    la = -d / w + special.log_ndtr(d - 1 / w)
    lb = d / w + special.log_ndtr(-d - 1 / w)
    lm = -np.log(2 * w) + 1 / (2 * w * w) + np.logaddexp(la, lb)
    return lm, -np.tanh((la - lb) / 2) / w


def cauchy_marginal(d, w):
    z = (d + 1j * w) / SQRT2
    f = special.wofz(z)
    lm = np.log(f.real) - 0.5 * math.log(2 * math.pi)
    df = -2 * z * f + 2j / math.sqrt(math.pi)
    return lm, df.real / (SQRT2 * f.real)


def posterior_means(spec: HierarchicalModelSpec, x, n_loc: int = 801, n_scale: int = 801,
                    loc_halfwidth: float = 4.0, log_scale_range=(math.log(1e-6), math.log(1e3))):
    """Posterior means of every ``mu_i`` by grid integration over (M, log scale)."""
    x = np.asarray(x, dtype=float)
    Mg = np.linspace(x.mean() - loc_halfwidth, x.mean() + loc_halfwidth, n_loc)
    lsg = np.linspace(*log_scale_range, n_scale)
    MM, LS = np.meshgrid(Mg, lsg, indexing="ij")
    S = np.exp(LS)
    width = np.sqrt(S) if spec.scale_target == "sigma2" else S
    fam = spec.mu_prior_family
    lp = np.zeros_like(MM)
    shifts = []
    for xi in x:
        if fam == "Normal":
            lm, sh = normal_marginal(xi - MM, S)
        elif fam == "DoubleExponential":
            lm, sh = laplace_marginal(xi - MM, width)
        else:
            lm, sh = cauchy_marginal(xi - MM, width)
        lp += lm
        shifts.append(xi + sh)
    # hyperpriors; + LS is the Jacobian of the log-scale grid
    if spec.scale_prior is None:
        lp += -(spec.ig_shape + 1) * LS - spec.ig_rate / S
    else:
        lp += -2 * np.log1p(S / spec.scale_prior.scale)
    mp = spec.M_prior
    if mp.family == "Normal":
        lp += -0.5 * (MM / mp.scale) ** 2
    elif mp.family == "DoubleExponential":
        lp += -SQRT2 * np.abs(MM) / mp.scale
    else:
        lp += -np.log1p((MM / mp.scale) ** 2)
    lp += LS
    w = np.exp(lp - lp.max())
    w /= w.sum()
    return np.array([(w * e).sum() for e in shifts])


def model4_posterior_means_1d(x, m_var: float = 1e5, ig_shape: float = 0.01, ig_rate: float = 0.01,
                              n: int = 20001, log_range=(math.log(1e-8), math.log(1e3))):
    """Model 4 with both ``mu`` and ``M`` integrated out analytically, leaving
    a single integral over ``log s2``."""
    x = np.asarray(x, dtype=float)
    k = x.size
    ls = np.linspace(*log_range, n)
    s2 = np.exp(ls)[:, None]
    v = 1.0 + s2
    # x_i | M, s2 ~ N(M, v); M ~ N(0, m_var)
    prec_M = k / v + 1.0 / m_var
    mean_M = (x.sum() / v) / prec_M
    ss = ((x[None, :] - x.mean()) ** 2).sum(axis=1, keepdims=True)
    # log p(x | s2) up to constants, M marginalized
    lml = (-0.5 * k * np.log(v) - 0.5 * ss / v - 0.5 * np.log(prec_M)
           - 0.5 * (k * x.mean() ** 2 / v - (x.sum() / v) ** 2 / prec_M))
    lp = lml[:, 0] - (ig_shape + 1) * ls - ig_rate / s2[:, 0] + ls
    w = np.exp(lp - lp.max())
    w /= w.sum()
    cond = x[None, :] - (x[None, :] - mean_M) / v
    return (w[:, None] * cond).sum(axis=0)
