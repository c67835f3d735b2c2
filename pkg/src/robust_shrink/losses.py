"""Weighted square losses and the Bayes estimators they induce.

Under ``L(theta, d) = w(theta) (d - theta)^2`` the optimal estimator is
``E[w theta | data] / E[w | data]``.  With ``w = Cauchy(M,1)/N(M, 2.19)`` and a
``N(M, 2.19)`` prior this equals the posterior mean under a ``Cauchy(M, 1)``
prior, which is how a robust loss and a robust prior meet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional, Sequence

import numpy as np
from scipy import special

from .quadrature import QuadratureError, integrate

LossKind = Literal["SquareLoss", "ExponentialWeight", "CauchyOverGaussian"]

# variance of the normal whose interquartile range matches Cauchy(0, 1)
MATCHED_GAUSSIAN_VAR = 2.19


class DivergenceError(ArithmeticError):
    """The weighted posterior expectations do not exist (or did not converge)."""


@dataclass(frozen=True)
class WeightedLossSpec:
    kind: LossKind = "SquareLoss"
    anchor_M: float = 0.0
    rate_r: float = 1.0
    gaussian_var: float = MATCHED_GAUSSIAN_VAR

    def __post_init__(self):
        if self.kind not in ("SquareLoss", "ExponentialWeight", "CauchyOverGaussian"):
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if not (self.rate_r > 0 and self.gaussian_var > 0):
            raise ValueError("rate_r and gaussian_var must be positive")


def log_weight(spec: WeightedLossSpec, theta):
    d = np.asarray(theta, dtype=float) - spec.anchor_M
    if spec.kind == "SquareLoss":
        out = np.zeros_like(d)
    elif spec.kind == "ExponentialWeight":
        out = spec.rate_r * np.abs(d)
    else:
        v = spec.gaussian_var
        out = (-math.log(math.pi) - np.log1p(d * d)
               + 0.5 * math.log(2 * math.pi * v) + 0.5 * d * d / v)
    return float(out) if np.ndim(out) == 0 else out


def weight(spec: WeightedLossSpec, theta):
    out = np.exp(log_weight(spec, theta))
    return float(out) if np.ndim(out) == 0 else out


def loss(spec: WeightedLossSpec, theta, delta):
    return weight(spec, theta) * (np.asarray(theta) - np.asarray(delta)) ** 2


def optimal_estimate(spec: WeightedLossSpec,
                     posterior_density: Optional[Callable] = None, *,
                     log_posterior: Optional[Callable] = None,
                     points: Sequence[float] = (),
                     scale: float = 1.0,
                     epsrel: float = 1e-11,
                     limit: int = 2000) -> float:
    """``E[w theta] / E[w]`` under an (unnormalized) posterior, by quadrature.

    Pass either a density or its log (the latter keeps exponential weights
    from overflowing).  The line is split at the loss anchor plus ``points``
    (typically the posterior mean).

    Raises:
        DivergenceError: when either expectation fails to converge, e.g.
            exponential weights against Cauchy-tailed posteriors.
    """
    if (posterior_density is None) == (log_posterior is None):
        raise ValueError("give exactly one of posterior_density / log_posterior")
    if log_posterior is None:
        def log_posterior(t):
            with np.errstate(divide="ignore"):
                return np.log(posterior_density(t))

    cuts = sorted({spec.anchor_M, *points})
    shift = max(float(log_weight(spec, c) + log_posterior(np.asarray(c))) for c in cuts)
    center = cuts[len(cuts) // 2]

    def g(t):
        with np.errstate(over="ignore"):
            return np.exp(log_weight(spec, t) + log_posterior(t) - shift)

    try:
        den = integrate(g, points=cuts, epsrel=epsrel, epsabs=0.0, limit=limit, tail_scale=scale)
        num = integrate(lambda t: (t - center) * g(t), points=cuts, epsrel=epsrel,
                        epsabs=epsrel * den.value * scale, limit=limit, tail_scale=scale)
    except QuadratureError as exc:
        raise DivergenceError(f"weighted posterior expectation diverges: {exc}") from exc
    if not (den.value > 0 and math.isfinite(num.value)):
        raise DivergenceError("weighted posterior expectation diverges")
    return center + num.value / den.value


def _mills(z):
    """phi(z) / Phi(z), stable for very negative z."""
    return math.exp(-0.5 * z * z - 0.5 * math.log(2 * math.pi) - special.log_ndtr(z))


def exp_loss_estimator(mu1: float, v: float, M: float, r: float) -> float:
    """Closed-form optimal estimate under ``exp(r|theta - M|)``-weighted
    square loss for a ``N(mu1, v)`` posterior.

    Piecewise tilting: below ``M`` the weighted posterior is a normal
    centred at ``mu1 - r v`` truncated to ``(-inf, M]``, above ``M`` one
    centred at ``mu1 + r v`` truncated to ``[M, inf)``.  The two pieces are
    combined with log-space weights; nothing overflows until the answer does.
    """
    if not (v > 0 and r > 0):
        raise ValueError("v and r must be positive")
    sv = math.sqrt(v)
    la = r * (M - mu1) + v * r * r / 2
    lap = r * (mu1 - M) + v * r * r / 2
    z1 = (M - (mu1 - r * v)) / sv
    z2 = (M - (mu1 + r * v)) / sv
    lwa = la + special.log_ndtr(z1)
    lwb = lap + special.log_ndtr(-z2)
    top = max(lwa, lwb)
    wa, wb = math.exp(lwa - top), math.exp(lwb - top)
    lower = mu1 - r * v - sv * _mills(z1)
    upper = mu1 + r * v + sv * _mills(-z2)
    return (wa * lower + wb * upper) / (wa + wb)


def normal_posterior(x: float, prior_mean: float, prior_var: float) -> tuple[float, float]:
    """Mean and variance for ``x ~ N(theta, 1)``, ``theta ~ N(prior_mean, prior_var)``."""
    v = prior_var / (1.0 + prior_var)
    return v * (x + prior_mean / prior_var), v
