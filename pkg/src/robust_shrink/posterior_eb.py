"""Empirical-Bayes fits and one-dimensional posterior means (Models 1-3).

Likelihood throughout is ``x ~ N(mu, 1)`` on the transformed scale.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import dataset
from .distributions import PriorSpec, cauchy, double_exponential, logdensity, match_quartiles, normal
from .quadrature import QuadratureError, integrate

# overall 1970 mean used by the "general mean" baseline
GRAND_MEAN = 0.265


class DegenerateVarianceError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class HyperParams:
    M: float
    sigma0_sq: float
    tau: float
    shrink_c: float

    @classmethod
    def from_shrink(cls, M: float, shrink_c: float) -> "HyperParams":
        s2 = 1.0 / shrink_c - 1.0
        if not s2 > 0:
            raise DegenerateVarianceError(f"shrinkage factor {shrink_c} implies prior variance {s2} <= 0")
        return cls(M=M, sigma0_sq=s2, tau=1.0 / s2, shrink_c=shrink_c)

    @property
    def sigma0(self) -> float:
        return math.sqrt(self.sigma0_sq)


@dataclass(frozen=True)
class PosteriorProblem:
    x: float
    prior: PriorSpec


@dataclass
class ModelResult:
    """Per-player predictions on the average scale plus the MSE."""

    model_id: str
    players: list[str]
    estimates: list[float]
    mse: float
    posterior_means: list[float] = field(default_factory=list)
    diagnostics_summary: Optional[dict] = None
    config: dict = field(default_factory=dict)
    reliable: bool = True

    def to_json(self) -> str:
        doc = {
            "model_id": self.model_id,
            "predictions": [{"player": p, "estimate": e} for p, e in zip(self.players, self.estimates)],
            "mse": self.mse,
            "posterior_means": self.posterior_means,
            "reliable": self.reliable,
            "diagnostics_summary": self.diagnostics_summary,
            "config": self.config,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelResult":
        doc = json.loads(text)
        return cls(
            model_id=doc["model_id"],
            players=[p["player"] for p in doc["predictions"]],
            estimates=[p["estimate"] for p in doc["predictions"]],
            mse=doc["mse"],
            posterior_means=doc.get("posterior_means", []),
            diagnostics_summary=doc.get("diagnostics_summary"),
            config=doc.get("config", {}),
            reliable=doc.get("reliable", True),
        )


def mse(predictions: Sequence[float], players: Sequence[dataset.PlayerRecord]) -> float:
    """Mean squared error of predicted averages against the remainder averages."""
    pred = np.asarray(predictions, dtype=float)
    if pred.shape != (len(players),):
        raise ValueError(f"{pred.size} predictions for {len(players)} players")
    return float(np.mean((pred - dataset.remainder(players)) ** 2))


def fit_empirical_hyperparams(xs: Sequence[float], center: Optional[float] = None) -> HyperParams:
    """Location = sample mean (or ``center``); shrinkage ``(k-3) / sum (x - xbar)^2``."""
    xs = np.asarray(xs, dtype=float)
    k = xs.size
    if k < 4:
        raise InsufficientDataError(f"need at least 4 observations, got {k}")
    xbar = xs.mean()
    ss = float(np.sum((xs - xbar) ** 2))
    if ss <= k - 3:
        raise DegenerateVarianceError(f"sum of squares {ss:.6g} <= k-3 = {k - 3}")
    M = xbar if center is None else float(center)
    return HyperParams.from_shrink(float(M), (k - 3) / ss)


def posterior_mean_normal(x, hp: HyperParams):
    return x + hp.shrink_c * (hp.M - x)


def posterior_mean_quadrature(problem: PosteriorProblem, epsrel: float = 1e-11,
                              limit: int = 2000) -> float:
    """``E[mu | x]`` for a ``N(x | mu, 1)`` likelihood and any proper prior.

    Computed as ``x + E[mu - x]`` so the ratio is not dominated by ``x``;
    panels split at ``x``, the prior location, and any prior pole.
    """
    x, prior = problem.x, problem.prior
    cuts = sorted({x, prior.location, *prior.poles})
    off_pole = [c for c in cuts if c not in prior.poles] or [x]
    shift = max(-0.5 * (x - c) ** 2 + float(logdensity(prior, c)) for c in off_pole)

    def g(mu):
        with np.errstate(divide="ignore", over="ignore"):
            return np.exp(-0.5 * (x - mu) ** 2 + logdensity(prior, mu) - shift)

    den = integrate(g, points=cuts, epsrel=epsrel, epsabs=0.0, limit=limit)
    num = integrate(lambda mu: (mu - x) * g(mu), points=cuts, epsrel=epsrel,
                    epsabs=epsrel * den.value, limit=limit)
    return x + num.value / den.value


def eb_prior(model_id: int, hp: HyperParams) -> PriorSpec:
    """Normal / quartile-matched DoubleExponential / quartile-matched Cauchy."""
    if model_id == 1:
        return normal(hp.M, hp.sigma0)
    if model_id == 2:
        return double_exponential(hp.M, match_quartiles(hp.sigma0, "DoubleExponential"))
    if model_id == 3:
        return cauchy(hp.M, match_quartiles(hp.sigma0, "Cauchy"))
    raise ValueError(f"empirical-Bayes model id must be 1, 2 or 3, got {model_id}")


def prior_center(mode, xs=None) -> Optional[float]:
    """``"empirical"`` -> None (use the sample mean); a float average -> its transform."""
    if mode in (None, "empirical"):
        return None
    return dataset.arcsine_transform(float(mode))


def predict_eb_model(model_id: int, players: Sequence[dataset.PlayerRecord],
                     center=None, exact: bool = True) -> ModelResult:
    xs = dataset.observed_scores(players, exact=exact)
    hp = fit_empirical_hyperparams(xs, prior_center(center))
    if model_id == 1:
        means = posterior_mean_normal(xs, hp)
    else:
        prior = eb_prior(model_id, hp)
        means = np.array([posterior_mean_quadrature(PosteriorProblem(float(x), prior)) for x in xs])
    est = dataset.inverse_transform(means)
    return ModelResult(
        model_id=str(model_id),
        players=[p.name for p in players],
        estimates=[float(e) for e in est],
        mse=mse(est, players),
        posterior_means=[float(m) for m in means],
        config={"model": model_id, "hyperparams": asdict(hp),
                "prior_center": "empirical" if center is None else center},
    )


def predict_baseline(kind: str, players: Sequence[dataset.PlayerRecord],
                     grand_mean: float = GRAND_MEAN, exact: bool = True) -> ModelResult:
    """``"mle"``: first-45 averages; ``"mean"``: constant overall average."""
    if kind == "mle":
        est = [p.exact_y() if exact else p.y45 for p in players]
    elif kind == "mean":
        est = [grand_mean] * len(players)
    else:
        raise ValueError(f"unknown baseline {kind!r}")
    return ModelResult(model_id=kind, players=[p.name for p in players], estimates=list(est),
                       mse=mse(est, players), config={"model": kind})
