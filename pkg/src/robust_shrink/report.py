"""Table 2 assembly and the data behind Figures 1-5 (CSV / JSON only)."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from . import dataset
from .distributions import PriorSpec, Q75, cauchy, cauchy_scbeta2_density, density, double_exponential, normal
from .losses import WeightedLossSpec, loss
from .posterior_eb import (HyperParams, ModelResult, PosteriorProblem, eb_prior,
                           fit_empirical_hyperparams, posterior_mean_normal, posterior_mean_quadrature)

COLUMNS = ["mle", "mean", "1", "2", "3", "4", "5", "6", "7"]


class IncompleteReportError(ValueError):
    pass


def write_atomic(path, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- Table 2 -------------------------------------------------------------------------

@dataclass
class Table2Report:
    players: list[str]
    remainder: list[float]
    columns: dict[str, list[float]]
    mse: dict[str, float]

    @property
    def ratio(self) -> dict[str, float]:
        base = self.mse["1"]
        return {c: self.mse[c] / base for c in COLUMNS}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = ["player", "remainder_average"] + [_label(c) for c in COLUMNS]
        w.writerow(head)
        for i, name in enumerate(self.players):
            w.writerow([name, repr(self.remainder[i])] + [repr(self.columns[c][i]) for c in COLUMNS])
        w.writerow(["MSE_x1e3", ""] + [repr(self.mse[c] * 1e3) for c in COLUMNS])
        w.writerow(["ratio_to_model_1_pct", ""] + [repr(self.ratio[c] * 100) for c in COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "players": self.players,
            "remainder_average": self.remainder,
            "columns": {_label(c): self.columns[c] for c in COLUMNS},
            "mse_x1e3": {_label(c): self.mse[c] * 1e3 for c in COLUMNS},
            "ratio_to_model_1_pct": {_label(c): self.ratio[c] * 100 for c in COLUMNS},
        }
        return json.dumps(doc, indent=2)

    def formatted(self) -> str:
        """Three-decimal text rendering, rounded only here."""
        lines = ["{:<14}{:>8}".format("player", "remain") + "".join(f"{_label(c):>9}" for c in COLUMNS)]
        for i, name in enumerate(self.players):
            lines.append(f"{name:<14}{self.remainder[i]:>8.3f}"
                         + "".join(f"{self.columns[c][i]:>9.3f}" for c in COLUMNS))
        lines.append(f"{'MSE x1e3':<22}" + "".join(f"{self.mse[c] * 1e3:>9.3f}" for c in COLUMNS))
        lines.append(f"{'ratio %':<22}" + "".join(f"{self.ratio[c] * 100:>9.0f}" for c in COLUMNS))
        return "\n".join(lines)


def _label(c: str) -> str:
    return c if c in ("mle", "mean") else f"model_{c}"


def build_table2(players: Sequence[dataset.PlayerRecord],
                 eb_results: Mapping, mcmc_results: Mapping) -> Table2Report:
    """Combine baselines + Models 1-3 (``eb_results``) and Models 4-7."""
    results = {str(k): v for k, v in {**eb_results, **mcmc_results}.items()}
    missing = [c for c in COLUMNS if c not in results]
    if missing:
        raise IncompleteReportError(f"missing results for: {', '.join(missing)}")
    names = [p.name for p in players]
    for c in COLUMNS:
        if list(results[c].players) != names:
            raise ValueError(f"result {c} is not aligned with the player list")
    return Table2Report(
        players=names,
        remainder=[p.remainder_avg for p in players],
        columns={c: list(results[c].estimates) for c in COLUMNS},
        mse={c: results[c].mse for c in COLUMNS},
    )


# --- figures ---------------------------------------------------------------------------

@dataclass
class FigureSeries:
    figure_id: int
    x_label: str
    y_label: str
    x: np.ndarray
    series: dict[str, np.ndarray]
    omitted: dict[str, list[float]] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([self.x_label] + list(self.series))
        for i, xv in enumerate(self.x):
            row = [repr(float(xv))]
            for name, ys in self.series.items():
                v = ys[i]
                row.append("" if not np.isfinite(v) else repr(float(v)))
            w.writerow(row)
        return buf.getvalue()


def read_figure_csv(text: str) -> tuple[list[str], np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    data = np.array([[float(v) if v else np.nan for v in r] for r in rows[1:]])
    return rows[0], data


def grid(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(round((hi - lo) / step))
    return np.round(lo + step * np.arange(n + 1), 10)


def baseball_hyperparams(players=None) -> HyperParams:
    players = players or dataset.load_canonical()
    return fit_empirical_hyperparams(dataset.observed_scores(players))


def conflict_shift(model_id: int, x: float, M: float, hp: HyperParams) -> float:
    """``x - E(mu | x)`` under the EB prior of Model ``model_id`` relocated to ``M``."""
    hp = HyperParams(M=M, sigma0_sq=hp.sigma0_sq, tau=hp.tau, shrink_c=hp.shrink_c)
    if model_id == 1:
        return x - posterior_mean_normal(x, hp)
    return x - posterior_mean_quadrature(PosteriorProblem(x, eb_prior(model_id, hp)))


def figure1(M: float = 0.0) -> FigureSeries:
    th = grid(-10, 10, 0.01)
    return FigureSeries(1, "theta", "loss", th, {
        "quadratic": loss(WeightedLossSpec("SquareLoss", M), th, M),
        "cauchy_over_gaussian": loss(WeightedLossSpec("CauchyOverGaussian", M), th, M),
    })


def figure2(hp: Optional[HyperParams] = None, x: float = 0.0) -> FigureSeries:
    hp = hp or baseball_hyperparams()
    Ms = grid(-15, 15, 0.05)
    series = {name: np.array([conflict_shift(mid, x, float(m), hp) for m in Ms])
              for mid, name in [(1, "normal"), (2, "double_exponential"), (3, "cauchy")]}
    return FigureSeries(2, "prior_location_M", "x_minus_posterior_mean", Ms, series)


def figure3(players=None) -> FigureSeries:
    players = players or dataset.load_canonical()
    xs = dataset.observed_scores(players)
    hp = fit_empirical_hyperparams(xs)
    order = np.argsort(xs, kind="stable")
    xs = xs[order]
    series = {"normal": posterior_mean_normal(xs, hp)}
    for mid, name in [(2, "double_exponential"), (3, "cauchy")]:
        prior = eb_prior(mid, hp)
        series[name] = np.array([posterior_mean_quadrature(PosteriorProblem(float(v), prior)) for v in xs])
    return FigureSeries(3, "transformed_observation", "posterior_mean", xs, series)


def figure4(b: float = 1.0) -> FigureSeries:
    """Densities with quartiles matched to Cauchy(0, 1), plus the Cauchy/ScBeta2
    marginal.  The pole at 0 is left empty and listed in ``omitted``."""
    th = grid(-10, 10, 0.01)
    sd = 1.0 / Q75
    csb = np.full(th.shape, np.nan)
    off = th != 0.0
    csb[off] = cauchy_scbeta2_density(th[off], b)
    return FigureSeries(4, "theta", "density", th, {
        "normal": density(normal(0.0, sd), th),
        "double_exponential": density(double_exponential(0.0, math.sqrt(2) * sd * Q75 / math.log(2)), th),
        "cauchy": density(cauchy(0.0, 1.0), th),
        "cauchy_scaled_beta2": csb,
    }, omitted={"cauchy_scaled_beta2": [0.0]})


def figure5(players, results: Mapping) -> FigureSeries:
    """Observed first-45 averages against Models 1/3 (EB) and 4/7 (full Bayes)."""
    need = ["1", "3", "4", "7"]
    results = {str(k): v for k, v in results.items()}
    missing = [m for m in need if m not in results]
    if missing:
        raise IncompleteReportError(f"figure 5 needs models {', '.join(missing)}")
    x = np.array([p.exact_y() for p in players])
    return FigureSeries(5, "observed_first45", "estimate", x, {
        "observed": x.copy(),
        **{f"model_{m}": np.asarray(results[m].estimates) for m in need},
    })
