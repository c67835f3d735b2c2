"""Full-Bayes hierarchical models 4-7.

All four share ``x_i ~ N(mu_i, 1)``; they differ in the population prior
for ``mu_i``, the vague prior on the common location ``M`` and the prior
on the common scale:

===== ================= ====================== =================================
model mu_i | M, scale   M                      scale
===== ================= ====================== =================================
4     N(M, s2)          N(0, 1e5)              s2 ~ InvGamma(0.01, 0.01)
5     DE(M, sqrt2*s)    DE(0, sqrt2*1e3)       ScBeta2(1,1,1) on s2 (default) or s
6     Cauchy(M, s)      Cauchy(0, 1e3)         s ~ ScBeta2(1, 1, b)
7     Cauchy(M, s)      Cauchy(0, 1e3)         s2 ~ ScBeta2(1, 1, b)
===== ================= ====================== =================================

Model 4 is sampled by exact Gibbs; 5-7 by Metropolis-within-Gibbs with
componentwise random walks on ``mu``, a random walk on ``M`` and a random
walk on the log of the sampled scale parameter (Jacobian included).
Proposal scales adapt during burn-in only.

Chain ``c`` draws from ``Generator(PCG64(SeedSequence(seed).spawn(n)[c]))``,
so results do not depend on how chains are scheduled.
"""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np

from . import dataset
from .diagnostics import ParamDiagnostics, diagnose
from .distributions import PriorSpec, cauchy, double_exponential, normal, scaled_beta2
from .posterior_eb import ModelResult, fit_empirical_hyperparams, mse

RHAT_LIMIT = 1.05
SQRT2 = math.sqrt(2.0)


class SamplerFault(RuntimeError):
    pass


class TraceFormatError(ValueError):
    pass


@dataclass(frozen=True)
class HierarchicalModelSpec:
    model_id: int
    mu_prior_family: Literal["Normal", "DoubleExponential", "Cauchy"]
    M_prior: PriorSpec
    scale_prior: Optional[PriorSpec]  # None -> InvGamma(ig_shape, ig_rate)
    scale_target: Literal["sigma", "sigma2"]
    ig_shape: float = 0.01
    ig_rate: float = 0.01

    @property
    def scale_name(self) -> str:
        return self.scale_target


def model_spec(model_id: int, b: float = 4.0, model5_scale: str = "sigma2") -> HierarchicalModelSpec:
    """The hierarchical model numbered ``model_id`` (4-7).

    ``model5_scale`` chooses whether Model 5's ScBeta2(1,1,1) prior sits on
    the DE scale (``"sigma"``) or its square (``"sigma2"``); the latter is
    what reproduces the reference Table 2 predictions.
    """
    if model_id == 4:
        return HierarchicalModelSpec(4, "Normal", normal(0.0, math.sqrt(1e5)), None, "sigma2")
    if model_id == 5:
        if model5_scale not in ("sigma", "sigma2"):
            raise ValueError("model5_scale must be 'sigma' or 'sigma2'")
        return HierarchicalModelSpec(5, "DoubleExponential", double_exponential(0.0, SQRT2 * 1e3),
                                     scaled_beta2(1, 1, 1.0), model5_scale)
    if model_id == 6:
        return HierarchicalModelSpec(6, "Cauchy", cauchy(0.0, 1e3), scaled_beta2(1, 1, b), "sigma")
    if model_id == 7:
        return HierarchicalModelSpec(7, "Cauchy", cauchy(0.0, 1e3), scaled_beta2(1, 1, b), "sigma2")
    raise ValueError(f"full-Bayes model id must be 4..7, got {model_id}")


@dataclass(frozen=True)
class McmcConfig:
    n_chains: int = 4
    n_iter: int = 50_000
    n_burnin: int = 10_000
    seed: int = 0
    proposal_scales: tuple[float, float, float] = (1.0, 0.5, 0.5)  # mu, M, log-scale
    adapt_every: int = 100
    target_accept: float = 0.375
    jitter: float = 1.0
    use_likelihood: bool = True
    # hold (M, scale) at these values and sample only the mu_i
    fixed_hyper: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.n_chains < 2:
            raise ValueError("n_chains must be >= 2")
        if not 0 <= self.n_burnin < self.n_iter:
            raise ValueError("need 0 <= n_burnin < n_iter")
        if min(self.proposal_scales) <= 0:
            raise ValueError("proposal scales must be positive")
        if self.fixed_hyper is not None and not self.fixed_hyper[1] > 0:
            raise ValueError("fixed scale must be positive")


@dataclass
class McmcTrace:
    """Post-burn-in draws, shape (chains, draws, k + 2): mu_1..mu_k, M, scale."""

    draws: np.ndarray
    scale_name: str = "sigma"
    burnin: int = 0
    acceptance: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.draws.shape[2] - 2

    @property
    def names(self) -> list[str]:
        return [f"mu_{i + 1}" for i in range(self.k)] + ["M", "scale"]

    def param(self, name: str) -> np.ndarray:
        return self.draws[:, :, self.names.index(name)]

    def posterior_means(self) -> np.ndarray:
        return self.draws[:, :, : self.k].mean(axis=(0, 1))

    def mc_standard_errors(self) -> np.ndarray:
        out = []
        for j in range(self.k):
            d = self.diagnostics.get(self.names[j])
            n_eff = d.ess if d and d.ess else self.draws.shape[0] * self.draws.shape[1]
            out.append(self.draws[:, :, j].std() / math.sqrt(n_eff))
        return np.array(out)


def diagnostics(trace: McmcTrace) -> dict[str, ParamDiagnostics]:
    """Per-parameter split-R-hat and ESS; cached on the trace."""
    trace.diagnostics = {n: diagnose(trace.draws[:, :, j]) for j, n in enumerate(trace.names)}
    return trace.diagnostics


def is_reliable(diag: dict[str, ParamDiagnostics]) -> bool:
    return all(not (d.split_rhat > RHAT_LIMIT) for d in diag.values() if not d.degenerate)


# --- log densities used inside the samplers --------------------------------------

class _Target:
    """Vectorized pieces of the joint log density for one model."""

    def __init__(self, spec: HierarchicalModelSpec, x: np.ndarray, use_likelihood: bool):
        self.spec = spec
        self.x = x
        self.lik = use_likelihood
        sp = spec.scale_prior
        self.b = sp.scale if sp is not None else None
        self.m_scale = spec.M_prior.scale

    def width(self, s):
        """Scale of the mu prior given the sampled scale parameter."""
        return math.sqrt(s) if self.spec.scale_target == "sigma2" else s

    def loglik(self, mu):
        if not self.lik:
            return np.zeros_like(mu)
        return -0.5 * (self.x - mu) ** 2

    def mu_logprior(self, mu, M, s):
        w = self.width(s)
        fam = self.spec.mu_prior_family
        if fam == "DoubleExponential":  # DE(M, sqrt2*w): Laplace scale w
            return -np.abs(mu - M) / w - math.log(2 * w)
        z = (mu - M) / w
        return -np.log1p(z * z) - math.log(w)

    def M_logprior(self, M):
        if self.spec.mu_prior_family == "DoubleExponential":
            return -SQRT2 * abs(M) / self.m_scale
        z = M / self.m_scale
        return -math.log1p(z * z)

    def log_scale_logprior(self, ls):
        """Log prior density of ``log s`` (includes the ``s`` Jacobian)."""
        s = math.exp(ls)
        return ls - 2.0 * math.log1p(s / self.b)


def _init_state(x, hp_s0, target_is_var, rng, chain, jitter):
    mu = x.copy()
    M = float(x.mean())
    s = hp_s0 ** 2 if target_is_var else hp_s0
    if chain > 0 and jitter > 0:
        mu = mu + rng.uniform(-jitter, jitter, mu.size)
        M += rng.uniform(-jitter, jitter)
        s *= math.exp(rng.uniform(-jitter, jitter))
    return mu, M, s


def _gibbs_chain(spec, x, cfg, chain, seedseq):
    rng = np.random.Generator(np.random.PCG64(seedseq))
    k = x.size
    s0 = _eb_scale(x)
    mu, M, s2 = _init_state(x, s0, True, rng, chain, cfg.jitter)
    fixed = cfg.fixed_hyper is not None
    if fixed:
        M, s2 = map(float, cfg.fixed_hyper)
    m_prec = 1.0 / spec.M_prior.scale ** 2
    kept = np.empty((cfg.n_iter - cfg.n_burnin, k + 2))
    for it in range(cfg.n_iter):
        prec = (1.0 if cfg.use_likelihood else 0.0) + 1.0 / s2
        xs = x if cfg.use_likelihood else 0.0
        mu = (xs + M / s2) / prec + rng.standard_normal(k) / math.sqrt(prec)
        if not fixed:
            pM = k / s2 + m_prec
            M = (mu.sum() / s2) / pM + rng.standard_normal() / math.sqrt(pM)
            ss = float(np.dot(mu - M, mu - M))
            s2 = (spec.ig_rate + ss / 2.0) / rng.gamma(spec.ig_shape + k / 2.0)
        if not (np.all(np.isfinite(mu)) and math.isfinite(M) and s2 > 0 and math.isfinite(s2)):
            raise SamplerFault(f"chain {chain}: non-finite state at iteration {it}")
        if it >= cfg.n_burnin:
            row = kept[it - cfg.n_burnin]
            row[:k] = mu
            row[k] = M
            row[k + 1] = s2
    acc = {"mu": 1.0, "M": 1.0, "scale": 1.0}
    return kept, acc, []


def _mwg_chain(spec, x, cfg, chain, seedseq):
    rng = np.random.Generator(np.random.PCG64(seedseq))
    k = x.size
    tgt = _Target(spec, x, cfg.use_likelihood)
    mu, M, s = _init_state(x, _eb_scale(x), spec.scale_target == "sigma2", rng, chain, cfg.jitter)
    fixed = cfg.fixed_hyper is not None
    if fixed:
        M, s = map(float, cfg.fixed_hyper)
    ls = math.log(s)
    step_mu = np.full(k, cfg.proposal_scales[0])
    step_M, step_s = cfg.proposal_scales[1], cfg.proposal_scales[2]
    acc_mu = np.zeros(k)
    acc_M = acc_s = 0
    post_mu = np.zeros(k)
    post_M = post_s = 0
    n_keep = cfg.n_iter - cfg.n_burnin
    kept = np.empty((n_keep, k + 2))

    lp_mu = tgt.loglik(mu) + tgt.mu_logprior(mu, M, s)
    for it in range(cfg.n_iter):
        z = rng.standard_normal(k + 2)
        logu = np.log(rng.random(k + 2))
        # mu_i are conditionally independent given (M, s): update all at once
        prop = mu + step_mu * z[:k]
        lp_prop = tgt.loglik(prop) + tgt.mu_logprior(prop, M, s)
        ok = logu[:k] < lp_prop - lp_mu
        mu = np.where(ok, prop, mu)
        lp_mu = np.where(ok, lp_prop, lp_mu)
        prior_cur = tgt.mu_logprior(mu, M, s)
        okM = okS = False
        if not fixed:
            # common location
            Mp = M + step_M * z[k]
            prior_new = tgt.mu_logprior(mu, Mp, s)
            okM = logu[k] < prior_new.sum() - prior_cur.sum() + tgt.M_logprior(Mp) - tgt.M_logprior(M)
            if okM:
                M = Mp
                prior_cur = prior_new
            # scale on the log axis
            lsp = ls + step_s * z[k + 1]
            sp = math.exp(lsp)
            prior_s = tgt.mu_logprior(mu, M, sp)
            okS = logu[k + 1] < (prior_s.sum() - prior_cur.sum()
                                  + tgt.log_scale_logprior(lsp) - tgt.log_scale_logprior(ls))
            if okS:
                ls, s = lsp, sp
                prior_cur = prior_s
        lp_mu = tgt.loglik(mu) + prior_cur
        if not (np.all(np.isfinite(lp_mu)) and math.isfinite(M) and math.isfinite(ls)):
            raise SamplerFault(f"chain {chain}: non-finite log density at iteration {it}")

        if it < cfg.n_burnin:
            acc_mu += ok
            acc_M += okM
            acc_s += okS
            if (it + 1) % cfg.adapt_every == 0:
                n = cfg.adapt_every
                step_mu *= np.exp(acc_mu / n - cfg.target_accept)
                step_M *= math.exp(acc_M / n - cfg.target_accept)
                step_s *= math.exp(acc_s / n - cfg.target_accept)
                acc_mu[:] = 0
                acc_M = acc_s = 0
        else:
            post_mu += ok
            post_M += okM
            post_s += okS
            row = kept[it - cfg.n_burnin]
            row[:k] = mu
            row[k] = M
            row[k + 1] = s
    acc = {"mu": float(post_mu.mean() / n_keep), "M": float(post_M / n_keep),
           "scale": float(post_s / n_keep)}
    warn = []
    hyper = [] if fixed else [("M", acc["M"]), ("scale", acc["scale"])]
    for block, rate in hyper + [
            (f"mu_{i + 1}", post_mu[i] / n_keep) for i in range(k)]:
        if not 0.05 <= float(rate) <= 0.95:
            warn.append(f"chain {chain}: acceptance {rate:.3f} for {block} outside [0.05, 0.95]")
    return kept, acc, warn


def _eb_scale(x) -> float:
    try:
        return fit_empirical_hyperparams(x).sigma0
    except ValueError:
        return 1.0


def _run_chain(args):
    spec, x, cfg, chain, seedseq = args
    fn = _gibbs_chain if spec.model_id == 4 else _mwg_chain
    return fn(spec, x, cfg, chain, seedseq)


def sample_model(spec: HierarchicalModelSpec, x: Sequence[float], config: McmcConfig,
                 workers: int = 1) -> McmcTrace:
    """Run all chains for ``spec`` on transformed scores ``x``."""
    x = np.asarray(x, dtype=float)
    seeds = np.random.SeedSequence(config.seed).spawn(config.n_chains)
    jobs = [(spec, x, config, c, seeds[c]) for c in range(config.n_chains)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chain, jobs))
    else:
        results = [_run_chain(j) for j in jobs]
    trace = McmcTrace(
        draws=np.stack([r[0] for r in results]),
        scale_name=spec.scale_name,
        burnin=config.n_burnin,
        acceptance={f"chain_{c}": r[1] for c, r in enumerate(results)},
        warnings=[w for r in results for w in r[2]],
    )
    diagnostics(trace)
    for w in trace.warnings:
        warnings.warn(w, RuntimeWarning, stacklevel=2)
    return trace


def _result(spec, trace, players, config, extra=None):
    means = trace.posterior_means()
    est = dataset.inverse_transform(means)
    diag = trace.diagnostics or diagnostics(trace)
    finite = [d.split_rhat for d in diag.values() if not d.degenerate]
    summary = {
        "max_split_rhat": float(max(finite)) if finite else None,
        "min_ess": float(min(d.ess for d in diag.values() if d.ess is not None)),
        "acceptance": trace.acceptance,
        "warnings": trace.warnings,
    }
    cfg = asdict(config)
    cfg["proposal_scales"] = list(cfg["proposal_scales"])
    cfg.update({"model": spec.model_id, "scale_target": spec.scale_target})
    if spec.scale_prior is not None:
        cfg["scale_prior_b"] = spec.scale_prior.scale
    cfg.update(extra or {})
    return ModelResult(
        model_id=str(spec.model_id),
        players=[p.name for p in players],
        estimates=[float(e) for e in est],
        mse=mse(est, players),
        posterior_means=[float(m) for m in means],
        diagnostics_summary=summary,
        config=cfg,
        reliable=is_reliable(diag),
    )


def run_model4(players, config: McmcConfig = McmcConfig(), workers: int = 1, exact: bool = True):
    spec = model_spec(4)
    trace = sample_model(spec, dataset.observed_scores(players, exact=exact), config, workers)
    return trace, _result(spec, trace, players, config)


def run_model_mwg(model_id: int, players, config: McmcConfig = McmcConfig(), b: float = 4.0,
                  model5_scale: str = "sigma2", workers: int = 1, exact: bool = True):
    if model_id not in (5, 6, 7):
        raise ValueError(f"Metropolis-within-Gibbs models are 5, 6, 7; got {model_id}")
    spec = model_spec(model_id, b=b, model5_scale=model5_scale)
    trace = sample_model(spec, dataset.observed_scores(players, exact=exact), config, workers)
    return trace, _result(spec, trace, players, config)


def run_full_bayes(model_id: int, players, config: McmcConfig = McmcConfig(), **kwargs):
    if model_id == 4:
        kwargs.pop("b", None)
        kwargs.pop("model5_scale", None)
        return run_model4(players, config, **kwargs)
    return run_model_mwg(model_id, players, config, **kwargs)


# --- trace persistence ------------------------------------------------------------

def _header(k: int) -> list[str]:
    return ["chain", "iter"] + [f"mu_{i + 1}" for i in range(k)] + ["M", "scale"]


def persist_trace(trace: McmcTrace, path) -> None:
    """One row per (chain, iteration); floats written with ``repr`` so they
    read back bit-for-bit."""
    n_chains, n, width = trace.draws.shape
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(_header(width - 2))
            for c in range(n_chains):
                for i in range(n):
                    w.writerow([c, trace.burnin + i, *map(repr, trace.draws[c, i].tolist())])
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc}") from exc


def load_trace(path, scale_name: str = "sigma") -> McmcTrace:
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read trace {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:2] != ["chain", "iter"] or header[-2:] != ["M", "scale"]:
            raise TraceFormatError(f"{path}: unexpected header {header!r}")
        k = len(header) - 4
        if header != _header(k):
            raise TraceFormatError(f"{path}: unexpected header {header!r}")
        rows: dict[int, list] = {}
        burnin = None
        last_good = 1
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise TraceFormatError(f"{path}: truncated or malformed row {lineno}; "
                                       f"last good row {last_good}")
            try:
                c, it = int(row[0]), int(row[1])
                vals = [float(v) for v in row[2:]]
            except ValueError:
                raise TraceFormatError(f"{path}: unparsable row {lineno}; last good row {last_good}") from None
            if burnin is None:
                burnin = it
            rows.setdefault(c, []).append(vals)
            last_good = lineno
    if not rows:
        raise TraceFormatError(f"{path}: no draws")
    lengths = {len(v) for v in rows.values()}
    if len(lengths) != 1:
        raise TraceFormatError(f"{path}: chains have unequal lengths {sorted(lengths)} "
                               f"(truncated file?); last good row {last_good}")
    draws = np.array([rows[c] for c in sorted(rows)])
    trace = McmcTrace(draws=draws, scale_name=scale_name, burnin=burnin or 0)
    if draws.shape[0] >= 2 and draws.shape[1] >= 100:
        diagnostics(trace)
    return trace
