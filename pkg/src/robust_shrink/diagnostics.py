"""Split-R-hat and effective sample size for multi-chain draws.

Both follow Vehtari et al. (2021): chains are split in half, R-hat is
computed on rank-normalized draws, ESS uses Geyer's initial monotone
sequence on the split chains.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special, stats


@dataclass(frozen=True)
class ParamDiagnostics:
    split_rhat: float
    ess: Optional[float]
    degenerate: bool = False


def _split(draws: np.ndarray) -> np.ndarray:
    draws = np.asarray(draws, dtype=float)
    if draws.ndim != 2:
        raise ValueError("draws must have shape (chains, iterations)")
    n = draws.shape[1] // 2
    return np.concatenate([draws[:, :n], draws[:, -n:]], axis=0)


def _rhat_raw(chains: np.ndarray) -> float:
    m, n = chains.shape
    means = chains.mean(axis=1)
    W = chains.var(axis=1, ddof=1).mean()
    B = n * means.var(ddof=1)
    if W == 0:
        return 1.0 if B == 0 else np.inf
    var_plus = (n - 1) / n * W + B / n
    return float(np.sqrt(var_plus / W))


def _rank_normalize(chains: np.ndarray) -> np.ndarray:
    ranks = stats.rankdata(chains, method="average").reshape(chains.shape)
    return special.ndtri((ranks - 3 / 8) / (chains.size + 1 / 4))


def split_rhat(draws: np.ndarray) -> float:
    """Rank-normalized split-R-hat for an array of shape (chains, iterations)."""
    chains = _split(draws)
    if np.all(chains == chains.flat[0]):
        return np.nan
    return _rhat_raw(_rank_normalize(chains))


def _autocov(x: np.ndarray) -> np.ndarray:
    n = x.size
    size = 2 ** int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(x - x.mean(), size)
    ac = np.fft.irfft(f * np.conjugate(f), size)[:n]
    return ac / n


def ess(draws: np.ndarray) -> Optional[float]:
    """Effective sample size of the mean; None if the draws are constant."""
    chains = _split(draws)
    m, n = chains.shape
    acov = np.array([_autocov(c) for c in chains])
    chain_var = acov[:, 0] * n / (n - 1)
    W = chain_var.mean()
    means = chains.mean(axis=1)
    var_plus = W * (n - 1) / n + (means.var(ddof=1) if m > 1 else 0.0)
    if var_plus <= 0:
        return None
    rho = 1.0 - (W - acov.mean(axis=0)) / var_plus
    rho[0] = 1.0
    # Geyer: sum consecutive pairs while positive, enforce monotonicity
    total = 0.0
    prev = np.inf
    t = 0
    while t + 1 < n:
        pair = rho[t] + rho[t + 1]
        if pair <= 0:
            break
        pair = min(pair, prev)
        total += pair
        prev = pair
        t += 2
    tau = -1.0 + 2.0 * total
    tau = max(tau, 1.0 / np.log10(m * n))
    return float(m * n / tau)


def diagnose(draws: np.ndarray) -> ParamDiagnostics:
    draws = np.asarray(draws, dtype=float)
    if draws.shape[0] < 2 or draws.shape[1] < 100:
        raise ValueError("need >= 2 chains and >= 100 draws per chain")
    if np.all(draws == draws.flat[0]):
        return ParamDiagnostics(split_rhat=np.nan, ess=None, degenerate=True)
    return ParamDiagnostics(split_rhat=split_rhat(draws), ess=ess(draws))
