"""Robust Bayesian shrinkage: empirical and full Bayes under heavy-tailed priors."""

from .dataset import PlayerRecord, arcsine_transform, inverse_transform, load_canonical, load_players
from .distributions import PriorSpec, density, match_quartiles, sample
from .posterior_eb import HyperParams, ModelResult, fit_empirical_hyperparams, predict_eb_model

__version__ = "0.1.0"
