"""Confidence inference in discrete Bayesian networks.

Adaptive importance sampling (AIS-BN) driven by variance-aware stopping
rules, returning estimates of Pr(e) and Pr(a | e) with (eps_r, delta)
relative-error guarantees.
"""
from .engine import (EngineConfig, EstimateReport, estimate_prob, infer_posteriors,
                     run_with_restart)
from .network import BayesNet, NodeSpec, joint_probability, validate
from .oracle import exact_event_probability, exact_posterior
from .sampler import ImportanceFunction, draw_sample, initial_importance, lw_bound

__all__ = [
    "BayesNet", "NodeSpec", "EngineConfig", "EstimateReport", "ImportanceFunction",
    "draw_sample", "estimate_prob", "exact_event_probability", "exact_posterior",
    "infer_posteriors", "initial_importance", "joint_probability", "lw_bound",
    "run_with_restart", "validate",
]
__version__ = "0.1.0"
