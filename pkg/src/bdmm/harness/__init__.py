"""Oracles, experiment runner, sweeps and the command line."""

from .experiment import ExperimentConfig, RunRecord, baseline_recompute, run_experiment
from .oracles import FrontierObserver, verify_bandwidth, verify_maximal, verify_player_knowledge

__all__ = [
    "ExperimentConfig",
    "RunRecord",
    "run_experiment",
    "baseline_recompute",
    "FrontierObserver",
    "verify_maximal",
    "verify_player_knowledge",
    "verify_bandwidth",
]
