"""Exponential rank-decay estimation of item-to-item recommendation lists."""

__version__ = "0.1.0"

from .core import (
    AnchorList,
    DecayParams,
    Insertion,
    alpha_from_half_life,
    click_update,
    entropy,
    insert_max_entropy,
    insert_min_prob,
    max_entropy_click_alpha,
    prune,
    ranks_to_probabilities,
    reinforce,
)
from .estimator import DecayRecommender
from .events import Event, EventKind, generate_log, read_log
from .simulation import SimConfig, expected_distribution, run_simulation
from .snapshot import Snapshot, load_snapshot, save_snapshot
from .table import EngineConfig, RecTable, compute_alphas_from_log, process_log, top_k

__all__ = [
    "AnchorList",
    "DecayParams",
    "DecayRecommender",
    "EngineConfig",
    "Event",
    "EventKind",
    "Insertion",
    "RecTable",
    "SimConfig",
    "Snapshot",
    "alpha_from_half_life",
    "click_update",
    "compute_alphas_from_log",
    "entropy",
    "expected_distribution",
    "generate_log",
    "insert_max_entropy",
    "insert_min_prob",
    "load_snapshot",
    "max_entropy_click_alpha",
    "process_log",
    "prune",
    "ranks_to_probabilities",
    "read_log",
    "reinforce",
    "run_simulation",
    "save_snapshot",
    "top_k",
]
