"""Incremental zero-queuing planning for time-triggered flows.

The planner keeps a conflict graph of candidate (phase, path)
configurations, admits new flows with the GFH heuristic and, when that
helps, reconfigures active flows without breaking them during the switch.
"""

from .conflict import (
    configs_conflict,
    hyper_cycle,
    reconfig_jitter,
    reorder_bound,
    transition_interference,
    transition_interval_length,
)
from .errors import PlannerError
from .flows import Configuration, Flow, FlowRequest, link_occupancy, register_flow
from .gfh import ALPHA, N_RERUNS, GFHSolver, extract_plan, run_gfh
from .graph import ConflictGraph, Lock
from .network import Network, Path, e2e_delay, k_candidate_paths, per_hop_delay
from .plan import TrafficPlan
from .planner import Planner, PlanUpdate, emit_subplans

__version__ = "0.1.0"

__all__ = [
    "ALPHA",
    "N_RERUNS",
    "Configuration",
    "ConflictGraph",
    "Flow",
    "FlowRequest",
    "GFHSolver",
    "Lock",
    "Network",
    "Path",
    "PlanUpdate",
    "Planner",
    "PlannerError",
    "TrafficPlan",
    "configs_conflict",
    "e2e_delay",
    "emit_subplans",
    "extract_plan",
    "hyper_cycle",
    "k_candidate_paths",
    "link_occupancy",
    "per_hop_delay",
    "reconfig_jitter",
    "register_flow",
    "reorder_bound",
    "run_gfh",
    "transition_interference",
    "transition_interval_length",
]
