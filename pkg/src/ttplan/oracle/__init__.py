"""Independent ground truth: packet simulation and exhaustive search."""

from .exact import exact_best_plan
from .sim import PacketSim, TransitionReport, Violation, simulate_plan, simulate_transition

__all__ = [
    "PacketSim",
    "TransitionReport",
    "Violation",
    "exact_best_plan",
    "simulate_plan",
    "simulate_transition",
]
