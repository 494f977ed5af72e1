"""Exact conflict and transition predicates between flow configurations.

Every function here is pure; batches can be evaluated in parallel.
"""

from __future__ import annotations

import math
from functools import reduce

from .flows import Configuration, Flow


def hyper_cycle(cycles) -> int:
    """Least common multiple of the given cycle times (1 for an empty set)."""
    return reduce(math.lcm, cycles, 1)


def periodic_overlap(s_a: int, t_a: int, c_a: int, s_b: int, t_b: int, c_b: int) -> bool:
    """Whether two periodic half-open windows ever intersect.

    Window A occupies ``[s_a + i*c_a, s_a + i*c_a + t_a)`` for every integer i,
    B likewise.  Over one hyper-cycle H = lcm(c_a, c_b), with instances folded
    modulo H, the start offsets of B relative to A take exactly the values
    ``s_b - s_a + k*g`` with g = gcd(c_a, c_b).  So it suffices to fold the
    offset into [0, g) and test the two nearest instances.
    """
    g = math.gcd(c_a, c_b)
    r = (s_b - s_a) % g
    return r < t_a or r > g - t_b


def _shared_links(a_flow: Flow, a_cfg: Configuration, b_flow: Flow, b_cfg: Configuration):
    b_idx = b_flow.paths[b_cfg.pi].link_position
    for i, link in enumerate(a_flow.paths[a_cfg.pi].links):
        j = b_idx.get(link)
        if j is not None:
            yield link, i, j


def configs_conflict(a_flow: Flow, a_cfg: Configuration, b_flow: Flow, b_cfg: Configuration) -> bool:
    """True iff steady-state packets of the two configurations would queue.

    Back-to-back windows (one ending exactly when the other starts) are
    conflict-free.
    """
    for _, i, j in _shared_links(a_flow, a_cfg, b_flow, b_cfg):
        if periodic_overlap(
            a_cfg.phi + i * a_flow.per_hop, a_flow.t_trans, a_flow.t_cycle,
            b_cfg.phi + j * b_flow.per_hop, b_flow.t_trans, b_flow.t_cycle,
        ):
            return True
    return False


def transition_interference(
    old_flow: Flow, old_cfg: Configuration, new_flow: Flow, new_cfg: Configuration
) -> bool:
    """Whether in-flight packets of an old version collide with a new version.

    Time is measured from the activation instant ``t_act = 0``, which must be
    a cycle boundary of the old flow.  Old packets were sent at
    ``phi_old - m*t_cycle_old`` (m >= 1), new ones at
    ``phi_new + n*t_cycle_new`` (n >= 0).  Only old windows still open after
    ``t_act`` can collide.
    """
    c_o, t_o, ph_o = old_flow.t_cycle, old_flow.t_trans, old_flow.per_hop
    c_n, t_n, ph_n = new_flow.t_cycle, new_flow.t_trans, new_flow.per_hop
    for _, i, j in _shared_links(old_flow, old_cfg, new_flow, new_cfg):
        base_o = old_cfg.phi + i * ph_o
        base_n = new_cfg.phi + j * ph_n
        m = 1
        while True:
            s_o = base_o - m * c_o
            if s_o + t_o <= 0:
                break
            # first new instance whose end lies after s_o
            n0 = max(0, (s_o - t_n - base_n) // c_n + 1)
            if base_n + n0 * c_n < s_o + t_o:
                return True
            m += 1
    return False


def reconfig_jitter(flow: Flow, old: Configuration, new: Configuration) -> int:
    """Arrival deviation of the first new-version packet (signed, µs)."""
    return (new.phi - old.phi) + (flow.hops(new.pi) - flow.hops(old.pi)) * flow.per_hop


def reorder_bound(dt: int, t_cycle: int) -> int:
    """Upper bound on packets delivered out of order or with irregular spacing."""
    if t_cycle <= 0:
        raise ValueError("t_cycle must be positive")
    return 2 * (-(-abs(dt) // t_cycle))


def transition_interval_length(flow: Flow, cfg: Configuration) -> int:
    """Time after ``t_act`` until the last old-version packet is delivered."""
    return max(0, cfg.phi + flow.e2e[cfg.pi] - flow.t_cycle)
