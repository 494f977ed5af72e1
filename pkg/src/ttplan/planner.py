"""Processing steps: admit new flows, reconfigure active ones safely.

A step purges removed flows, grows the conflict graph, locks candidates
that would break the transition, and then runs GFH in two phases: first
with every active flow frozen, and only if that rejects someone, again with
reconfiguration allowed.  The returned plan always keeps every previously
active flow.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from .conflict import hyper_cycle, reconfig_jitter, transition_interval_length
from .errors import ConsistencyError, InvalidFlowError, NoPathError, PlannerError
from .flows import FlowRequest, link_occupancy, register_flow
from .gfh import ALPHA, N_RERUNS, extract_plan, run_gfh
from .graph import ConflictGraph
from .plan import TrafficPlan

log = logging.getLogger(__name__)

DEFENSIVE = "defensive"
OFFENSIVE = "offensive"
REVERTED = "reverted"

STATS_FIELDS = ("step", "n_active", "n_requested", "n_rejected", "n_reconfigured", "phase",
                "graph_vertices", "graph_edges", "runtime_ms")


@dataclass
class PlanUpdate:
    plan: TrafficPlan
    previous: TrafficPlan
    admitted: list
    rejected: list
    reconfigured: dict  # flow id -> delta t
    phase: str
    removed: list = field(default_factory=list)
    retired: dict = field(default_factory=dict)  # removed flow id -> Flow
    graph_vertices: int = 0
    graph_edges: int = 0
    runtime_ms: float = 0.0

    def stats_row(self, step: int, timing: bool = True) -> dict:
        return {
            "step": step,
            "n_active": len(self.plan.configs),
            "n_requested": len(self.admitted) + len(self.rejected),
            "n_rejected": len(self.rejected),
            "n_reconfigured": len(self.reconfigured),
            "phase": self.phase,
            "graph_vertices": self.graph_vertices,
            "graph_edges": self.graph_edges,
            "runtime_ms": round(self.runtime_ms, 3) if timing else 0,
        }


def activation_time(prev_plan: TrafficPlan, ready: int) -> int:
    """First hyper-cycle boundary of the previous plan at or after ``ready``."""
    if not prev_plan.configs:
        return ready
    hc = prev_plan.hyper_cycle()
    k = -(-(ready - prev_plan.t0) // hc)
    return prev_plan.t0 + k * hc


def source_start_offset(flow, t_transit: int, is_new: bool = True) -> int:
    """Whole cycles a new source waits so old packets have drained."""
    if not is_new or t_transit <= 0:
        return 0
    return -(-t_transit // flow.t_cycle) * flow.t_cycle


def transit_time(plan: TrafficPlan) -> int:
    return max((transition_interval_length(plan.flows[f], c) for f, c in plan.configs.items()),
               default=0)


class Planner:
    """Stateful planner holding the conflict graph and the current plan."""

    def __init__(self, net, n_ub: int = 50, n_path: int = 3, alpha: int = ALPHA,
                 n_reruns: int = N_RERUNS, t0: int = 0, min_gap: int = 100_000):
        self.net = net
        self.n_ub = n_ub
        self.n_path = n_path
        self.alpha = alpha
        self.n_reruns = n_reruns
        self.min_gap = min_gap
        self.graph = ConflictGraph()
        self.plan = TrafficPlan(t0=t0, t_act=t0)
        self.prev_step_had_rejects = False

    @classmethod
    def restore(cls, net, plan: TrafficPlan, **kwargs) -> "Planner":
        """Planner whose state continues from a previously emitted plan.

        Candidate sets start from each flow's current configuration; the
        regular growth policy extends them on the next step.
        """
        planner = cls(net, t0=plan.t0, **kwargs)
        g = planner.graph
        for fid in sorted(plan.configs):
            flow = plan.flows[fid]
            g.add_flow(flow)
            g.insert_config(flow, plan.configs[fid])
        planner.plan = plan
        return planner

    def _solve(self, active, requested):
        return run_gfh(self.graph, active, requested, self.alpha, self.n_reruns)

    def process_request(self, add=(), remove=(), ready: int | None = None) -> PlanUpdate:
        started = time.perf_counter()
        g = self.graph
        old = self.plan
        remove = sorted(set(remove))
        for fid in remove:
            if fid not in old.configs:
                raise PlannerError(f"flow {fid} is not active")
        for req in add:
            if req.id in old.configs or req.id in g.cand:
                raise PlannerError(f"flow id {req.id} already in use")

        retired = {}
        for fid in remove:
            retired[fid] = (old.flows[fid], old.configs[fid])
            g.purge_flow(fid)
        active = set(old.configs) - set(remove)

        rejected = []
        new_ids = []
        for req in sorted(add, key=lambda r: r.id):
            try:
                flow = register_flow(self.net, req, self.n_path)
            except (NoPathError, InvalidFlowError) as exc:
                log.info("rejecting flow %s: %s", req.id, exc)
                rejected.append(req.id)
                continue
            g.add_flow(flow)
            new_ids.append(flow.id)

        if g.flows:
            g.grow_candidates(new_ids, active, self.n_ub, self.prev_step_had_rejects)

        current = {fid: old.configs[fid] for fid in active}
        for fid, cfg in current.items():
            if fid not in g.cand or not g.has_config(cfg):
                raise ConsistencyError(f"active flow {fid} lacks its current configuration")
        g.apply_reconfiguration_locks(current, retired)

        n_conservative = g.lock_conservative(current)
        result = self._solve(active, new_ids)
        phase = DEFENSIVE
        n_vertices, n_edges = len(g), g.n_edges
        if result.objective != (len(active), len(new_ids)) and n_conservative:
            g.clear_conservative_locks()
            second = self._solve(active, new_ids)
            if second.objective[0] < len(active):
                phase = REVERTED
            elif second.objective > result.objective:
                phase, result = OFFENSIVE, second

        configs = extract_plan(g, result.selected)
        missing = active - set(configs)
        if missing:
            raise ConsistencyError(f"active flows {sorted(missing)} were not admitted")
        admitted = sorted(f for f in new_ids if f in configs)
        rejected += [f for f in new_ids if f not in configs]

        reconfigured = {}
        for fid in sorted(active):
            if configs[fid] != current[fid]:
                flow = g.flows[fid]
                dt = reconfig_jitter(flow, current[fid], configs[fid])
                if abs(dt) > flow.dt_limit:
                    raise ConsistencyError(f"flow {fid}: |dt|={abs(dt)} exceeds {flow.dt_limit}")
                reconfigured[fid] = dt

        if ready is None:
            ready = old.t_act + self.min_gap if old.configs else old.t_act
        t_act = activation_time(old, max(ready, old.t_act))
        t_transit = transit_time(old)
        flows = {fid: g.flows[fid] for fid in configs}
        offsets = {fid: source_start_offset(flows[fid], t_transit) for fid in admitted}
        plan = TrafficPlan(configs, flows, t_act, old.t0, offsets, old.version + 1)

        g.clear_temporary_locks()
        for fid in rejected:
            if fid in g.cand:
                g.purge_flow(fid)
        for fid in sorted(configs):
            if flows[fid].pin_on_admit and fid not in g.pinned:
                g.pin_flow(fid, configs[fid])
        self.prev_step_had_rejects = bool(rejected)
        self.plan = plan

        return PlanUpdate(
            plan=plan,
            previous=old,
            admitted=admitted,
            rejected=sorted(rejected),
            reconfigured=reconfigured,
            phase=phase,
            removed=remove,
            retired={fid: flow for fid, (flow, _) in retired.items()},
            graph_vertices=n_vertices,
            graph_edges=n_edges,
            runtime_ms=(time.perf_counter() - started) * 1000.0,
        )


def emit_subplans(plan: TrafficPlan, net, previous: TrafficPlan | None = None) -> dict:
    """Per-node forwarding records and per-source send schedules.

    Reconfigured flows appear twice on nodes their old route crosses, once
    per plan version, so in-flight old packets keep their route.
    """
    nodes: dict = {}
    sources = []

    def add_version(flow, cfg, version):
        path = flow.paths[cfg.pi]
        windows = link_occupancy(flow, cfg)
        for j in range(1, len(path.nodes) - 1):
            node = path.nodes[j]
            rec = nodes.setdefault(node, {"node": node, "routes": [], "windows": []})
            rec["routes"].append({
                "flow": flow.id, "version": version,
                "in_link": list(path.links[j - 1]), "out_link": list(path.links[j]),
            })
            w = windows[j]
            rec["windows"].append({
                "flow": flow.id, "version": version, "out_link": list(w.link),
                "start": w.start % flow.t_cycle, "length": w.length, "t_cycle": flow.t_cycle,
            })

    for fid in sorted(plan.configs):
        flow, cfg = plan.flows[fid], plan.configs[fid]
        add_version(flow, cfg, plan.version)
        if previous is not None and fid in previous.configs and previous.configs[fid] != cfg:
            add_version(previous.flows[fid], previous.configs[fid], previous.version)
        sources.append({
            "node": flow.src, "flow": fid, "version": plan.version, "phi": cfg.phi,
            "t_cycle": flow.t_cycle,
            "start": plan.t_act + plan.start_offsets.get(fid, 0),
            "first_cycle": plan.source_start(fid),
        })
    infra = [nodes[n] for n in sorted(nodes)]
    return {"infrastructure": infra, "sources": sources}


__all__ = [
    "DEFENSIVE", "OFFENSIVE", "REVERTED", "STATS_FIELDS", "FlowRequest", "PlanUpdate",
    "Planner", "activation_time", "emit_subplans", "source_start_offset", "transit_time",
    "hyper_cycle",
]
