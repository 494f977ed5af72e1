"""Traffic plans and their serialization."""

from __future__ import annotations

from dataclasses import dataclass, field

from .conflict import configs_conflict, hyper_cycle
from .errors import MalformedPlanError
from .flows import Configuration, FlowRequest, register_flow


@dataclass
class TrafficPlan:
    """One conflict-free configuration per admitted flow.

    ``start_offsets`` postpones the sources of flows added by this plan; a
    source begins at the first cycle boundary of its own flow at or after
    ``t_act + start_offsets[f]``.
    """

    configs: dict = field(default_factory=dict)  # flow id -> Configuration
    flows: dict = field(default_factory=dict)  # flow id -> Flow
    t_act: int = 0
    t0: int = 0
    start_offsets: dict = field(default_factory=dict)
    version: int = 0

    def __len__(self):
        return len(self.configs)

    @property
    def active(self) -> set:
        return set(self.configs)

    def hyper_cycle(self) -> int:
        return hyper_cycle(f.t_cycle for fid, f in self.flows.items() if fid in self.configs)

    def source_start(self, fid: int) -> int:
        """First cycle start at which the flow's source sends under this plan."""
        flow = self.flows[fid]
        earliest = self.t_act + self.start_offsets.get(fid, 0)
        k = -(-(earliest - self.t0) // flow.t_cycle)
        return self.t0 + k * flow.t_cycle

    def conflicts(self) -> list:
        """All conflicting configuration pairs (empty for a valid plan)."""
        items = sorted(self.configs.items())
        bad = []
        for i, (fa, ca) in enumerate(items):
            for fb, cb in items[i + 1:]:
                if configs_conflict(self.flows[fa], ca, self.flows[fb], cb):
                    bad.append((ca, cb))
        return bad


def plan_to_dict(plan: TrafficPlan, reconfigured: dict | None = None, subplans=None,
                 n_path: int = 3) -> dict:
    """JSON-ready plan document.

    The flow requests and ``n_path`` are embedded so that the plan can be
    reloaded against the same network without any other input.
    """
    reconfigured = reconfigured or {}
    flows = []
    for fid in sorted(plan.configs):
        cfg = plan.configs[fid]
        flow = plan.flows[fid]
        flows.append({
            "id": fid,
            "phi": cfg.phi,
            "pi": cfg.pi,
            "path": list(flow.paths[cfg.pi].nodes),
            "start_offset": plan.start_offsets.get(fid, 0),
            "reconfigured": fid in reconfigured,
            "delta_t": reconfigured.get(fid, 0),
        })
    out = {"version": plan.version, "activation_time": plan.t_act, "t0": plan.t0,
           "n_path": n_path, "flows": flows,
           "requests": [plan.flows[f].request().to_dict() for f in sorted(plan.configs)]}
    if subplans is not None:
        out["subplans"] = subplans
    return out


def configs_from_dict(data: dict) -> dict:
    return {int(f["id"]): Configuration(int(f["id"]), int(f["phi"]), int(f["pi"]))
            for f in data["flows"]}


def plan_from_dict(net, data: dict) -> TrafficPlan:
    """Rebuild a plan written by :func:`plan_to_dict`.

    Paths are recomputed from the embedded requests and must match the
    recorded ones, otherwise the file belongs to a different network.
    """
    n_path = int(data.get("n_path", 3))
    requests = {int(r["id"]): FlowRequest.from_dict(r) for r in data.get("requests", [])}
    configs, flows, offsets = {}, {}, {}
    for rec in data["flows"]:
        fid = int(rec["id"])
        if fid not in requests:
            raise MalformedPlanError(f"flow {fid} has no request record")
        flow = register_flow(net, requests[fid], n_path)
        cfg = Configuration(fid, int(rec["phi"]), int(rec["pi"]))
        if cfg.pi >= len(flow.paths) or list(flow.paths[cfg.pi].nodes) != list(rec["path"]):
            raise MalformedPlanError(f"flow {fid}: recorded path does not match the network")
        configs[fid], flows[fid] = cfg, flow
        if rec.get("start_offset"):
            offsets[fid] = int(rec["start_offset"])
    return TrafficPlan(configs, flows, int(data["activation_time"]), int(data.get("t0", 0)),
                       offsets, int(data.get("version", 0)))
