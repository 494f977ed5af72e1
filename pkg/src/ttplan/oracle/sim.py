"""Discrete-event store-and-forward packet simulator.

This is the ground truth the planner is checked against.  It forwards
individual packets hop by hop with FIFO output ports and reports every
packet that finds its output link busy.  Forwarding timing is derived
from node behavior here, independently of the planner's window arithmetic.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import reduce

from ..errors import MalformedPlanError, MisalignedActivationError


@dataclass(frozen=True)
class Violation:
    time: int
    link: tuple
    flow: int
    blocked_by: int
    wait: int


@dataclass
class Delivery:
    flow: int
    version: str
    sent: int
    arrived: int


@dataclass
class TransitionReport:
    violations: list
    deviation: dict = field(default_factory=dict)  # flow -> measured arrival shift
    out_of_order: dict = field(default_factory=dict)
    irregular: dict = field(default_factory=dict)  # packets out of order or off-cycle

    @property
    def clean(self) -> bool:
        return not self.violations


def _lcm(values):
    return reduce(math.lcm, values, 1)


class PacketSim:
    """Event-driven forwarding of explicitly emitted packets."""

    def __init__(self, net):
        self.net = net
        self.busy_until: dict = {}
        self.last_user: dict = {}
        self.violations: list = []
        self.deliveries: list = []
        self._events: list = []
        self._seq = 0

    def emit(self, flow_id: int, version: str, nodes, t_trans: int, send_time: int) -> None:
        nodes = tuple(nodes)
        for a, b in zip(nodes, nodes[1:]):
            if (a, b) not in self.net.links:
                raise MalformedPlanError(f"flow {flow_id}: {(a, b)} is not a link")
        self._push(send_time, (flow_id, version, nodes, t_trans, send_time, 0))

    def _push(self, t, pkt):
        heapq.heappush(self._events, (t, self._seq, pkt))
        self._seq += 1

    def run(self) -> None:
        net = self.net
        while self._events:
            ready, _, pkt = heapq.heappop(self._events)
            flow_id, version, nodes, t_trans, sent, hop = pkt
            link = (nodes[hop], nodes[hop + 1])
            free = self.busy_until.get(link)
            start = ready
            if free is not None and free > ready:
                self.violations.append(
                    Violation(ready, link, flow_id, self.last_user[link], free - ready))
                start = free
            self.busy_until[link] = start + t_trans
            self.last_user[link] = flow_id
            received = start + t_trans + net.t_prop
            if hop + 2 == len(nodes):
                self.deliveries.append(Delivery(flow_id, version, sent, received + net.t_dst))
            else:
                self._push(received + net.t_proc, (flow_id, version, nodes, t_trans, sent, hop + 1))


def _route(flow, cfg):
    try:
        return flow.paths[cfg.pi].nodes
    except (IndexError, AttributeError):
        raise MalformedPlanError(f"flow {cfg.flow}: no path {cfg.pi}") from None


def _flight_time(net, flow, nodes) -> int:
    hops = len(nodes) - 2
    return (hops + 1) * (flow.t_trans + net.t_prop + net.t_proc) + net.t_src + net.t_dst


def _emit_periodic(sim, flow, cfg, version, first_cycle, stop):
    """Send one packet per cycle from cycle start ``first_cycle`` while < ``stop``."""
    nodes = _route(flow, cfg)
    t = first_cycle
    while t < stop:
        sim.emit(flow.id, version, nodes, flow.t_trans, t + cfg.phi)
        t += flow.t_cycle


def _check_plan(plan):
    for fid, cfg in plan.configs.items():
        if fid not in plan.flows or cfg.flow != fid:
            raise MalformedPlanError(f"unknown flow {fid}")
        flow = plan.flows[fid]
        if not 0 <= cfg.phi <= flow.t_cycle - flow.t_trans:
            raise MalformedPlanError(f"flow {fid}: phase {cfg.phi} out of range")


def simulate_plan(net, plan, horizon: int | None = None) -> list:
    """Steady-state queuing violations of a plan.

    All sources are started early enough that packets still in flight from
    earlier cycles are present throughout ``[t_act, t_act + horizon)``.
    """
    _check_plan(plan)
    if not plan.configs:
        return []
    flows = {f: plan.flows[f] for f in plan.configs}
    hc = _lcm(f.t_cycle for f in flows.values())
    longest = max(_flight_time(net, flows[f], _route(flows[f], c)) for f, c in plan.configs.items())
    if horizon is None:
        horizon = 2 * hc + longest
    warm = hc * (-(-(longest + hc) // hc))
    begin = plan.t_act - warm
    stop = plan.t_act + horizon
    sim = PacketSim(net)
    for fid in sorted(plan.configs):
        flow = flows[fid]
        first = plan.t0 + (-(-(begin - plan.t0) // flow.t_cycle)) * flow.t_cycle
        _emit_periodic(sim, flow, plan.configs[fid], "v", first, stop)
    sim.run()
    return sim.violations


def simulate_transition(net, old_plan, new_plan, horizon: int | None = None) -> TransitionReport:
    """Simulate the old plan up to ``t_act`` and the new plan afterwards.

    Flows kept by the new plan switch configuration at ``t_act``; flows it
    adds start at their postponed source start; flows it drops stop.  Runs
    until every packet is delivered.
    """
    _check_plan(old_plan)
    _check_plan(new_plan)
    t_act = new_plan.t_act
    old_cycles = [old_plan.flows[f].t_cycle for f in old_plan.configs]
    hc_old = _lcm(old_cycles)
    if old_plan.configs and (t_act - old_plan.t0) % hc_old:
        raise MisalignedActivationError(f"t_act={t_act} is not a multiple of {hc_old}")

    longest = 0
    for plan in (old_plan, new_plan):
        for fid, cfg in plan.configs.items():
            longest = max(longest, _flight_time(net, plan.flows[fid], _route(plan.flows[fid], cfg)))
    hc_new = _lcm(new_plan.flows[f].t_cycle for f in new_plan.configs)
    hc_all = math.lcm(hc_old, hc_new)
    warm = hc_all * (-(-(longest + hc_all) // hc_all)) + hc_all
    latest_start = max([new_plan.source_start(f) for f in new_plan.configs] or [t_act])
    if horizon is None:
        horizon = latest_start - t_act + 2 * hc_new + longest
    stop = t_act + horizon

    sim = PacketSim(net)
    for fid in sorted(old_plan.configs):
        flow = old_plan.flows[fid]
        first = old_plan.t0 + (-(-(t_act - warm - old_plan.t0) // flow.t_cycle)) * flow.t_cycle
        _emit_periodic(sim, flow, old_plan.configs[fid], "old", first, t_act)
    for fid in sorted(new_plan.configs):
        flow = new_plan.flows[fid]
        first = t_act if fid in old_plan.configs else new_plan.source_start(fid)
        _emit_periodic(sim, flow, new_plan.configs[fid], "new", first, stop)
    sim.run()

    report = TransitionReport(sim.violations)
    by_flow: dict = {}
    for d in sim.deliveries:
        by_flow.setdefault(d.flow, []).append(d)
    for fid in sorted(set(old_plan.configs) & set(new_plan.configs)):
        flow = new_plan.flows[fid]
        got = by_flow.get(fid, [])
        old_pkts = [d for d in got if d.version == "old"]
        new_pkts = [d for d in got if d.version == "new"]
        if old_plan.configs[fid] != new_plan.configs[fid] and old_pkts and new_pkts:
            last_old = max(old_pkts, key=lambda d: d.sent)
            first_new = min(new_pkts, key=lambda d: d.sent)
            report.deviation[fid] = first_new.arrived - (last_old.arrived + flow.t_cycle)
        ooo, irregular = _order_stats(got, flow.t_cycle)
        report.out_of_order[fid] = ooo
        report.irregular[fid] = irregular
    return report


def _order_stats(deliveries, t_cycle):
    """Count packets received out of send order, and those either out of
    order or not exactly one cycle after the previously received packet."""
    seq = {d.sent: i for i, d in enumerate(sorted(deliveries, key=lambda d: d.sent))}
    received = sorted(deliveries, key=lambda d: (d.arrived, d.sent))
    ooo = irregular = 0
    highest = -1
    prev = None
    for d in received:
        s = seq[d.sent]
        late = s < highest
        if late:
            ooo += 1
        if late or (prev is not None and d.arrived - prev != t_cycle):
            irregular += 1
        highest = max(highest, s)
        prev = d.arrived
    return ooo, irregular
