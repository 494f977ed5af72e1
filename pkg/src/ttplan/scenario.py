"""Topology and workload generation, plus the end-to-end sequence driver."""

from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache

import networkx as nx
import numpy as np

from .errors import NoPathError, TopologyError
from .flows import FlowRequest
from .network import HOST, INFRA, Network, k_candidate_paths
from .oracle.sim import simulate_plan, simulate_transition
from .conflict import reorder_bound
from .plan import plan_to_dict
from .planner import STATS_FIELDS, Planner, emit_subplans

log = logging.getLogger(__name__)

MAX_TOPOLOGY_ATTEMPTS = 100
UNBOUNDED_DT = 2**40


def _ring_cables(n: int, k: int):
    if n < 3:
        raise TopologyError("ring needs at least 3 nodes")
    if k < 1 or 2 * k >= n:
        raise TopologyError(f"ring({n},{k}) would have parallel links")
    return [(i, (i + d) % n) for i in range(n) for d in range(1, k + 1)]


def _random_graph(model: str, n: int, params: dict, seed: int):
    if model in ("erdos-renyi", "gnp"):
        return nx.gnp_random_graph(n, params.get("p", 0.3), seed=seed)
    if model == "waxman":
        return nx.waxman_graph(n, beta=params.get("beta", 0.6), alpha=params.get("alpha", 0.4),
                               seed=seed)
    if model == "price":
        return nx.barabasi_albert_graph(n, params.get("m", 1), seed=seed)
    raise TopologyError(f"unknown topology model {model!r}")


def gen_topology(model: str, n: int, params: dict | None = None, seed: int = 0) -> Network:
    """Deterministic network with one host attached to every switch.

    Switches are numbered ``0..n-1``; the host of switch ``i`` is ``n + i``.
    Random models are redrawn with sub-seeds ``seed, seed+1, ...`` until
    connected.
    """
    params = dict(params or {})
    if n < 3:
        raise TopologyError("need at least 3 infrastructure nodes")
    if model == "ring":
        cables = _ring_cables(n, int(params.get("k", 1)))
    else:
        for attempt in range(MAX_TOPOLOGY_ATTEMPTS):
            graph = _random_graph(model, n, params, seed + attempt)
            if nx.is_connected(graph):
                break
        else:
            raise TopologyError(f"{model}: no connected graph in {MAX_TOPOLOGY_ATTEMPTS} attempts")
        cables = sorted(tuple(sorted(e)) for e in graph.edges())
    roles = {i: INFRA for i in range(n)}
    roles.update({n + i: HOST for i in range(n)})
    cables = list(cables) + [(i, n + i) for i in range(n)]
    return Network.from_cables(
        roles, cables,
        t_proc=int(params.get("t_proc", 2)),
        t_prop=int(params.get("t_prop", 1)),
        t_src=int(params.get("t_src", 0)),
        t_dst=int(params.get("t_dst", 0)),
    )


@dataclass
class ScenarioSpec:
    """Workload description; defaults are the desk-scale setting."""

    topology: str = "ring"
    n_nodes: int = 16
    topology_params: dict = field(default_factory=lambda: {"k": 2})
    steps: int = 10
    add_count: float = 12
    add_mode: str = "deterministic"  # or "poisson"
    remove_count: float = 0
    init_steps: int = 0  # leading steps without removals
    cluster_palette: list = field(default_factory=lambda: [1, 2, 4, 8, 16, 32])
    t_cycle_palette: list = field(default_factory=lambda: [250, 500, 1000, 2000])
    t_trans_palette: list = field(default_factory=lambda: [1, 3, 5, 12])
    deadline_factor: float = 1.0
    unbounded_dt: bool = False
    n_ub: int = 50
    n_path: int = 3
    pin_fraction: float = 0.2
    seed: int = 0

    def validate(self) -> None:
        if not self.cluster_palette or not self.t_cycle_palette or not self.t_trans_palette:
            raise ValueError("palettes must be non-empty")
        if min(self.t_trans_palette) > max(self.t_cycle_palette):
            raise ValueError("no t_trans fits any t_cycle")
        if self.add_mode not in ("deterministic", "poisson"):
            raise ValueError(f"unknown add_mode {self.add_mode!r}")
        if self.add_mode == "deterministic" and int(self.add_count) > 0 \
                and not _partitions(int(self.add_count), tuple(sorted(set(self.cluster_palette)))):
            raise ValueError(f"{self.add_count} cannot be split into clusters {self.cluster_palette}")

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown scenario fields {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@lru_cache(maxsize=None)
def _partitions(total: int, palette: tuple) -> tuple:
    """All multisets over ``palette`` summing to ``total`` (non-increasing tuples)."""
    out = []

    def rec(rest, max_idx, acc):
        if rest == 0:
            out.append(tuple(acc))
            return
        for i in range(max_idx, -1, -1):
            part = palette[i]
            if part <= rest:
                acc.append(part)
                rec(rest - part, i, acc)
                acc.pop()

    rec(total, len(palette) - 1, [])
    return tuple(out)


def cluster_sizes(total: int, palette, rng) -> tuple:
    """Uniformly chosen decomposition of ``total`` into palette-sized clusters."""
    if total <= 0:
        return ()
    options = _partitions(total, tuple(sorted(set(palette))))
    if not options:
        raise ValueError(f"{total} cannot be split into clusters {sorted(palette)}")
    return options[int(rng.integers(len(options)))]


def _draw_count(mean: float, mode: str, rng) -> int:
    if mode == "poisson":
        return max(0, int(rng.poisson(mean)))
    return max(0, int(mean))


def gen_request_sequence(spec: ScenarioSpec, net: Network | None = None) -> list:
    """Per-step ``{"add": [FlowRequest], "remove": [ids]}`` for a scenario.

    Removals are drawn from flows requested so far (assumed admitted); the
    driver skips ids that are not active when the step runs.
    """
    spec.validate()
    if net is None:
        net = gen_topology(spec.topology, spec.n_nodes, spec.topology_params, spec.seed)
    rng = np.random.default_rng(spec.seed)
    hosts = net.hosts
    live: list = []
    next_id = 0
    steps = []
    for step in range(spec.steps):
        n_add = _draw_count(spec.add_count, spec.add_mode, rng)
        if spec.add_mode == "poisson":
            # keep the draw decomposable with the palette
            while n_add and not _partitions(n_add, tuple(sorted(set(spec.cluster_palette)))):
                n_add -= 1
        adds = []
        for size in cluster_sizes(n_add, spec.cluster_palette, rng):
            hub = hosts[int(rng.integers(len(hosts)))]
            hub_is_src = bool(rng.integers(2))
            others = [h for h in hosts if h != hub]
            for _ in range(size):
                adds.append(_draw_flow(spec, net, rng, next_id, hub, hub_is_src, others))
                next_id += 1
        n_pin = int(np.floor(spec.pin_fraction * len(adds) + 0.5))
        pinned = set(rng.choice(len(adds), size=n_pin, replace=False).tolist()) if n_pin else set()
        adds = [FlowRequest(**{**r.__dict__, "pin_on_admit": i in pinned}) for i, r in enumerate(adds)]

        removes = []
        if step >= spec.init_steps and live:
            n_rem = min(len(live), _draw_count(spec.remove_count, spec.add_mode, rng))
            if n_rem:
                picks = rng.choice(len(live), size=n_rem, replace=False)
                removes = sorted(live[i] for i in picks)
        live = [f for f in live if f not in set(removes)] + [r.id for r in adds]
        steps.append({"add": adds, "remove": removes})
    return steps


def _draw_flow(spec, net, rng, fid, hub, hub_is_src, others):
    for _ in range(1000):
        other = others[int(rng.integers(len(others)))]
        t_cycle = int(spec.t_cycle_palette[int(rng.integers(len(spec.t_cycle_palette)))])
        t_trans = int(spec.t_trans_palette[int(rng.integers(len(spec.t_trans_palette)))])
        if t_trans > t_cycle:
            continue
        src, dst = (hub, other) if hub_is_src else (other, hub)
        deadline = int(spec.deadline_factor * t_cycle)
        try:
            k_candidate_paths(net, src, dst, 1, deadline, t_trans)
        except NoPathError:
            continue
        dt_limit = UNBOUNDED_DT if spec.unbounded_dt else None
        return FlowRequest(fid, src, dst, t_trans, t_cycle, deadline, dt_limit, False)
    raise ValueError("could not draw a feasible flow; check palettes and deadline_factor")


# -- scenario files ------------------------------------------------------------

def build_scenario(spec: ScenarioSpec) -> dict:
    net = gen_topology(spec.topology, spec.n_nodes, spec.topology_params, spec.seed)
    steps = gen_request_sequence(spec, net)
    return {
        "spec": spec.to_dict(),
        "topology": net.to_dict(),
        "steps": [{"add": [r.to_dict() for r in s["add"]], "remove": s["remove"]} for s in steps],
    }


def load_scenario(data: dict):
    net = Network.from_dict(data["topology"])
    spec = ScenarioSpec.from_dict(data.get("spec", {}))
    steps = [{"add": [FlowRequest.from_dict(r) for r in s.get("add", [])],
              "remove": [int(x) for x in s.get("remove", [])]} for s in data.get("steps", [])]
    return spec, net, steps


# -- sequence driver -------------------------------------------------------------

@dataclass
class SequenceResult:
    rows: list
    failures: list
    total_rejected: int
    updates: list = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return not self.failures


def check_update(net, update) -> list:
    """Oracle checks for one processing step; returns failure messages."""
    problems = []
    plan, old = update.plan, update.previous
    missing = set(old.configs) - set(update.removed) - set(plan.configs)
    if missing:
        problems.append(f"evicted active flows {sorted(missing)}")
    bad_pairs = plan.conflicts()
    if bad_pairs:
        problems.append(f"{len(bad_pairs)} conflicting pairs in plan")
    violations = simulate_plan(net, plan)
    if violations:
        problems.append(f"{len(violations)} steady-state queuing violations, first {violations[0]}")
    if old.configs:
        report = simulate_transition(net, old, plan)
        if report.violations:
            problems.append(f"{len(report.violations)} transition violations, "
                            f"first {report.violations[0]}")
        for fid, dt in update.reconfigured.items():
            flow = plan.flows[fid]
            if report.deviation.get(fid) != dt:
                problems.append(f"flow {fid}: measured deviation {report.deviation.get(fid)} != {dt}")
            if abs(dt) > flow.dt_limit:
                problems.append(f"flow {fid}: |dt| {abs(dt)} > limit {flow.dt_limit}")
            if report.irregular.get(fid, 0) > reorder_bound(dt, flow.t_cycle):
                problems.append(f"flow {fid}: {report.irregular[fid]} irregular packets")
        for fid, n in report.out_of_order.items():
            flow = plan.flows[fid]
            if n and flow.dt_limit <= flow.t_cycle - flow.t_trans:
                problems.append(f"flow {fid}: {n} out-of-order deliveries")
        for fid in set(report.irregular) - set(update.reconfigured):
            if report.irregular[fid]:
                problems.append(f"flow {fid}: irregular delivery without reconfiguration")
    return problems


def run_sequence(net, steps, n_ub: int = 50, n_path: int = 3, mode: str = "offensive",
                 alpha: int = 1000, n_reruns: int = 3, validate: bool = True,
                 out_dir: str | None = None, timing: bool = True,
                 keep_updates: bool = False) -> SequenceResult:
    """Drive the planner through a request sequence, checking every step.

    ``mode="defensive"`` pins every flow on admission, so active flows are
    never reconfigured.
    """
    if mode not in ("offensive", "defensive"):
        raise ValueError(f"unknown mode {mode!r}")
    planner = Planner(net, n_ub=n_ub, n_path=n_path, alpha=alpha, n_reruns=n_reruns)
    rows, failures, updates = [], [], []
    total_rejected = 0
    for i, step in enumerate(steps):
        adds = step["add"]
        if mode == "defensive":
            adds = [FlowRequest(**{**r.__dict__, "pin_on_admit": True}) for r in adds]
        removes = [f for f in step["remove"] if f in planner.plan.configs]
        update = planner.process_request(adds, removes)
        total_rejected += len(update.rejected)
        rows.append(update.stats_row(i, timing))
        if validate:
            for msg in check_update(net, update):
                failures.append((i, msg))
        if keep_updates:
            updates.append(update)
        if out_dir is not None:
            subplans = emit_subplans(update.plan, net, update.previous)
            doc = plan_to_dict(update.plan, update.reconfigured, subplans, n_path)
            with open(os.path.join(out_dir, f"plan_{i:03d}.json"), "w") as fh:
                json.dump(doc, fh, indent=1)
    if out_dir is not None:
        write_stats(os.path.join(out_dir, "stats.csv"), rows)
        if failures:
            with open(os.path.join(out_dir, "violations.json"), "w") as fh:
                json.dump([{"step": s, "problem": m} for s, m in failures], fh, indent=1)
    return SequenceResult(rows, failures, total_rejected, updates)


def write_stats(path: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=STATS_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
