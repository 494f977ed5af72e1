"""Greedy Flow Heap heuristic for colorful independent sets.

The solver grows a set ``C`` of mutually non-conflicting configurations.
Flows are served from a min-heap keyed by their number of eligible
candidates; for the popped flow the candidate with the smallest shadow
rating is selected.  Locked vertices are invisible throughout: they never
enter ``C``, never count as eligible and never contribute to heap keys.
"""

from __future__ import annotations

import heapq
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .graph import ConflictGraph

log = logging.getLogger(__name__)

ALPHA = 1000
N_RERUNS = 3


def objective_value(admitted, active, requested) -> tuple:
    """Admit counts ``(active, new)``.

    Lexicographic order on these pairs matches the weighted objective, since
    all new flows together weigh less than one active flow.
    """
    admitted = set(admitted)
    return (len(admitted & set(active)), len(admitted & set(requested)))


def weighted_objective(admits: tuple, n_active: int, n_requested: int) -> Fraction:
    """Real-valued objective: active admits plus discounted new admits."""
    total = n_active + n_requested
    if total == 0:
        return Fraction(0)
    return admits[0] + Fraction(admits[1], total)


@dataclass
class GFHResult:
    selected: frozenset
    objective: tuple
    run_objectives: list = field(default_factory=list)
    trace: list = field(default_factory=list)


class GFHSolver:
    """One solver instance per graph snapshot (graph and locks must not change)."""

    def __init__(self, g: ConflictGraph, alpha: int = ALPHA, n_reruns: int = N_RERUNS):
        self.g = g
        self.alpha = alpha
        self.n_reruns = n_reruns
        locks = g.locks
        self.flow_of = {v: c.flow for v, c in g.vcfg.items() if v not in locks}
        self.key = {v: (g.vcfg[v].phi, g.vcfg[v].pi) for v in self.flow_of}
        if locks:
            visible = set(self.flow_of)
            self.nbrs = {v: g.adj[v] & visible for v in self.flow_of}
        else:
            self.nbrs = g.adj  # read-only use
        self.cands = {}
        for fid, table in g.cand.items():
            vs = [v for v in table.values() if v not in locks]
            vs.sort(key=self.key.__getitem__)
            self.cands[fid] = vs
        self.degree = {f: sum(len(self.nbrs[v]) for v in vs) for f, vs in self.cands.items()}
        self.trace: list = []
        self.reset()

    # -- state -----------------------------------------------------------

    def reset(self) -> None:
        self.in_c: set = set()
        self.shadowed: set = set()
        self.eligible: set = set(self.flow_of)
        self.eligible_count = {f: len(vs) for f, vs in self.cands.items()}
        self.admitted: set = set()

    def is_eligible(self, v: int) -> bool:
        return v in self.eligible

    def _select(self, v: int, heap=None, members=None) -> None:
        f = self.flow_of[v]
        self.in_c.add(v)
        self.eligible.discard(v)
        self.eligible_count[f] -= 1
        self.admitted.add(f)
        self.trace.append(v)
        eligible, flow_of, counts = self.eligible, self.flow_of, self.eligible_count
        for u in self.nbrs[v] & eligible:
            eligible.remove(u)
            self.shadowed.add(u)
            fu = flow_of[u]
            counts[fu] -= 1
            if members is not None and fu in members:
                heapq.heappush(heap, (counts[fu], -self.degree[fu], fu))

    def solitary_init(self) -> set:
        """Start ``C`` with every unlocked vertex that has no neighbor at all.

        A locked neighbor still counts here: such a vertex is not solitary
        in the graph, it merely has no competitor left in this step.
        """
        self.reset()
        adj = self.g.adj
        for f in sorted(self.cands):
            for v in self.cands[f]:
                if not adj[v]:
                    self._select(v)
        return set(self.in_c)

    def shadow_rating(self, v: int) -> Fraction:
        """Cost of selecting ``v`` in terms of neighbor flows' eligible sets.

        Each neighbor flow contributes the share of its eligible candidates
        that ``v`` would shadow, or ``alpha`` if that share is all of them.
        """
        per_flow = Counter(map(self.flow_of.__getitem__, self.nbrs[v] & self.eligible))
        whole = 0
        parts = []
        for fu, n in per_flow.items():
            total = self.eligible_count[fu]
            if n == total:
                whole += self.alpha
            else:
                parts.append((n, total))
        if not parts:
            return Fraction(whole)
        # exact sum over a common denominator, normalized once
        den = math.lcm(*(t for _, t in parts))
        return Fraction(whole * den + sum(n * (den // t) for n, t in parts), den)

    def add_config_per_flow(self, search) -> None:
        """Admit flows of ``search`` one at a time, fewest eligible first."""
        members = {f for f in search if f not in self.admitted and f in self.cands}
        heap = [(self.eligible_count[f], -self.degree[f], f) for f in members]
        heapq.heapify(heap)
        while heap:
            count, _, f = heapq.heappop(heap)
            if f not in members or count != self.eligible_count[f]:
                continue
            members.discard(f)
            if count == 0:
                continue
            best = None
            for v in self.cands[f]:
                if v not in self.eligible:
                    continue
                r = self.shadow_rating(v)
                if best is None or r < best[0]:
                    best = (r, v)
            self._select(best[1], heap, members)

    # -- driver ------------------------------------------------------------

    def objective(self, active, requested) -> tuple:
        return objective_value(self.admitted, active, requested)

    def run(self, active, requested) -> GFHResult:
        """Initial run plus up to ``n_reruns`` re-runs; best ``C`` wins."""
        active = set(active)
        requested = set(requested)
        if active & requested:
            raise ValueError("active and requested flow sets overlap")
        everyone = active | requested
        self.trace = []

        self.solitary_init()
        self.add_config_per_flow(active)
        self.add_config_per_flow(requested)
        best_c = frozenset(self.in_c)
        best_obj = self.objective(active, requested)
        run_objs = [best_obj]
        prev_admitted = set(self.admitted)

        for _ in range(self.n_reruns):
            if everyone <= prev_admitted:
                break
            self.solitary_init()
            for group in (active - prev_admitted, active & prev_admitted,
                          requested - prev_admitted, requested & prev_admitted):
                self.add_config_per_flow(group)
            obj = self.objective(active, requested)
            run_objs.append(obj)
            if obj > best_obj:
                best_obj, best_c = obj, frozenset(self.in_c)
            prev_admitted = set(self.admitted)
        log.debug("gfh objectives per run: %s", run_objs)
        return GFHResult(best_c, best_obj, run_objs, list(self.trace))


def run_gfh(g: ConflictGraph, active, requested, alpha: int = ALPHA,
            n_reruns: int = N_RERUNS) -> GFHResult:
    return GFHSolver(g, alpha, n_reruns).run(active, requested)


def extract_plan(g: ConflictGraph, selected) -> dict:
    """One configuration per admitted flow; smallest (phi, pi) among several."""
    plan = {}
    for v in selected:
        cfg = g.vcfg[v]
        held = plan.get(cfg.flow)
        if held is None or (cfg.phi, cfg.pi) < (held.phi, held.pi):
            plan[cfg.flow] = cfg
    return plan
