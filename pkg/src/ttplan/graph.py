"""Vertex-colored conflict graph over candidate configurations.

Vertices are integer ids; each maps to a :class:`Configuration` and is
colored by its flow.  Edges only join conflicting configurations of
different flows.  A per-link index limits conflict checks on insertion to
vertices that share at least one directed link.
"""

from __future__ import annotations

import math
from enum import Enum

import numpy as np

from .conflict import configs_conflict, reconfig_jitter, transition_interference
from .errors import (
    DuplicateConfigurationError,
    EmptyGraphError,
    NotACandidateError,
    UnknownFlowError,
)
from .flows import Configuration, Flow


class Lock(str, Enum):
    TRANSITION = "locked-transition"
    QOS = "locked-qos"
    CONSERVATIVE = "locked-conservative"


class ConfigGenerator:
    """Stateful walk through a flow's phase/path space.

    For each phase all paths are emitted in order, then the phase advances
    by ``dphi``.  A step past the end of the phase range restarts at the
    lowest phase not yet covered; that first restart marks the full pass.
    """

    def __init__(self, flow: Flow):
        self.flow_id = flow.id
        self.n_paths = len(flow.paths)
        self.max_phase = flow.max_phase
        self.phi = 0
        self.pi = 0
        self._covered = bytearray(self.max_phase + 1)
        self._low = 0
        self.full_pass = False
        self.exhausted = False
        self.disabled = False

    def next(self, dphi: int):
        """Return the next unseen Configuration, or None once exhausted."""
        if self.exhausted or self.disabled:
            return None
        cfg = Configuration(self.flow_id, self.phi, self.pi)
        self.pi += 1
        if self.pi == self.n_paths:
            self.pi = 0
            self._covered[self.phi] = 1
            self._advance(max(1, dphi))
        return cfg

    def _advance(self, dphi: int) -> None:
        covered = self._covered
        nxt = self.phi + dphi
        while nxt <= self.max_phase and covered[nxt]:
            nxt += dphi
        if nxt > self.max_phase:
            self.full_pass = True
            while self._low <= self.max_phase and covered[self._low]:
                self._low += 1
            if self._low > self.max_phase:
                self.exhausted = True
                return
            nxt = self._low
        self.phi = nxt


class _LinkIndex:
    """Column store of the windows that candidates place on one link.

    Rows are appended on insertion and tombstoned on removal; the arrays
    are compacted once more than half of the rows are dead.
    """

    _COLS = ("vid", "flow", "start", "t_trans", "t_cycle")

    def __init__(self):
        self.n = 0
        self.dead = 0
        self.slot: dict = {}  # vid -> row
        self.alive = np.zeros(16, dtype=bool)
        for name in self._COLS:
            setattr(self, name, np.zeros(16, dtype=np.int64))

    def __len__(self):
        return len(self.slot)

    def add(self, vid, flow, start, t_trans, t_cycle):
        if self.n == len(self.alive):
            size = 2 * self.n
            self.alive = np.resize(self.alive, size)
            for name in self._COLS:
                setattr(self, name, np.resize(getattr(self, name), size))
        i = self.n
        self.vid[i], self.flow[i], self.start[i] = vid, flow, start
        self.t_trans[i], self.t_cycle[i] = t_trans, t_cycle
        self.alive[i] = True
        self.slot[vid] = i
        self.n += 1

    def remove(self, vid):
        i = self.slot.pop(vid, None)
        if i is None:
            return
        self.alive[i] = False
        self.dead += 1
        if self.dead * 2 > self.n and self.n > 64:
            keep = np.flatnonzero(self.alive[:self.n])
            for name in self._COLS:
                col = getattr(self, name)
                col[:len(keep)] = col[keep]
            self.alive[:len(keep)] = True
            self.alive[len(keep):] = False
            self.n, self.dead = len(keep), 0
            self.slot = {int(v): k for k, v in enumerate(self.vid[:self.n])}

    def entries(self):
        """Yield ``(vid, flow)`` for live rows."""
        rows = np.flatnonzero(self.alive[:self.n])
        return zip(self.vid[rows].tolist(), self.flow[rows].tolist())

    def conflicts(self, flow_id, s_a, t_a, c_a):
        """Vertex ids of other flows whose window here overlaps ``[s_a, s_a+t_a)``
        in some cycle."""
        n = self.n
        g = np.gcd(self.t_cycle[:n], c_a)
        r = (self.start[:n] - s_a) % g
        hit = (r < t_a) | (r > g - self.t_trans[:n])
        hit &= self.alive[:n]
        hit &= self.flow[:n] != flow_id
        return self.vid[:n][hit]


def nearest_rank_percentile(values, q: float):
    ordered = sorted(values)
    rank = max(1, math.ceil(q / 100.0 * len(ordered)))
    return ordered[rank - 1]


class ConflictGraph:
    def __init__(self):
        self.flows: dict = {}
        self.cand: dict = {}  # flow id -> {(phi, pi): vid}
        self.vcfg: dict = {}
        self.adj: dict = {}
        self.locks: dict = {}  # vid -> Lock, absent means unlocked
        self.pinned: set = set()
        self.generators: dict = {}
        self.n_edges = 0
        self._by_link: dict = {}  # link -> _LinkIndex
        self._next_vid = 0

    # -- basic accessors --------------------------------------------------

    def __len__(self):
        return len(self.vcfg)

    def vflow(self, vid: int) -> int:
        return self.vcfg[vid].flow

    def vertex(self, cfg: Configuration) -> int:
        try:
            return self.cand[cfg.flow][cfg.phi, cfg.pi]
        except KeyError:
            raise NotACandidateError(f"{cfg} is not a candidate") from None

    def candidates(self, flow_id: int) -> list:
        return list(self.cand[flow_id].values())

    def has_config(self, cfg: Configuration) -> bool:
        return (cfg.phi, cfg.pi) in self.cand.get(cfg.flow, ())

    def is_locked(self, vid: int) -> bool:
        return vid in self.locks

    # -- flows -------------------------------------------------------------

    def add_flow(self, flow: Flow) -> None:
        if flow.id in self.flows:
            raise DuplicateConfigurationError(f"flow {flow.id} already in graph")
        self.flows[flow.id] = flow
        self.cand[flow.id] = {}
        self.generators[flow.id] = ConfigGenerator(flow)

    def purge_flow(self, flow_id: int) -> int:
        """Remove a flow, its candidates and their edges; return vertex count."""
        if flow_id not in self.cand:
            raise UnknownFlowError(flow_id)
        vids = list(self.cand[flow_id].values())
        for vid in vids:
            self._remove_vertex(vid)
        del self.cand[flow_id]
        self.flows.pop(flow_id, None)
        self.generators.pop(flow_id, None)
        self.pinned.discard(flow_id)
        return len(vids)

    # -- vertices ----------------------------------------------------------

    def _new_vertex(self, cfg: Configuration) -> int:
        if cfg.flow not in self.cand:
            raise UnknownFlowError(cfg.flow)
        if (cfg.phi, cfg.pi) in self.cand[cfg.flow]:
            raise DuplicateConfigurationError(f"{cfg} already present")
        vid = self._next_vid
        self._next_vid += 1
        self.vcfg[vid] = cfg
        self.adj[vid] = set()
        self.cand[cfg.flow][cfg.phi, cfg.pi] = vid
        return vid

    def add_edge(self, u: int, v: int) -> None:
        if self.vcfg[u].flow == self.vcfg[v].flow:
            raise ValueError("edges must join different flows")
        if v not in self.adj[u]:
            self.adj[u].add(v)
            self.adj[v].add(u)
            self.n_edges += 1

    def conflicting_vertices(self, flow: Flow, cfg: Configuration) -> set:
        """Vertices of other flows whose configurations conflict with ``cfg``."""
        hits = set()
        for j, link in enumerate(flow.paths[cfg.pi].links):
            index = self._by_link.get(link)
            if index:
                found = index.conflicts(flow.id, cfg.phi + j * flow.per_hop,
                                        flow.t_trans, flow.t_cycle)
                hits.update(found.tolist())
        return hits

    def insert_config(self, flow: Flow, cfg: Configuration) -> int:
        """Insert a candidate and connect it to every conflicting vertex."""
        if not flow.is_valid(cfg):
            raise ValueError(f"{cfg} invalid for flow {flow.id}")
        hits = self.conflicting_vertices(flow, cfg)
        vid = self._new_vertex(cfg)
        adj = self.adj
        adj[vid] = hits
        for u in hits:
            adj[u].add(vid)
        self.n_edges += len(hits)
        for j, link in enumerate(flow.paths[cfg.pi].links):
            index = self._by_link.get(link)
            if index is None:
                index = self._by_link[link] = _LinkIndex()
            index.add(vid, flow.id, cfg.phi + j * flow.per_hop, flow.t_trans, flow.t_cycle)
        return len(hits)

    def _remove_vertex(self, vid: int) -> None:
        cfg = self.vcfg.pop(vid)
        for u in self.adj[vid]:
            self.adj[u].discard(vid)
        self.n_edges -= len(self.adj.pop(vid))
        self.locks.pop(vid, None)
        del self.cand[cfg.flow][cfg.phi, cfg.pi]
        flow = self.flows.get(cfg.flow)
        if flow is not None and flow.paths:
            for link in flow.paths[cfg.pi].links:
                index = self._by_link.get(link)
                if index is not None:
                    index.remove(vid)

    # -- candidate generation --------------------------------------------

    def compute_delta_phi(self) -> int:
        """75th percentile (nearest rank) of t_trans over the graph's flows."""
        if not self.flows:
            raise EmptyGraphError("no flows in graph")
        return max(1, nearest_rank_percentile([f.t_trans for f in self.flows.values()], 75))

    def grow_candidates(self, new_flows, active_flows, n_ub: int, prev_step_had_rejects: bool,
                        dphi: int | None = None) -> dict:
        """Insert fresh candidates per the growth policy; return counts per flow.

        New flows get up to ``n_ub``.  Active flows get up to ``n_ub`` until
        their generator finishes its first phase pass; afterwards only when
        the previous step rejected flows.  Pinned flows never grow.
        """
        if dphi is None:
            dphi = self.compute_delta_phi()
        added = {}
        for fid in sorted(new_flows):
            added[fid] = self._grow(fid, n_ub, dphi, stop_at_full_pass=False)
        for fid in sorted(active_flows):
            if fid in self.pinned:
                added[fid] = 0
            elif prev_step_had_rejects:
                added[fid] = self._grow(fid, n_ub, dphi, stop_at_full_pass=False)
            else:
                added[fid] = self._grow(fid, n_ub, dphi, stop_at_full_pass=True)
        return added

    def _grow(self, fid: int, n_ub: int, dphi: int, stop_at_full_pass: bool) -> int:
        gen = self.generators[fid]
        flow = self.flows[fid]
        count = 0
        while count < n_ub:
            if stop_at_full_pass and gen.full_pass:
                break
            cfg = gen.next(dphi)
            if cfg is None:
                break
            if self.has_config(cfg):
                continue
            self.insert_config(flow, cfg)
            count += 1
        return count

    # -- locking and pinning ----------------------------------------------

    def _set_lock(self, vid: int, kind: Lock) -> bool:
        current = self.locks.get(vid)
        if current is None or (current == Lock.CONSERVATIVE and kind != Lock.CONSERVATIVE):
            self.locks[vid] = kind
            return current is None
        return False

    def apply_reconfiguration_locks(self, current: dict, retired: dict | None = None) -> int:
        """Lock candidates that would break a seamless transition.

        ``current`` maps each active flow id to its configuration in the old
        plan.  For each active flow f:

        * candidates of f whose new version interferes with the old one, and
          neighbors of f's current vertex belonging to other active flows
          whose new version would interfere with f's old version, are locked
          for transition;
        * remaining candidates of f whose reconfiguration jitter exceeds its
          ``dt_limit`` are locked for QoS.

        ``retired`` maps removed flows to ``(Flow, Configuration)``; their
        in-flight packets still occupy the network after activation, so any
        active-flow candidate interfering with them is locked as well.

        The current configurations themselves are never locked.
        """
        count = 0
        current_vids = {}
        for fid, cfg in current.items():
            if fid not in self.cand:
                continue
            current_vids[fid] = self.cand[fid].get((cfg.phi, cfg.pi))
        protected = {v for v in current_vids.values() if v is not None}

        for fid in sorted(current):
            cfg = current[fid]
            flow = self.flows[fid]
            cur_vid = current_vids.get(fid)
            for (phi, pi), vid in self.cand[fid].items():
                if vid == cur_vid:
                    continue
                cand = Configuration(fid, phi, pi)
                if transition_interference(flow, cfg, flow, cand):
                    count += self._set_lock(vid, Lock.TRANSITION)
                elif abs(reconfig_jitter(flow, cfg, cand)) > flow.dt_limit:
                    count += self._set_lock(vid, Lock.QOS)
            if cur_vid is None:
                continue
            for vid in self.adj[cur_vid]:
                other = self.vcfg[vid]
                if other.flow not in current or vid in protected:
                    continue
                if transition_interference(flow, cfg, self.flows[other.flow], other):
                    count += self._set_lock(vid, Lock.TRANSITION)

        for rid in sorted(retired or {}):
            r_flow, r_cfg = retired[rid]
            seen = set()
            for link in r_flow.paths[r_cfg.pi].links:
                index = self._by_link.get(link)
                for vid, owner in (index.entries() if index else ()):
                    if owner not in current or vid in seen or vid in protected:
                        continue
                    seen.add(vid)
                    other = self.vcfg[vid]
                    if transition_interference(r_flow, r_cfg, self.flows[other.flow], other):
                        count += self._set_lock(vid, Lock.TRANSITION)
        return count

    def lock_conservative(self, current: dict) -> int:
        """Hide every active-flow candidate except its current configuration."""
        count = 0
        for fid, cfg in current.items():
            for (phi, pi), vid in self.cand[fid].items():
                if (phi, pi) != (cfg.phi, cfg.pi):
                    count += self._set_lock(vid, Lock.CONSERVATIVE)
        return count

    def clear_conservative_locks(self) -> int:
        gone = [v for v, k in self.locks.items() if k == Lock.CONSERVATIVE]
        for v in gone:
            del self.locks[v]
        return len(gone)

    def clear_temporary_locks(self) -> int:
        n = len(self.locks)
        self.locks.clear()
        return n

    def pin_flow(self, flow_id: int, cfg: Configuration) -> int:
        """Permanently reduce a flow's candidates to ``cfg``."""
        if flow_id not in self.cand:
            raise UnknownFlowError(flow_id)
        keep = self.cand[flow_id].get((cfg.phi, cfg.pi))
        if keep is None or cfg.flow != flow_id:
            raise NotACandidateError(f"{cfg} is not a candidate of flow {flow_id}")
        doomed = [v for v in self.cand[flow_id].values() if v != keep]
        for v in doomed:
            self._remove_vertex(v)
        self.pinned.add(flow_id)
        gen = self.generators.get(flow_id)
        if gen is not None:
            gen.disabled = True
        return len(doomed)

    # -- export / construction helpers ------------------------------------

    def to_dict(self) -> dict:
        order = sorted(self.vcfg, key=lambda v: self.vcfg[v])
        verts = [
            {"flow": c.flow, "phi": c.phi, "pi": c.pi,
             "lock": self.locks[v].value if v in self.locks else "unlocked"}
            for v in order for c in (self.vcfg[v],)
        ]
        edges = sorted(
            (tuple(self.vcfg[u]), tuple(self.vcfg[v]))
            for u in self.adj for v in self.adj[u] if self.vcfg[u] < self.vcfg[v]
        )
        return {"vertices": verts, "edges": [list(map(list, e)) for e in edges],
                "pinned": sorted(self.pinned)}

    @classmethod
    def from_edges(cls, configs, edges, locks=None) -> "ConflictGraph":
        """Build an abstract graph from explicit configurations and edges.

        ``configs`` is a sequence of Configuration; ``edges`` pairs of
        configurations (or indices into ``configs``).  No conflict checking
        is done, so this is meant for solver tests and saved instances.
        """
        g = cls()
        index = {}
        for i, cfg in enumerate(configs):
            cfg = Configuration(*cfg)
            if cfg.flow not in g.cand:
                g.cand[cfg.flow] = {}
            vid = g._new_vertex(cfg)
            index[i] = vid
            index[cfg] = vid
        for a, b in edges:
            a = index[a if isinstance(a, int) else Configuration(*a)]
            b = index[b if isinstance(b, int) else Configuration(*b)]
            g.add_edge(a, b)
        for cfg, kind in (locks or {}).items():
            key = cfg if isinstance(cfg, int) else Configuration(*cfg)
            g.locks[index[key]] = Lock(kind)
        return g

    def recheck_edges(self) -> list:
        """Pairs whose edge presence disagrees with configs_conflict (slow)."""
        bad = []
        vids = sorted(self.vcfg)
        for i, u in enumerate(vids):
            cu = self.vcfg[u]
            for v in vids[i + 1:]:
                cv = self.vcfg[v]
                if cu.flow == cv.flow:
                    if v in self.adj[u]:
                        bad.append((cu, cv))
                    continue
                want = configs_conflict(self.flows[cu.flow], cu, self.flows[cv.flow], cv)
                if want != (v in self.adj[u]):
                    bad.append((cu, cv))
        return bad
