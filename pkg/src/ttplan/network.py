"""Physical network model, candidate paths and zero-queuing delay arithmetic.

All times are integer microseconds.
"""

from __future__ import annotations

import heapq
import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable

from .errors import NoPathError, TopologyError

HOST = "host"
INFRA = "infrastructure"

Node = Hashable
Link = tuple  # (from_node, to_node)


@dataclass(frozen=True)
class Network:
    """Directed-link topology with network-wide delay constants.

    ``links`` holds directed links; a physical cable appears as two entries.
    Use :meth:`from_cables` to build a network from undirected cables.
    """

    roles: dict
    links: frozenset
    t_proc: int = 2
    t_prop: int = 1
    t_src: int = 0
    t_dst: int = 0
    _succ: dict = field(init=False, repr=False, compare=False)
    _pred: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("t_proc", "t_prop", "t_src", "t_dst"):
            if getattr(self, name) < 0:
                raise TopologyError(f"{name} must be >= 0")
        succ = {n: [] for n in self.roles}
        pred = {n: [] for n in self.roles}
        for a, b in self.links:
            if a not in self.roles or b not in self.roles:
                raise TopologyError(f"link {(a, b)} references an undeclared node")
            if a == b:
                raise TopologyError(f"self-loop on {a}")
            succ[a].append(b)
            pred[b].append(a)
        for a, b in self.links:
            if self.roles[a] == INFRA and self.roles[b] == INFRA and (b, a) not in self.links:
                raise TopologyError(f"infrastructure link {(a, b)} is not bidirectional")
        for n in succ:
            succ[n].sort()
            pred[n].sort()
        object.__setattr__(self, "_succ", succ)
        object.__setattr__(self, "_pred", pred)

    @classmethod
    def from_cables(cls, roles: dict, cables: Iterable, **delays) -> "Network":
        links = set()
        for a, b in cables:
            links.add((a, b))
            links.add((b, a))
        return cls(dict(roles), frozenset(links), **delays)

    @property
    def hosts(self) -> list:
        return sorted(n for n, r in self.roles.items() if r == HOST)

    @property
    def infrastructure(self) -> list:
        return sorted(n for n, r in self.roles.items() if r == INFRA)

    def successors(self, node) -> list:
        return self._succ[node]

    def is_host(self, node) -> bool:
        return self.roles[node] == HOST

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        cables = sorted({tuple(sorted(l)) for l in self.links})
        return {
            "nodes": [{"id": n, "role": self.roles[n]} for n in sorted(self.roles)],
            "links": [list(c) for c in cables],
            "t_proc": self.t_proc,
            "t_prop": self.t_prop,
            "t_src": self.t_src,
            "t_dst": self.t_dst,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Network":
        roles = {n["id"]: n["role"] for n in data["nodes"]}
        for role in roles.values():
            if role not in (HOST, INFRA):
                raise TopologyError(f"unknown node role {role!r}")
        return cls.from_cables(
            roles,
            [tuple(c) for c in data["links"]],
            t_proc=int(data.get("t_proc", 2)),
            t_prop=int(data.get("t_prop", 1)),
            t_src=int(data.get("t_src", 0)),
            t_dst=int(data.get("t_dst", 0)),
        )

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def load(cls, path) -> "Network":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class Path:
    """Loop-free route from a source host to a destination host.

    ``index`` is the per-flow path identifier; ``hops`` counts the
    infrastructure nodes in between, so ``len(links) == hops + 1``.
    """

    nodes: tuple
    index: int = 0

    @cached_property
    def links(self) -> tuple:
        n = self.nodes
        return tuple((n[i], n[i + 1]) for i in range(len(n) - 1))

    @cached_property
    def link_position(self) -> dict:
        return {link: j for j, link in enumerate(self.links)}

    @property
    def hops(self) -> int:
        return len(self.nodes) - 2


def per_hop_delay(net: Network, t_trans: int) -> int:
    return t_trans + net.t_prop + net.t_proc


def e2e_delay(net: Network, hops: int, t_trans: int) -> int:
    """End-to-end delay of a zero-queuing route crossing ``hops`` switches."""
    return t_trans + net.t_prop + hops * per_hop_delay(net, t_trans) + net.t_src + net.t_dst


def path_e2e_delay(net: Network, path: Path, t_trans: int) -> int:
    return e2e_delay(net, path.hops, t_trans)


def max_hops(net: Network, deadline: int, t_trans: int) -> int:
    """Largest hop count whose e2e delay still meets ``deadline`` (-1 if none)."""
    base = e2e_delay(net, 0, t_trans)
    if base > deadline:
        return -1
    return (deadline - base) // per_hop_delay(net, t_trans)


def _lexmin_shortest(net, src, dst, banned_nodes, banned_links):
    """Fewest-hop path from src to dst, smallest node sequence among ties.

    Hosts other than ``dst`` are never used as transit nodes.
    """

    def usable(n):
        return n not in banned_nodes and (n == dst or n == src or not net.is_host(n))

    dist = {dst: 0}
    queue = deque([dst])
    while queue:
        v = queue.popleft()
        if v == src:
            break
        for u in net._pred[v]:
            if u in dist or not usable(u) or (u, v) in banned_links:
                continue
            if u != src and net.is_host(u):
                continue
            dist[u] = dist[v] + 1
            queue.append(u)
    if src not in dist:
        return None
    path = [src]
    u = src
    while u != dst:
        want = dist[u] - 1
        for v in net._succ[u]:
            if dist.get(v) == want and (u, v) not in banned_links:
                u = v
                break
        path.append(u)
    return path


def k_candidate_paths(net: Network, src, dst, n_path: int, deadline: int, t_trans: int) -> list:
    """Up to ``n_path`` deadline-feasible loop-free paths (Yen's algorithm).

    Paths are ordered by hop count, ties broken by lexicographic node sequence;
    the returned :class:`Path` objects carry indices 0..k-1 in that order.
    """
    if src == dst:
        raise NoPathError("source and destination coincide")
    if n_path < 1:
        raise ValueError("n_path must be >= 1")
    for n in (src, dst):
        if n not in net.roles:
            raise TopologyError(f"unknown node {n!r}")
        if not net.is_host(n):
            raise TopologyError(f"flow endpoint {n!r} is not a host")
    limit = max_hops(net, deadline, t_trans)
    first = _lexmin_shortest(net, src, dst, frozenset(), frozenset())
    if first is None or len(first) - 2 > limit:
        raise NoPathError(f"no path {src}->{dst} meets deadline {deadline}")

    accepted = [tuple(first)]
    seen = {tuple(first)}
    pool = []
    while len(accepted) < n_path:
        last = accepted[-1]
        for i in range(len(last) - 1):
            root = last[: i + 1]
            banned_links = {p[i:i + 2] for p in accepted if p[: i + 1] == root}
            spur = _lexmin_shortest(net, last[i], dst, set(root[:-1]), banned_links)
            if spur is None:
                continue
            cand = root[:-1] + tuple(spur)
            if cand not in seen:
                seen.add(cand)
                heapq.heappush(pool, (len(cand), cand))
        if not pool:
            break
        length, best = heapq.heappop(pool)
        if length - 2 > limit:
            break
        accepted.append(best)
    return [Path(nodes, i) for i, nodes in enumerate(accepted)]
