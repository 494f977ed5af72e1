"""Exhaustive optimum for tiny conflict graphs."""

from __future__ import annotations

from ..errors import InstanceTooLargeError

MAX_VERTICES = 25


def exact_best_plan(g, active, requested, max_vertices: int = MAX_VERTICES):
    """Best ``(active_admits, new_admits)`` over all colorful independent sets.

    Branches per flow over "skip" or one of its unlocked candidates, with a
    simple admit-count bound.  Returns ``(objective, {flow: vid})``.
    """
    if len(g.vcfg) > max_vertices:
        raise InstanceTooLargeError(f"{len(g.vcfg)} vertices > {max_vertices}")
    active = set(active)
    requested = set(requested)
    order = sorted(active) + sorted(requested)
    options = {
        f: sorted((v for v in g.cand.get(f, {}).values() if v not in g.locks),
                  key=lambda v: g.vcfg[v])
        for f in order
    }
    order = [f for f in order if options[f]]
    rest_a = [0] * (len(order) + 1)
    rest_n = [0] * (len(order) + 1)
    for i in range(len(order) - 1, -1, -1):
        rest_a[i] = rest_a[i + 1] + (order[i] in active)
        rest_n[i] = rest_n[i + 1] + (order[i] in requested)

    best = [(0, 0), {}]
    chosen: dict = {}
    blocked: dict = {}  # vid -> number of chosen neighbors

    def search(i, a, n):
        if (a, n) > best[0]:
            best[0] = (a, n)
            best[1] = dict(chosen)
        if i == len(order):
            return
        if (a + rest_a[i], n + rest_n[i]) <= best[0]:
            return
        f = order[i]
        is_active = f in active
        for v in options[f]:
            if blocked.get(v):
                continue
            chosen[f] = v
            for u in g.adj[v]:
                blocked[u] = blocked.get(u, 0) + 1
            search(i + 1, a + is_active, n + (not is_active))
            for u in g.adj[v]:
                blocked[u] -= 1
            del chosen[f]
        search(i + 1, a, n)

    search(0, 0, 0)
    return best[0], best[1]
