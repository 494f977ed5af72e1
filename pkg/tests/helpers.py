"""Shared builders for the test suite."""

from ttplan.flows import Configuration, Flow, FlowRequest, register_flow
from ttplan.network import Network, Path, e2e_delay, per_hop_delay
from ttplan.scenario import gen_topology


def ring(n, k):
    return gen_topology("ring", n, {"k": k})


def synthetic_flow(net, fid, nodes_per_path, t_trans=1, t_cycle=250, dt_limit=None):
    """Flow over explicit node sequences, bypassing path search.

    Handy for pinning exact link windows in conflict and transition tests.
    """
    paths = tuple(Path(tuple(nodes), i) for i, nodes in enumerate(nodes_per_path))
    return Flow(
        id=fid, src=paths[0].nodes[0], dst=paths[0].nodes[-1], t_trans=t_trans,
        t_cycle=t_cycle, deadline=10**9,
        dt_limit=t_cycle - t_trans if dt_limit is None else dt_limit,
        pin_on_admit=False, paths=paths, per_hop=per_hop_delay(net, t_trans),
        e2e=tuple(e2e_delay(net, p.hops, t_trans) for p in paths),
    )


def flow_on(net, fid, src, dst, t_trans=1, t_cycle=250, deadline=None, n_path=3, **kw):
    req = FlowRequest(fid, src, dst, t_trans, t_cycle, deadline or t_cycle, **kw)
    return register_flow(net, req, n_path)


# Worked example: active flows a (5 candidates) and b (3), new flow c (1).
# a1 and b1 neighbor the active configurations and are transition-locked.
FIG5B_NAMES = ["a1", "a2", "a3", "a4", "a5", "b1", "b2", "b3", "c1"]
FIG5B_EDGES = [("b1", "c1"), ("b2", "a2"), ("b3", "a1"), ("b3", "a4"), ("a3", "b1"),
               ("a4", "c1"), ("a5", "c1"), ("a1", "c1")]
FIG5B_LOCKED = ["a1", "b1"]
FIG5B_FLOWS = {"a": 0, "b": 1, "c": 2}


def fig5b_config(name):
    return Configuration(FIG5B_FLOWS[name[0]], 10 * int(name[1:]), 0)


def fig5b_graph():
    from ttplan.graph import ConflictGraph

    configs = [fig5b_config(n) for n in FIG5B_NAMES]
    edges = [(fig5b_config(u), fig5b_config(v)) for u, v in FIG5B_EDGES]
    locks = {fig5b_config(n): "locked-transition" for n in FIG5B_LOCKED}
    return ConflictGraph.from_edges(configs, edges, locks)


def fig5b_name(g, vid):
    cfg = g.vcfg[vid]
    return "abc"[cfg.flow] + str(cfg.phi // 10)


# Three flows where the first run rejects a new flow and the re-run admits it.
RERUN_CONFIGS = [(0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 0), (2, 0, 0), (2, 1, 0)]
RERUN_EDGES = [(0, 3), (2, 4), (2, 5)]
