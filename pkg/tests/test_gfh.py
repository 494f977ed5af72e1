import hashlib
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ttplan.errors import InstanceTooLargeError
from ttplan.flows import Configuration
from ttplan.gfh import (
    ALPHA, GFHSolver, extract_plan, objective_value, run_gfh, weighted_objective,
)
from ttplan.graph import ConflictGraph, Lock
from ttplan.oracle import exact_best_plan

from .helpers import RERUN_CONFIGS, RERUN_EDGES, fig5b_graph, fig5b_name


def random_instance(seed, max_vertices=25):
    """Random abstract conflict graph with a few locks and active flows."""
    rng = random.Random(seed)
    n_flows = rng.randint(2, 7)
    configs = []
    for f in range(n_flows):
        for k in range(rng.randint(1, 5)):
            configs.append((f, k, rng.randint(0, 1)))
    configs = configs[:max_vertices]
    p = rng.uniform(0.1, 0.6)
    edges = [(i, j) for i in range(len(configs)) for j in range(i + 1, len(configs))
             if configs[i][0] != configs[j][0] and rng.random() < p]
    locks = {i: "locked-transition" for i in range(len(configs)) if rng.random() < 0.1}
    g = ConflictGraph.from_edges(configs, edges, locks)
    flows = sorted(g.cand)
    n_active = rng.randint(0, len(flows))
    return g, set(flows[:n_active]), set(flows[n_active:])


def is_independent(g, vids):
    return all(u not in g.adj[v] for v in vids for u in vids)


# -- worked example ---------------------------------------------------------------

def test_fig5b_no_solitary_start():
    g = fig5b_graph()
    assert GFHSolver(g).solitary_init() == set()


def test_fig5b_selection():
    g = fig5b_graph()
    res = run_gfh(g, active={0, 1}, requested={2})
    assert sorted(fig5b_name(g, v) for v in res.selected) == ["a3", "b2", "c1"]
    assert res.objective == (2, 1)
    assert [fig5b_name(g, v) for v in res.trace] == ["b2", "a3", "c1"]
    assert res.run_objectives == [(2, 1)]


def test_fig5b_exact_agrees():
    g = fig5b_graph()
    assert exact_best_plan(g, {0, 1}, {2})[0] == (2, 1)


# -- solitary init and ratings ----------------------------------------------------

def test_edgeless_graph_all_solitary():
    g = ConflictGraph.from_edges([(0, 0, 0), (0, 1, 0), (1, 0, 0)], [], {(0, 1, 0): "locked-qos"})
    assert GFHSolver(g).solitary_init() == {0, 2}


def test_zero_degree_vertex_solitary():
    g = ConflictGraph.from_edges([(0, 0, 0), (1, 0, 0), (3, 0, 0)], [(0, 1)])
    assert 2 in GFHSolver(g).solitary_init()


def test_locked_neighbor_still_prevents_solitary():
    g = ConflictGraph.from_edges([(0, 0, 0), (1, 0, 0)], [(0, 1)], {(1, 0, 0): "locked-qos"})
    assert GFHSolver(g).solitary_init() == set()
    assert run_gfh(g, set(), {0, 1}).objective == (0, 1)


def test_shadow_rating_examples():
    # v (flow 0) next to 2 of flow 1's 4 candidates
    g = ConflictGraph.from_edges(
        [(0, 0, 0)] + [(1, i, 0) for i in range(4)] + [(2, 0, 0)] + [(3, i, 0) for i in range(4)],
        [(0, 1), (0, 2)])
    s = GFHSolver(g)
    s.reset()
    assert s.shadow_rating(0) == Fraction(1, 2)
    assert s.shadow_rating(5) == 0
    # flow 2's only candidate plus one of flow 3's four
    g = ConflictGraph.from_edges(
        [(0, 0, 0), (2, 0, 0)] + [(3, i, 0) for i in range(4)], [(0, 1), (0, 2)])
    s = GFHSolver(g)
    s.reset()
    assert s.shadow_rating(0) == Fraction(100025, 100)


def test_alpha_dominates_fractional_terms():
    # one α term beats δ-terms from 999 neighbor flows, each just below 1
    assert ALPHA > 999 * Fraction(99, 100)


def test_single_config_admitted():
    g = ConflictGraph.from_edges([(0, 0, 0)], [])
    assert run_gfh(g, set(), {0}).objective == (0, 1)


def test_two_connected_flows_second_skipped():
    g = ConflictGraph.from_edges([(0, 0, 0), (1, 0, 0)], [(0, 1)])
    s = GFHSolver(g, n_reruns=0)
    s.reset()
    s.add_config_per_flow({0, 1})
    assert s.admitted == {0}


def test_actives_all_fit_no_reruns():
    g = ConflictGraph.from_edges([(0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 0)], [(0, 2)])
    res = run_gfh(g, {0, 1}, set())
    assert res.objective == (2, 0)
    assert len(res.run_objectives) == 1


def test_rerun_improves_adversarial_instance():
    g = ConflictGraph.from_edges(RERUN_CONFIGS, RERUN_EDGES)
    assert run_gfh(g, {0}, {1, 2}, n_reruns=0).objective == (1, 1)
    res = run_gfh(g, {0}, {1, 2})
    assert res.run_objectives == [(1, 1), (1, 2)]
    assert res.objective == exact_best_plan(g, {0}, {1, 2})[0] == (1, 2)


# -- extraction and objective -------------------------------------------------------

def test_extract_plan_identity_and_tie():
    g = ConflictGraph.from_edges([(0, 0, 1), (0, 5, 0), (1, 3, 2)], [])
    assert extract_plan(g, {0, 1, 2}) == {0: Configuration(0, 0, 1), 1: Configuration(1, 3, 2)}
    assert extract_plan(g, {2}) == {1: Configuration(1, 3, 2)}
    assert extract_plan(g, set()) == {}


def test_objective_examples():
    assert objective_value({1, 2, 3, 4, 5}, {1, 2, 3}, {4, 5, 6, 7}) == (3, 2)
    assert weighted_objective((3, 2), 3, 4) == 3 + Fraction(2, 7)
    assert objective_value(set(), set(), set()) == (0, 0)
    assert weighted_objective((0, 0), 0, 0) == 0
    assert (3, 4) > (2, 4)
    assert weighted_objective((3, 4), 3, 4) > weighted_objective((2, 4), 3, 4)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 20), st.integers(0, 20), st.integers(0, 20), st.integers(0, 20))
def test_lexicographic_order_matches_weighted(a1, n1, a2, n2):
    total = max(a1, a2) + max(n1, n2)
    lhs = weighted_objective((a1, n1), max(a1, a2), max(n1, n2))
    rhs = weighted_objective((a2, n2), max(a1, a2), max(n1, n2))
    if total:
        assert ((a1, n1) > (a2, n2)) == (lhs > rhs)


# -- property suite ------------------------------------------------------------------

class RecordingSolver(GFHSolver):
    """Checks independence of C after every single insertion."""

    def _select(self, v, heap=None, members=None):
        assert v not in self.g.locks
        super()._select(v, heap, members)
        assert is_independent(self.g, self.in_c)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_c_stays_independent(seed):
    g, active, req = random_instance(seed)
    res = RecordingSolver(g).run(active, req)
    assert is_independent(g, res.selected)
    assert not set(res.selected) & set(g.locks)
    admitted = {g.vcfg[v].flow for v in res.selected}
    assert res.objective == objective_value(admitted, active, req)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_locked_vertices_invisible(seed):
    g, active, req = random_instance(seed)
    solver = GFHSolver(g)
    for fid, table in g.cand.items():
        unlocked = [v for v in table.values() if v not in g.locks]
        assert solver.eligible_count[fid] == len(unlocked)
        assert solver.degree[fid] == sum(len(g.adj[v] - g.locks.keys()) for v in unlocked)
    res = solver.run(active, req)
    assert not set(res.selected) & set(g.locks)

    # lock kind and edges among locked vertices make no difference
    locked = sorted(g.locks)
    for v in locked:
        g.locks[v] = Lock.QOS
    for i, u in enumerate(locked):
        for v in locked[i + 1:]:
            if g.vcfg[u].flow != g.vcfg[v].flow:
                g.add_edge(u, v)
    again = run_gfh(g, active, req)
    assert again.selected == res.selected and again.trace == res.trace


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_rerun_monotone(seed):
    g, active, req = random_instance(seed)
    res = run_gfh(g, active, req)
    assert res.objective == max(res.run_objectives)
    assert res.objective >= res.run_objectives[0]
    assert res.objective >= run_gfh(g, active, req, n_reruns=0).objective


def _digest(g, res):
    plan = extract_plan(g, res.selected)
    return hashlib.sha256(repr(sorted(plan.items())).encode()).hexdigest()


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**9))
def test_deterministic(seed):
    g1, active, req = random_instance(seed)
    g2, _, _ = random_instance(seed)
    assert _digest(g1, run_gfh(g1, active, req)) == _digest(g2, run_gfh(g2, active, req))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_never_beats_exact(seed):
    g, active, req = random_instance(seed)
    best, chosen = exact_best_plan(g, active, req)
    assert run_gfh(g, active, req).objective <= best
    assert is_independent(g, set(chosen.values()))


def test_exact_examples():
    assert exact_best_plan(ConflictGraph(), set(), set()) == ((0, 0), {})
    g = ConflictGraph.from_edges([(0, 0, 0), (1, 0, 0)], [(0, 1)])
    assert exact_best_plan(g, {0}, set())[0] == (1, 0)
    assert exact_best_plan(g, {0}, {1})[0] == (1, 0)


def test_exact_refuses_large_graphs():
    g = ConflictGraph.from_edges([(i, 0, 0) for i in range(26)], [])
    with pytest.raises(InstanceTooLargeError):
        exact_best_plan(g, set(), set(range(26)))


def test_lock_kinds_all_hidden():
    for kind in Lock:
        g = ConflictGraph.from_edges([(0, 0, 0), (0, 1, 0)], [], {(0, 0, 0): kind.value})
        res = run_gfh(g, {0}, set())
        assert {g.vcfg[v] for v in res.selected} == {Configuration(0, 1, 0)}
