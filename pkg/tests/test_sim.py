import pytest

from ttplan.conflict import reconfig_jitter, reorder_bound
from ttplan.errors import MalformedPlanError, MisalignedActivationError
from ttplan.flows import Configuration
from ttplan.oracle.sim import Delivery, PacketSim, _order_stats, simulate_plan, simulate_transition
from ttplan.plan import TrafficPlan

from .helpers import flow_on, ring, synthetic_flow

ROUTE = ("h0", "s0", "s1", "s2", "h2")


def two_flow_plan(net, phi_a, phi_b, t_trans=3, cycles=(250, 250)):
    a = synthetic_flow(net, 1, [ROUTE], t_trans=t_trans, t_cycle=cycles[0])
    b = synthetic_flow(net, 2, [("h1", "s0", "s1", "s2", "h3")], t_trans=t_trans, t_cycle=cycles[1])
    return TrafficPlan({1: Configuration(1, phi_a, 0), 2: Configuration(2, phi_b, 0)}, {1: a, 2: b})


def test_identical_schedules_collide(line_net):
    violations = simulate_plan(line_net, two_flow_plan(line_net, 10, 10))
    # both enter the shared link s0 -> s1 one per-hop after sending
    assert violations
    assert violations[0].link == ("s0", "s1")


def test_back_to_back_is_not_a_violation(line_net):
    # a occupies s0->s1 during [16, 19); b arrives there at 19
    assert simulate_plan(line_net, two_flow_plan(line_net, 10, 13)) == []
    assert simulate_plan(line_net, two_flow_plan(line_net, 10, 12))


def test_single_flow_plan_clean(line_net):
    a = synthetic_flow(line_net, 1, [ROUTE], t_trans=250, t_cycle=250)
    assert simulate_plan(line_net, TrafficPlan({1: Configuration(1, 0, 0)}, {1: a})) == []
    assert simulate_plan(line_net, TrafficPlan()) == []


def test_mixed_cycles_collide_only_sometimes(line_net):
    plan = two_flow_plan(line_net, 5, 255, t_trans=1, cycles=(250, 500))
    assert simulate_plan(line_net, plan)
    plan = two_flow_plan(line_net, 5, 256, t_trans=1, cycles=(250, 500))
    assert simulate_plan(line_net, plan) == []


def test_bad_plans_rejected(line_net):
    a = synthetic_flow(line_net, 1, [ROUTE])
    with pytest.raises(MalformedPlanError):
        simulate_plan(line_net, TrafficPlan({1: Configuration(1, 0, 3)}, {1: a}))
    with pytest.raises(MalformedPlanError):
        simulate_plan(line_net, TrafficPlan({1: Configuration(1, 250, 0)}, {1: a}))
    with pytest.raises(MalformedPlanError):
        PacketSim(line_net).emit(1, "v", ("h0", "s2"), 1, 0)


def test_transition_without_reconfiguration(line_net):
    old = two_flow_plan(line_net, 10, 30)
    new = TrafficPlan(dict(old.configs), dict(old.flows), t_act=500, version=1)
    report = simulate_transition(line_net, old, new)
    assert report.clean and report.deviation == {}
    assert set(report.irregular.values()) == {0}


def test_measured_deviation_equals_jitter(line_net):
    a = synthetic_flow(line_net, 1, [ROUTE])
    old = TrafficPlan({1: Configuration(1, 10, 0)}, {1: a})
    new = TrafficPlan({1: Configuration(1, 20, 0)}, {1: a}, t_act=250)
    report = simulate_transition(line_net, old, new)
    assert report.deviation == {1: 10} == {1: reconfig_jitter(a, old.configs[1], new.configs[1])}
    assert report.out_of_order == {1: 0}


def test_large_jitter_reorder_bounded():
    net = ring(16, 1)
    flow = flow_on(net, 1, 16, 17, t_trans=1, t_cycle=250, deadline=10**4, n_path=2)
    assert [p.hops for p in flow.paths] == [2, 16]
    slow, fast = Configuration(1, 244, 1), Configuration(1, 0, 0)
    dt = reconfig_jitter(flow, slow, fast)
    assert dt == -300
    old = TrafficPlan({1: slow}, {1: flow})
    new = TrafficPlan({1: fast}, {1: flow}, t_act=1000)
    report = simulate_transition(net, old, new)
    assert report.clean
    assert report.deviation[1] == dt
    assert report.out_of_order[1] > 0
    assert report.irregular[1] <= reorder_bound(dt, 250) == 4


def test_misaligned_activation(line_net):
    old = two_flow_plan(line_net, 10, 30, cycles=(250, 500))
    new = TrafficPlan(dict(old.configs), dict(old.flows), t_act=250)
    with pytest.raises(MisalignedActivationError):
        simulate_transition(line_net, old, new)


def test_new_flow_waits_for_start_offset(line_net):
    a = synthetic_flow(line_net, 1, [ROUTE], t_trans=3)
    b = synthetic_flow(line_net, 2, [("s1", "s2", "h3")], t_trans=3)
    old = TrafficPlan({1: Configuration(1, 240, 0)}, {1: a})
    # a's last old packet holds s1 -> s2 during [252, 255); b would send there at 252
    configs = {1: Configuration(1, 100, 0), 2: Configuration(2, 2, 0)}
    early = TrafficPlan(configs, {1: a, 2: b}, t_act=250)
    assert simulate_plan(line_net, early) == []
    assert not simulate_transition(line_net, old, early).clean
    late = TrafficPlan(configs, {1: a, 2: b}, t_act=250, start_offsets={2: 250})
    assert late.source_start(2) == 500
    assert simulate_transition(line_net, old, late).clean


def test_order_stats():
    ds = [Delivery(1, "v", s, a) for s, a in [(0, 10), (250, 270), (500, 510), (750, 760)]]
    assert _order_stats(ds, 250) == (0, 2)
    swapped = [Delivery(1, "v", 0, 300), Delivery(1, "v", 250, 290), Delivery(1, "v", 500, 540)]
    assert _order_stats(swapped, 250) == (1, 2)
