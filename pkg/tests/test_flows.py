import pytest

from ttplan.errors import InvalidFlowError, NoPathError
from ttplan.flows import (
    Configuration, FlowRequest, LinkWindow, e2e_of, link_occupancy, phase_range, register_flow,
)

from .helpers import flow_on, synthetic_flow


def test_register_flow_on_ring(ring8_1):
    flow = flow_on(ring8_1, 1, 8, 9)
    assert len(flow.paths) >= 1
    assert flow.per_hop == 4
    assert flow.dt_limit == 249
    assert flow.e2e[0] == 10


def test_register_rejects_infeasible_deadline(ring8_1):
    with pytest.raises(NoPathError):
        register_flow(ring8_1, FlowRequest(1, 8, 9, 1, 250, 9))


def test_register_rejects_empty_phase_range(ring8_1):
    with pytest.raises(InvalidFlowError):
        register_flow(ring8_1, FlowRequest(1, 8, 9, 300, 250, 10**6))


def test_explicit_dt_limit_kept(ring8_1):
    assert flow_on(ring8_1, 1, 8, 9, dt_limit=17).dt_limit == 17


def test_request_roundtrip(ring8_1):
    req = FlowRequest(4, 8, 12, 3, 500, 500, None, True)
    assert FlowRequest.from_dict(req.to_dict()) == req
    flow = register_flow(ring8_1, req)
    assert flow.request().dt_limit == 497


def test_link_occupancy_unrolls_hops(line_net):
    flow = synthetic_flow(line_net, 1, [("h0", "s0", "s1", "s2")], t_trans=1)
    wins = link_occupancy(flow, Configuration(1, 5, 0))
    assert [(w.start, w.end) for w in wins] == [(5, 6), (9, 10), (13, 14)]
    assert wins[0] == LinkWindow(("h0", "s0"), 5, 1)


def test_single_link_occupancy(line_net):
    flow = synthetic_flow(line_net, 1, [("h0", "s0")], t_trans=3)
    assert link_occupancy(flow, Configuration(1, 0, 0)) == [LinkWindow(("h0", "s0"), 0, 3)]


def test_late_phase_crosses_cycle(line_net):
    flow = synthetic_flow(line_net, 1, [("h0", "s0", "s1", "s2")], t_trans=1, t_cycle=250)
    last = link_occupancy(flow, Configuration(1, 245, 0))[2]
    assert (last.start, last.end) == (253, 254)


@pytest.mark.parametrize("t_cycle, t_trans, hi", [(250, 1, 249), (250, 250, 0), (500, 12, 488)])
def test_phase_range(line_net, t_cycle, t_trans, hi):
    flow = synthetic_flow(line_net, 1, [("h0", "s0")], t_trans=t_trans, t_cycle=t_cycle)
    r = phase_range(flow)
    assert (r[0], r[-1]) == (0, hi)


def test_is_valid(line_net):
    flow = synthetic_flow(line_net, 1, [("h0", "s0"), ("h0", "s0", "h1")], t_trans=5)
    assert flow.is_valid(Configuration(1, 245, 1))
    assert not flow.is_valid(Configuration(1, 246, 0))
    assert not flow.is_valid(Configuration(1, 0, 2))
    assert not flow.is_valid(Configuration(2, 0, 0))
    assert e2e_of(flow, Configuration(1, 0, 1)) == flow.e2e[1]
