import pytest

from ttplan.network import Network

from .helpers import ring


@pytest.fixture
def ring8_2():
    return ring(8, 2)


@pytest.fixture
def ring8_1():
    return ring(8, 1)


@pytest.fixture
def line_net():
    """Hosts h0, h1 on switch s0, chain s0 - s1 - s2, hosts h2, h3 on s2."""
    roles = {"s0": "infrastructure", "s1": "infrastructure", "s2": "infrastructure",
             "h0": "host", "h1": "host", "h2": "host", "h3": "host"}
    cables = [("h0", "s0"), ("h1", "s0"), ("s0", "s1"), ("s1", "s2"), ("s2", "h2"),
              ("s2", "h3")]
    return Network.from_cables(roles, cables)

