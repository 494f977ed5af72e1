"""Flows, flow configurations and their per-link transmission windows."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import InvalidFlowError
from .network import Network, Path, k_candidate_paths, path_e2e_delay, per_hop_delay


class Configuration(NamedTuple):
    """One candidate assignment ``(flow, phase, path index)``."""

    flow: int
    phi: int
    pi: int

    @property
    def key(self) -> tuple:
        return (self.phi, self.pi)


class LinkWindow(NamedTuple):
    """Half-open occupancy ``[start, start + length)`` on a directed link."""

    link: tuple
    start: int
    length: int

    @property
    def end(self) -> int:
        return self.start + self.length


@dataclass(frozen=True)
class FlowRequest:
    """Flow parameters as requested by an application."""

    id: int
    src: object
    dst: object
    t_trans: int
    t_cycle: int
    deadline: int
    dt_limit: int | None = None
    pin_on_admit: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "src": self.src,
            "dst": self.dst,
            "t_trans": self.t_trans,
            "t_cycle": self.t_cycle,
            "deadline": self.deadline,
            "dt_limit": self.dt_limit,
            "pin_on_admit": self.pin_on_admit,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FlowRequest":
        return cls(
            id=int(d["id"]),
            src=d["src"],
            dst=d["dst"],
            t_trans=int(d["t_trans"]),
            t_cycle=int(d["t_cycle"]),
            deadline=int(d["deadline"]),
            dt_limit=None if d.get("dt_limit") is None else int(d["dt_limit"]),
            pin_on_admit=bool(d.get("pin_on_admit", False)),
        )


@dataclass(frozen=True)
class Flow:
    """A registered flow: immutable parameters plus its candidate paths.

    ``per_hop`` and ``e2e`` per path are cached since every conflict check
    needs them.
    """

    id: int
    src: object
    dst: object
    t_trans: int
    t_cycle: int
    deadline: int
    dt_limit: int
    pin_on_admit: bool
    paths: tuple
    per_hop: int
    e2e: tuple = field(repr=False)

    @property
    def max_phase(self) -> int:
        return self.t_cycle - self.t_trans

    def path(self, pi: int) -> Path:
        return self.paths[pi]

    def hops(self, pi: int) -> int:
        return self.paths[pi].hops

    def config(self, phi: int, pi: int) -> Configuration:
        return Configuration(self.id, phi, pi)

    def is_valid(self, cfg: Configuration) -> bool:
        return (
            cfg.flow == self.id
            and 0 <= cfg.phi <= self.max_phase
            and 0 <= cfg.pi < len(self.paths)
        )

    def request(self) -> FlowRequest:
        return FlowRequest(self.id, self.src, self.dst, self.t_trans, self.t_cycle,
                           self.deadline, self.dt_limit, self.pin_on_admit)


def validate_request(req: FlowRequest) -> None:
    if req.t_trans <= 0 or req.t_cycle <= 0:
        raise InvalidFlowError(f"flow {req.id}: t_trans and t_cycle must be positive")
    if req.t_trans > req.t_cycle:
        raise InvalidFlowError(f"flow {req.id}: t_trans {req.t_trans} > t_cycle {req.t_cycle}")
    if req.src == req.dst:
        raise InvalidFlowError(f"flow {req.id}: src == dst")
    if req.dt_limit is not None and req.dt_limit < 0:
        raise InvalidFlowError(f"flow {req.id}: negative dt_limit")


def register_flow(net: Network, req: FlowRequest, n_path: int = 3) -> Flow:
    """Validate a request and compute its candidate paths.

    Raises InvalidFlowError for an empty phase range and NoPathError when no
    path meets the deadline.  ``dt_limit`` defaults to ``t_cycle - t_trans``,
    which keeps packets in send order across a reconfiguration.
    """
    validate_request(req)
    paths = k_candidate_paths(net, req.src, req.dst, n_path, req.deadline, req.t_trans)
    dt_limit = req.t_cycle - req.t_trans if req.dt_limit is None else req.dt_limit
    return Flow(
        id=req.id,
        src=req.src,
        dst=req.dst,
        t_trans=req.t_trans,
        t_cycle=req.t_cycle,
        deadline=req.deadline,
        dt_limit=dt_limit,
        pin_on_admit=req.pin_on_admit,
        paths=tuple(paths),
        per_hop=per_hop_delay(net, req.t_trans),
        e2e=tuple(path_e2e_delay(net, p, req.t_trans) for p in paths),
    )


def phase_range(flow: Flow) -> range:
    """Valid phases, inclusive of ``t_cycle - t_trans``."""
    return range(0, flow.max_phase + 1)


def link_occupancy(flow: Flow, cfg: Configuration) -> list:
    """Windows of one packet along the path, relative to its cycle start.

    The packet leaves the source at ``phi``; each later link starts one
    per-hop delay after the previous one.  Windows are not folded, so late
    links may extend past ``t_cycle``.
    """
    links = flow.paths[cfg.pi].links
    return [LinkWindow(link, cfg.phi + j * flow.per_hop, flow.t_trans) for j, link in enumerate(links)]


def e2e_of(flow: Flow, cfg: Configuration) -> int:
    return flow.e2e[cfg.pi]
