"""Workload generation: session arrival processes (Poisson / Fixed /
temporary hot spots), spatial distributions and per-session bit streams."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from antsim.network import Network, Session

DEFAULT_MEAN_PACKET_BITS = 4096.0
DEFAULT_PACKETS_PER_SESSION = 50
DEFAULT_WINDOW = 50


@dataclass
class TrafficSpec:
    temporal: str = "P"  # P | F | TMPHS (TMPHS = P base + timed hot-spot overlay)
    spatial: str = "U"  # U | R, optionally with an HS overlay via hs_count
    stream: str = "GVBR"  # CBR | GVBR
    msia_s: float = 2.4
    mpia_s: float = 0.005
    mean_packet_bits: float = DEFAULT_MEAN_PACKET_BITS
    packets_per_session: int = DEFAULT_PACKETS_PER_SESSION
    window_size: int = DEFAULT_WINDOW
    hs_count: int = 0
    mpia_hs_s: float = 0.04
    hot_spot_on_s: Optional[float] = None  # offsets from traffic start
    hot_spot_off_s: Optional[float] = None
    fixed_pairs: Optional[List[Tuple[int, int]]] = None  # overrides F one-to-all
    hot_spot_nodes: Optional[List[int]] = None

    def __post_init__(self):
        if self.msia_s <= 0 or self.mpia_s <= 0 or self.mpia_hs_s <= 0:
            raise ValueError("mean inter-arrival times must be positive")
        if self.temporal not in ("P", "F", "TMPHS"):
            raise ValueError(f"unknown temporal model {self.temporal!r}")
        if self.spatial not in ("U", "R"):
            raise ValueError(f"unknown spatial model {self.spatial!r}")
        if self.stream not in ("CBR", "GVBR"):
            raise ValueError(f"unknown stream type {self.stream!r}")


class TrafficSource:
    """Drives session creation on a network between t_start and t_end."""

    def __init__(self, net: Network, spec: TrafficSpec, t_start: float, t_end: float):
        self.net = net
        self.spec = spec
        self.t_start = t_start
        self.t_end = t_end
        sim = net.sim
        self.arrival_rng = sim.stream("session_arrivals")
        self.endpoint_rng = sim.stream("session_endpoints")
        self.size_rng = sim.stream("packet_sizes")
        self.interval_rng = sim.stream("packet_intervals")
        nodes = net.topo.nodes
        if spec.hs_count >= len(nodes):
            raise ValueError("hs_count must be smaller than the node count")
        # Per-node session inter-arrival means: identical for U, randomized
        # multipliers in [0.5, 1.5] for R, drawn once per trial.
        if spec.spatial == "R":
            self.node_msia = {
                u: spec.msia_s * self.arrival_rng.uniform(0.5, 1.5) for u in nodes
            }
        else:
            self.node_msia = {u: spec.msia_s for u in nodes}
        if spec.hot_spot_nodes is not None:
            self.hot_spots = list(spec.hot_spot_nodes)
        else:
            self.hot_spots = sorted(self.endpoint_rng.sample(nodes, spec.hs_count))

    def start(self) -> None:
        sim = self.net.sim
        spec = self.spec
        if spec.temporal == "F":
            sim.schedule(self.t_start, self._start_fixed)
        else:  # P base, with or without the TMPHS overlay
            for node in self.net.topo.nodes:
                self._schedule_next_arrival(node)
            if spec.temporal == "TMPHS":
                if spec.hot_spot_on_s is None or spec.hot_spot_off_s is None:
                    raise ValueError("TMPHS requires hot_spot_on_s and hot_spot_off_s")
                on = self.t_start + spec.hot_spot_on_s
                off = self.t_start + spec.hot_spot_off_s
                if off > on:
                    sim.schedule(on, lambda: self._start_hot_spots(off))
        # A persistent hot-spot overlay (e.g. UP-HS) runs for the whole span.
        if spec.temporal != "TMPHS" and spec.hs_count > 0:
            sim.schedule(self.t_start, lambda: self._start_hot_spots(self.t_end))

    # -- fixed sessions ------------------------------------------------------

    def _start_fixed(self) -> None:
        spec = self.spec
        pairs = spec.fixed_pairs
        if pairs is None:
            nodes = self.net.topo.nodes
            pairs = [(s, d) for s in nodes for d in nodes if s != d]
        for src, dst in pairs:
            self._open_session(src, dst, spec.mpia_s, persistent=True)

    # -- Poisson sessions ----------------------------------------------------

    def _schedule_next_arrival(self, node: int) -> None:
        gap = self.arrival_rng.expovariate(1.0 / self.node_msia[node])
        t = max(self.net.sim.now, self.t_start) + gap
        if t <= self.t_end:
            self.net.sim.schedule(t, lambda: self._session_arrival(node))

    def _session_arrival(self, node: int) -> None:
        src, dst = self.pick_session_endpoints(node)
        self._open_session(src, dst, self.spec.mpia_s, persistent=False)
        self._schedule_next_arrival(node)

    def pick_session_endpoints(self, node: int) -> Tuple[int, int]:
        others = [v for v in self.net.topo.nodes if v != node]
        return node, self.endpoint_rng.choice(others)

    # -- hot spots -----------------------------------------------------------

    def _start_hot_spots(self, until: float) -> None:
        for hs in self.hot_spots:
            for dst in self.net.topo.nodes:
                if dst != hs:
                    self._open_session(hs, dst, self.spec.mpia_hs_s, persistent=True, until=until)

    # -- session plumbing ----------------------------------------------------

    def _open_session(
        self, src: int, dst: int, mpia_s: float, persistent: bool, until: Optional[float] = None
    ) -> Session:
        spec = self.spec
        session = Session(
            self.net,
            src,
            dst,
            stream=spec.stream,
            mpia_s=mpia_s,
            mean_packet_bits=spec.mean_packet_bits,
            packets_remaining=None if persistent else spec.packets_per_session,
            end_time=min(self.t_end, until) if until is not None else self.t_end,
            size_rng=self.size_rng,
            interval_rng=self.interval_rng,
            window_size=spec.window_size,
        )
        session.start()
        return session
