"""The communication network model: store-and-forward nodes, two-priority
FIFO link queues over a shared buffer, packet lifecycle, sessions."""

from __future__ import annotations

from collections import deque
from typing import Dict, Optional, Tuple

from antsim.engine import Simulator
from antsim.metrics import MetricsCollector
from antsim.routing import LinkCostEstimator, RoutingAlgorithm
from antsim.topology import Link, Topology

DATA = "data"
FORWARD_ANT = "forward_ant"
BACKWARD_ANT = "backward_ant"
ROUTING_INFO = "routing_info"

DEFAULT_BUFFER_BITS = 1e9
DEFAULT_TTL_S = 15.0
DEFAULT_NODE_SERVICE_S = 0.0003


class Packet:
    __slots__ = (
        "kind",
        "size",
        "src",
        "dst",
        "created_at",
        "ttl",
        "payload",
        "prev_node",
        "node_arrival",
        "port_enqueue",
    )

    def __init__(self, kind, size, src, dst, created_at, ttl=DEFAULT_TTL_S, payload=None):
        if size <= 0:
            raise ValueError("packet size must be positive")
        self.kind = kind
        self.size = size
        self.src = src
        self.dst = dst
        self.created_at = created_at
        self.ttl = ttl
        self.payload = payload
        self.prev_node = None  # node this packet last arrived from
        self.node_arrival = created_at  # arrival time at the current node
        self.port_enqueue = created_at


class Port:
    """State of one outgoing link: two FIFO queues and the transmitter."""

    __slots__ = ("link", "hi", "lo", "busy", "lo_bits", "all_bits", "monitor")

    def __init__(self, link: Link):
        self.link = link
        self.hi: deque = deque()
        self.lo: deque = deque()
        self.busy = False
        self.lo_bits = 0.0  # low-priority bits waiting (ant heuristic input)
        self.all_bits = 0.0  # all bits waiting (daemon queue reads)
        self.monitor = LinkCostEstimator()


class Network:
    """Event-driven network owned by a single simulator instance."""

    def __init__(
        self,
        sim: Simulator,
        topo: Topology,
        metrics: MetricsCollector,
        buffer_bits: float = DEFAULT_BUFFER_BITS,
        ttl_s: float = DEFAULT_TTL_S,
        node_service_s: float = DEFAULT_NODE_SERVICE_S,
    ):
        self.sim = sim
        self.topo = topo
        self.metrics = metrics
        self.buffer_bits = buffer_bits
        self.ttl_s = ttl_s
        self.node_service_s = node_service_s
        self.buffer_used: Dict[int, float] = {u: 0.0 for u in topo.nodes}
        self.ports: Dict[Tuple[int, int], Port] = {
            (l.src, l.dst): Port(l) for l in topo.links
        }
        self.total_bw_bps = sum(l.bandwidth_bps for l in topo.links)
        self.algorithm: Optional[RoutingAlgorithm] = None

    def set_algorithm(self, algo: RoutingAlgorithm) -> None:
        self.algorithm = algo
        algo.attach(self)

    def port(self, src: int, dst: int) -> Port:
        return self.ports[(src, dst)]

    # -- packet entry points ------------------------------------------------

    def inject_data(self, src: int, dst: int, size: float) -> None:
        now = self.sim.now
        packet = Packet(DATA, size, src, dst, now, ttl=self.ttl_s)
        self.metrics.on_generated(now, DATA, size)
        self.algorithm.on_local_data(src, dst, size)
        self.sim.schedule(now + self.node_service_s, lambda: self.dispatch(src, packet))

    def send_ant(self, node: int, next_hop: int, packet: Packet) -> None:
        high = packet.kind == BACKWARD_ANT
        self.enqueue_for_link(node, self.port(node, next_hop), packet, high)

    def send_routing(self, node: int, next_hop: int, size: float, payload) -> None:
        packet = Packet(ROUTING_INFO, size, node, next_hop, self.sim.now, payload=payload)
        self.metrics.on_generated(self.sim.now, ROUTING_INFO, size)
        self.enqueue_for_link(node, self.port(node, next_hop), packet, high=True)

    # -- queueing and transmission ------------------------------------------

    def enqueue_for_link(self, node: int, port: Port, packet: Packet, high: bool) -> bool:
        if self.buffer_used[node] + packet.size > self.buffer_bits:
            self.metrics.on_dropped("buffer", packet.kind)
            return False
        self.buffer_used[node] += packet.size
        packet.port_enqueue = self.sim.now
        if high:
            port.hi.append(packet)
        else:
            port.lo.append(packet)
            port.lo_bits += packet.size
        port.all_bits += packet.size
        if not port.busy:
            self._start_tx(port)
        return True

    def _start_tx(self, port: Port) -> None:
        while True:
            if port.hi:
                packet = port.hi.popleft()
            elif port.lo:
                packet = port.lo.popleft()
                port.lo_bits -= packet.size
            else:
                return
            port.all_bits -= packet.size
            if packet.ttl and self.sim.now - packet.created_at > packet.ttl:
                # expired while queued: discard instead of wasting the link
                self.buffer_used[port.link.src] -= packet.size
                self.metrics.on_dropped("ttl", packet.kind)
                continue
            break
        port.busy = True
        tx_time = packet.size / port.link.bandwidth_bps
        if packet.kind != DATA:
            self.metrics.on_routing_tx(self.sim.now, packet.size)
        self.sim.schedule(self.sim.now + tx_time, lambda: self._tx_done(port, packet, tx_time))

    def _tx_done(self, port: Port, packet: Packet, tx_time: float) -> None:
        now = self.sim.now
        port.busy = False
        self.buffer_used[port.link.src] -= packet.size  # last bit has left the node
        if packet.kind == DATA:
            # only data traffic feeds the utilization monitor; an abandoned
            # link keeps its last cost instead of decaying on idle chatter
            port.monitor.record(now - packet.port_enqueue, tx_time)
        self.sim.schedule(now + port.link.prop_delay_s, lambda: self._arrive(port.link, packet))
        self._start_tx(port)

    # -- reception -----------------------------------------------------------

    def _arrive(self, link: Link, packet: Packet) -> None:
        now = self.sim.now
        node = link.dst
        packet.prev_node = link.src
        algo = self.algorithm
        if packet.kind == DATA:
            # hook runs while node_arrival still refers to the previous node,
            # so per-hop residence time is measurable (feedback-based routing)
            algo.on_data_arrival(node, packet, link.src)
            packet.node_arrival = now
            if now - packet.created_at > packet.ttl:
                self.metrics.on_dropped("ttl", DATA)
            elif node == packet.dst:
                self.metrics.on_delivered(now, DATA, packet.size, now - packet.created_at)
            else:
                self.sim.schedule(now + self.node_service_s, lambda: self.dispatch(node, packet))
            return
        packet.node_arrival = now
        if packet.kind in (FORWARD_ANT, BACKWARD_ANT):
            if now - packet.created_at > packet.ttl:
                self.metrics.on_dropped("ttl", packet.kind)
            else:
                self.sim.schedule(now + algo.elab_s, lambda: algo.on_ant(node, packet, link.src))
        else:
            self.metrics.on_delivered(now, ROUTING_INFO, packet.size, now - packet.created_at)
            self.sim.schedule(
                now + algo.elab_s, lambda: algo.on_routing_packet(node, packet, link.src)
            )

    def dispatch(self, node: int, packet: Packet) -> None:
        """Route a data packet out of ``node`` after its service delay."""
        if self.sim.now - packet.created_at > packet.ttl:
            self.metrics.on_dropped("ttl", packet.kind)
            return
        link = self.algorithm.select_next_hop(node, packet)
        self.enqueue_for_link(node, self.port(link.src, link.dst), packet, high=False)


class Session:
    """One traffic session: a stream of data packets from src to dst.

    The production window caps unsent packets buffered at the source; a sent
    packet is considered acknowledged immediately, so a release frees its
    window slot as soon as the packet enters the source node.
    """

    def __init__(
        self,
        net: Network,
        src: int,
        dst: int,
        stream: str,  # "CBR" | "GVBR"
        mpia_s: float,
        mean_packet_bits: float,
        packets_remaining: Optional[int],  # None = until end_time
        end_time: float,
        size_rng,
        interval_rng=None,
        window_size: int = 50,
    ):
        self.net = net
        self.src = src
        self.dst = dst
        self.stream = stream
        self.mpia_s = mpia_s
        self.mean_packet_bits = mean_packet_bits
        self.packets_remaining = packets_remaining
        self.end_time = end_time
        self.size_rng = size_rng
        self.interval_rng = interval_rng if interval_rng is not None else size_rng
        self.window_size = window_size
        self.in_flight = 0
        self.pending = 0

    def start(self) -> None:
        self.net.sim.schedule(self.net.sim.now + self._interval(), self._generate)

    def _interval(self) -> float:
        if self.stream == "CBR":
            return self.mpia_s
        return self.interval_rng.expovariate(1.0 / self.mpia_s)

    def _size(self) -> float:
        if self.stream == "CBR":
            return self.mean_packet_bits
        return self.size_rng.expovariate(1.0 / self.mean_packet_bits)

    def _generate(self) -> None:
        now = self.net.sim.now
        if now > self.end_time:
            return
        if self.packets_remaining is not None:
            if self.packets_remaining <= 0:
                return
            self.packets_remaining -= 1
        self.pending += 1
        self.try_send()
        self.net.sim.schedule(now + self._interval(), self._generate)

    def try_send(self) -> int:
        """Release pending packets while the window has room."""
        released = 0
        while self.pending > 0 and self.in_flight < self.window_size:
            self.pending -= 1
            self.in_flight += 1
            self.net.inject_data(self.src, self.dst, self._size())
            self.in_flight -= 1  # sent counts as acknowledged
            released += 1
        return released
