"""Competitor routing algorithms: static and adaptive link-state (ospf, spf),
adaptive distance-vector (bf), feedback-driven learners (qr, pqr), and the
omniscient daemon bound."""

from __future__ import annotations

from typing import Dict, Tuple

from antsim.network import Packet
from antsim.routing import CostTable, RoutingAlgorithm, dijkstra

LSA_BASE_BYTES = 64
LSA_BYTES_PER_NEIGHBOR = 8
DV_BASE_BYTES = 24
DV_BYTES_PER_NODE = 12
FEEDBACK_BYTES = 12
SAMPLE_PACKET_BITS = 4096.0  # 512-byte reference packet for static costs


def _min_hop_next(topo) -> Dict[int, Dict[int, int]]:
    """Static min-hop next-hop tables (smallest-id tie-break), used as the
    pre-convergence fallback by the adaptive protocols."""
    adjacency = {u: [(l.dst, 1.0) for l in topo.out_links[u]] for u in topo.nodes}
    tables: Dict[int, Dict[int, int]] = {}
    for u in topo.nodes:
        _, hop = dijkstra(topo.n_nodes, adjacency, u)
        tables[u] = {d: h for d, h in hop.items() if h is not None}
    return tables


class _LinkStateBase(RoutingAlgorithm):
    """Common flooding machinery for the link-state protocols."""

    broadcast_interval_s = 30.0

    def attach(self, net) -> None:
        self.net = net
        topo = net.topo
        self.seq: Dict[int, int] = {u: 0 for u in topo.nodes}
        self.lsdb_seen: Dict[int, Dict[int, int]] = {u: {} for u in topo.nodes}
        self.lsdb: Dict[int, Dict[int, Dict[int, float]]] = {u: {} for u in topo.nodes}
        self.tables: Dict[int, Dict[int, int]] = {u: {} for u in topo.nodes}
        self.dirty: Dict[int, bool] = {u: False for u in topo.nodes}
        self.fallback = _min_hop_next(topo)
        self._schedule_broadcast()

    def _schedule_broadcast(self) -> None:
        t = self.net.sim.now + self.broadcast_interval_s
        self.net.sim.schedule(t, self._broadcast_round)

    def _broadcast_round(self) -> None:
        for u in self.net.topo.nodes:
            self._originate(u)
        self._schedule_broadcast()

    def _link_costs(self, node: int) -> Dict[int, float]:
        raise NotImplementedError

    def _originate(self, node: int) -> None:
        self.seq[node] += 1
        costs = self._link_costs(node)
        payload = ("lsa", node, self.seq[node], costs)
        size = (LSA_BASE_BYTES + LSA_BYTES_PER_NEIGHBOR * len(costs)) * 8
        self._install(node, node, self.seq[node], costs)
        for link in self.net.topo.out_links[node]:
            self.net.send_routing(node, link.dst, size, payload)

    def _install(self, node: int, origin: int, seq: int, costs: Dict[int, float]) -> None:
        self.lsdb_seen[node][origin] = seq
        self.lsdb[node][origin] = costs
        self.dirty[node] = True

    def on_routing_packet(self, node: int, packet: Packet, from_node: int) -> None:
        tag, origin, seq, costs = packet.payload
        if seq <= self.lsdb_seen[node].get(origin, 0):
            return  # stale or duplicate advertisement
        self._install(node, origin, seq, costs)
        for link in self.net.topo.out_links[node]:
            if link.dst != from_node:
                self.net.send_routing(node, link.dst, packet.size, packet.payload)

    def _recompute(self, node: int) -> None:
        adjacency = {
            origin: list(costs.items()) for origin, costs in self.lsdb[node].items()
        }
        _, hop = dijkstra(self.net.topo.n_nodes, adjacency, node)
        self.tables[node] = {d: h for d, h in hop.items() if h is not None}
        self.dirty[node] = False

    def select_next_hop(self, node: int, packet: Packet):
        if self.dirty[node]:
            self._recompute(node)
        nxt = self.tables[node].get(packet.dst) or self.fallback[node].get(packet.dst)
        return self.net.topo.link(node, nxt)


class OspfRouting(_LinkStateBase):
    """Static link-state routing: costs from physical link characteristics,
    tables computed once and never changed. Periodic advertisements are still
    flooded, but receivers learn nothing new from them."""

    name = "ospf"
    elab_s = 0.006

    def __init__(self, broadcast_interval_s: float = 30.0):
        self.broadcast_interval_s = broadcast_interval_s

    def attach(self, net) -> None:
        super().attach(net)
        for u in net.topo.nodes:
            self._install(u, u, 0, self._link_costs(u))
        # every node knows the static map up front
        for u in net.topo.nodes:
            for v in net.topo.nodes:
                self.lsdb[u][v] = self._link_costs(v)
            self._recompute(u)
            self.dirty[u] = False

    def _link_costs(self, node: int) -> Dict[int, float]:
        return {
            l.dst: l.prop_delay_s + SAMPLE_PACKET_BITS / l.bandwidth_bps
            for l in self.net.topo.out_links[node]
        }

    def on_routing_packet(self, node: int, packet: Packet, from_node: int) -> None:
        tag, origin, seq, costs = packet.payload
        if seq <= self.lsdb_seen[node].get(origin, 0):
            return
        self.lsdb_seen[node][origin] = seq
        # static protocol: forward the flood, but tables stay as built
        for link in self.net.topo.out_links[node]:
            if link.dst != from_node:
                self.net.send_routing(node, link.dst, packet.size, packet.payload)

    def select_next_hop(self, node: int, packet: Packet):
        return self.net.topo.link(node, self.tables[node][packet.dst])


class SpfRouting(_LinkStateBase):
    """Adaptive link-state routing with the discrete monitored-delay metric."""

    name = "spf"
    elab_s = 0.006

    def __init__(self, broadcast_interval_s: float = 0.8):
        self.broadcast_interval_s = broadcast_interval_s

    def _link_costs(self, node: int) -> Dict[int, float]:
        return {
            l.dst: float(self.net.port(node, l.dst).monitor.close_window())
            for l in self.net.topo.out_links[node]
        }


class BfRouting(RoutingAlgorithm):
    """Asynchronous distributed distance-vector routing with dynamic costs."""

    name = "bf"
    elab_s = 0.002

    def __init__(self, broadcast_interval_s: float = 0.8):
        self.broadcast_interval_s = broadcast_interval_s

    def attach(self, net) -> None:
        self.net = net
        topo = net.topo
        self.cost_tables: Dict[int, CostTable] = {
            u: CostTable(u, topo.n_nodes, topo.neighbors(u)) for u in topo.nodes
        }
        self.fallback = _min_hop_next(topo)
        self.vector_bits = (DV_BASE_BYTES + DV_BYTES_PER_NODE * topo.n_nodes) * 8
        self._schedule_broadcast()

    def _schedule_broadcast(self) -> None:
        t = self.net.sim.now + self.broadcast_interval_s
        self.net.sim.schedule(t, self._broadcast_round)

    def _broadcast_round(self) -> None:
        for u in self.net.topo.nodes:
            table = self.cost_tables[u]
            for link in self.net.topo.out_links[u]:
                table.link_cost[link.dst] = float(
                    self.net.port(u, link.dst).monitor.close_window()
                )
            vector = table.distance_vector()
            for link in self.net.topo.out_links[u]:
                self.net.send_routing(u, link.dst, self.vector_bits, ("dv", u, vector))
        self._schedule_broadcast()

    def on_routing_packet(self, node: int, packet: Packet, from_node: int) -> None:
        tag, origin, vector = packet.payload
        self.cost_tables[node].merge(origin, vector)

    def select_next_hop(self, node: int, packet: Packet):
        _, nxt = self.cost_tables[node].best(packet.dst)
        if nxt is None:
            nxt = self.fallback[node][packet.dst]
        return self.net.topo.link(node, nxt)


class QRouting(RoutingAlgorithm):
    """Online asynchronous distance-vector learner: per-hop feedback packets
    carry the downstream time-to-go estimate; forwarding is a deterministic
    arg min over the learned per-neighbor estimates."""

    name = "qr"
    elab_s = 0.003

    def __init__(self, learning_rate: float = 0.5):
        self.learning_rate = learning_rate

    def attach(self, net) -> None:
        self.net = net
        topo = net.topo
        hops = {u: topo.hop_distances(u) for u in topo.nodes}
        # seed with hop-count x per-hop time so the initial arg min is sane
        self.q: Dict[int, Dict[int, Dict[int, float]]] = {}
        for u in topo.nodes:
            self.q[u] = {}
            for d in topo.nodes:
                if d == u:
                    continue
                entry = {}
                for link in topo.out_links[u]:
                    t_hop = SAMPLE_PACKET_BITS / link.bandwidth_bps + link.prop_delay_s
                    entry[link.dst] = t_hop * (1 + hops[link.dst][d])
                self.q[u][d] = entry

    def min_time_to_go(self, node: int, dst: int) -> float:
        if node == dst:
            return 0.0
        return min(self.q[node][dst].values())

    def select_next_hop(self, node: int, packet: Packet):
        entry = self.q[node][packet.dst]
        best = min(entry.items(), key=lambda kv: (kv[1], kv[0]))
        return self.net.topo.link(node, best[0])

    def on_data_arrival(self, node: int, packet: Packet, from_node: int) -> None:
        link = self.net.topo.link(from_node, node)
        hop_time = self.net.sim.now - packet.node_arrival - link.prop_delay_s
        q_new = self.min_time_to_go(node, packet.dst) + hop_time
        payload = ("qfb", packet.dst, q_new)
        self.net.send_routing(node, from_node, FEEDBACK_BYTES * 8, payload)

    def on_routing_packet(self, node: int, packet: Packet, from_node: int) -> None:
        tag, dst, q_new = packet.payload
        self._apply_feedback(node, dst, from_node, q_new)

    def _apply_feedback(self, node: int, dst: int, via: int, q_new: float) -> None:
        entry = self.q[node][dst]
        entry[via] += self.learning_rate * (q_new - entry[via])


class PQRouting(QRouting):
    """Predictive extension of the feedback learner: tracks per-entry best
    values and recovery rates, and probes links whose predicted estimate
    (current value relaxed toward the best at the recovery rate) is minimal."""

    name = "pqr"
    elab_s = 0.003

    def __init__(
        self,
        learning_rate: float = 0.5,
        recovery_learning: float = 0.7,
        recovery_decay: float = 0.95,
    ):
        super().__init__(learning_rate)
        self.recovery_learning = recovery_learning
        self.recovery_decay = recovery_decay

    def attach(self, net) -> None:
        super().attach(net)
        # (best value, recovery rate <= 0, last update time) per q entry
        self.best: Dict[Tuple[int, int, int], float] = {}
        self.recovery: Dict[Tuple[int, int, int], float] = {}
        self.last_update: Dict[Tuple[int, int, int], float] = {}
        for u, per_dst in self.q.items():
            for d, entry in per_dst.items():
                for n, q0 in entry.items():
                    self.best[(u, d, n)] = q0
                    self.recovery[(u, d, n)] = 0.0
                    self.last_update[(u, d, n)] = 0.0

    def predicted(self, node: int, dst: int, via: int, now: float) -> float:
        key = (node, dst, via)
        idle = now - self.last_update[key]
        return max(self.best[key], self.q[node][dst][via] + self.recovery[key] * idle)

    def select_next_hop(self, node: int, packet: Packet):
        now = self.net.sim.now
        entry = self.q[node][packet.dst]
        best = min(
            entry, key=lambda n: (self.predicted(node, packet.dst, n, now), n)
        )
        return self.net.topo.link(node, best)

    def _apply_feedback(self, node: int, dst: int, via: int, q_new: float) -> None:
        key = (node, dst, via)
        now = self.net.sim.now
        entry = self.q[node][dst]
        old = entry[via]
        entry[via] = old + self.learning_rate * (q_new - old)
        delta = entry[via] - old
        self.best[key] = min(self.best[key], entry[via])
        dt = max(now - self.last_update[key], 1e-9)
        if delta < 0:
            # learn how fast this link's estimate recovers when load drains
            self.recovery[key] += self.recovery_learning * (delta / dt)
        else:
            self.recovery[key] *= self.recovery_decay
        self.recovery[key] = min(self.recovery[key], 0.0)
        self.last_update[key] = now


class DaemonRouting(RoutingAlgorithm):
    """Empirical performance bound: reads every queue in the network at each
    hop and recomputes a network-wide shortest path for the packet. Generates
    no routing packets."""

    name = "daemon"
    elab_s = 0.0

    def __init__(self, queue_mix: float = 0.4, queue_mean_decay: float = 0.9):
        self.queue_mix = queue_mix
        self.queue_mean_decay = queue_mean_decay

    def attach(self, net) -> None:
        self.net = net
        self.smoothed_queue: Dict[Tuple[int, int], float] = {
            key: 0.0 for key in net.ports
        }

    def link_cost(self, link, packet_bits: float) -> float:
        port = self.net.port(link.src, link.dst)
        s_q = port.all_bits
        s_bar = self.smoothed_queue[(link.src, link.dst)]
        return (
            link.prop_delay_s
            + packet_bits / link.bandwidth_bps
            + (1.0 - self.queue_mix) * s_q / link.bandwidth_bps
            + self.queue_mix * s_bar / link.bandwidth_bps
        )

    def select_next_hop(self, node: int, packet: Packet):
        topo = self.net.topo
        adjacency = {
            u: [(l.dst, self.link_cost(l, packet.size)) for l in topo.out_links[u]]
            for u in topo.nodes
        }
        _, hop = dijkstra(topo.n_nodes, adjacency, node)
        decay = self.queue_mean_decay
        for key, port in self.net.ports.items():
            self.smoothed_queue[key] = (
                decay * self.smoothed_queue[key] + (1.0 - decay) * port.all_bits
            )
        return topo.link(node, hop[packet.dst])
