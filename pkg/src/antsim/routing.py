"""Shared routing infrastructure: algorithm interface, shortest-path kernels,
flooding semantics and the adaptive discrete link-cost estimator."""

from __future__ import annotations

import heapq
import math
from collections import deque
from typing import Dict, Hashable, List, Optional, Set, Tuple

INFINITY = math.inf


class RoutingAlgorithm:
    """Interface every routing protocol implements.

    The network model calls back into the active algorithm for next-hop
    selection and hands it every routing-class packet after the per-protocol
    elaboration delay.
    """

    name = "base"
    elab_s = 0.0  # per-node elaboration delay for this protocol's packets

    def attach(self, net) -> None:
        self.net = net

    def on_warmup_end(self, now: float) -> None:
        pass

    def select_next_hop(self, node: int, packet):
        raise NotImplementedError

    def on_routing_packet(self, node: int, packet, from_node: int) -> None:
        pass

    def on_ant(self, node: int, packet, from_node: int) -> None:
        pass

    def on_data_arrival(self, node: int, packet, from_node: int) -> None:
        pass

    def on_local_data(self, node: int, dst: int, bits: float) -> None:
        pass


def dijkstra(
    n_nodes: int,
    adjacency: Dict[int, List[Tuple[int, float]]],
    src: int,
) -> Tuple[Dict[int, float], Dict[int, Optional[int]]]:
    """Single-source shortest paths over ``{node: [(neighbor, cost), ...]}``.

    Returns (distance, first-hop neighbor) per destination. Ties between
    equal-cost paths resolve to the smallest first-hop neighbor id; the
    lexicographic (distance, first_hop) heap order makes that exact.
    Unreachable destinations get distance +inf and first hop None.
    """
    dist: Dict[int, float] = {src: 0.0}
    hop: Dict[int, Optional[int]] = {src: None}
    settled: Set[int] = set()
    heap: List[Tuple[float, int, int]] = [(0.0, 0, src)]
    while heap:
        d, first, u = heapq.heappop(heap)
        if u in settled:
            continue
        settled.add(u)
        dist[u] = d
        hop[u] = first if u != src else None
        for v, cost in adjacency.get(u, ()):
            if cost <= 0:
                raise ValueError(f"nonpositive cost on link {u}->{v}")
            if v in settled:
                continue
            heapq.heappush(heap, (d + cost, first if u != src else v, v))
    for v in range(1, n_nodes + 1):
        if v not in dist:
            dist[v] = INFINITY
            hop[v] = None
    return dist, hop


class CostTable:
    """Distance-vector state for one node: neighbor vectors plus link costs."""

    def __init__(self, node: int, n_nodes: int, neighbors: List[int]):
        self.node = node
        self.n_nodes = n_nodes
        self.neighbors = sorted(neighbors)
        self.link_cost: Dict[int, float] = {j: 1.0 for j in self.neighbors}
        self.vectors: Dict[int, Dict[int, float]] = {}  # neighbor -> their distances

    def merge(self, neighbor: int, vector: Dict[int, float]) -> None:
        """Overwrite the stored vector for ``neighbor`` with received values."""
        self.vectors[neighbor] = dict(vector)

    def best(self, dst: int) -> Tuple[float, Optional[int]]:
        """(distance, next hop) = min over neighbors of link cost + their estimate."""
        if dst == self.node:
            return 0.0, None
        best_d, best_j = INFINITY, None
        for j in self.neighbors:
            dj = self.vectors.get(j, {}).get(dst, INFINITY)
            if dj is INFINITY:
                continue
            d = self.link_cost[j] + dj
            if d < best_d:
                best_d, best_j = d, j
        return best_d, best_j

    def distance_vector(self) -> Dict[int, float]:
        return {d: self.best(d)[0] for d in range(1, self.n_nodes + 1)}


def flood_reach(topo, origin: int) -> Tuple[Set[int], int]:
    """Pure model of constrained flooding with duplicate suppression.

    Each node forwards a first-seen advertisement on all links except the
    arrival link; duplicates are suppressed on receipt. Returns the set of
    nodes that received the advertisement and the number of link
    transmissions performed.
    """
    received: Set[int] = set()
    transmissions = 0
    queue = deque()
    received.add(origin)
    for link in topo.out_links[origin]:
        queue.append((origin, link.dst))
        transmissions += 1
    while queue:
        sender, node = queue.popleft()
        if node in received:
            continue
        received.add(node)
        for link in topo.out_links[node]:
            if link.dst == sender:
                continue
            queue.append((node, link.dst))
            transmissions += 1
    return received, transmissions


class LinkCostEstimator:
    """Discrete 1..20 link cost from monitored per-window delay statistics.

    Per transmitted packet the monitor records the total delay d (queueing +
    transmission at this node) and the transmission time t. At each window
    boundary an M/M/1-style utilization measure 1 - t_mean/d_mean is combined
    as an equal-weight sum of the window arithmetic mean and an exponential
    mean with decay 0.9, rescaled with slope 20, and clamped so consecutive
    discrete costs differ by at most 1.
    """

    DECAY = 0.9
    WINDOW_WEIGHT = 0.5
    SLOPE = 20

    def __init__(self):
        self.sum_d = 0.0
        self.sum_t = 0.0
        self.count = 0
        self.exp_mean: Optional[float] = None
        self.cost = 1

    def record(self, delay: float, tx_time: float) -> None:
        self.sum_d += delay
        self.sum_t += tx_time
        self.count += 1

    def close_window(self) -> int:
        """Advance one window and return the new discrete cost."""
        if self.count == 0:
            return self.cost  # idle window keeps the previous cost
        u = 1.0 - self.sum_t / self.sum_d if self.sum_d > 0 else 0.0
        u = min(max(u, 0.0), 1.0)
        if self.exp_mean is None:
            self.exp_mean = u
        else:
            self.exp_mean = self.DECAY * self.exp_mean + (1.0 - self.DECAY) * u
        raw = self.WINDOW_WEIGHT * u + (1.0 - self.WINDOW_WEIGHT) * self.exp_mean
        target = min(max(round(1 + self.SLOPE * raw), 1), 20)
        step = min(1, max(-1, target - self.cost))
        self.cost += step
        self.sum_d = self.sum_t = 0.0
        self.count = 0
        return self.cost
