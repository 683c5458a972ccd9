"""Ant-based adaptive routing: forward/backward agent lifecycle, per-node
probabilistic routing tables, local trip-time models, reinforcement updates
and probabilistic data forwarding."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from antsim.network import BACKWARD_ANT, FORWARD_ANT, Packet
from antsim.routing import RoutingAlgorithm

ANT_BASE_BYTES = 24
ANT_BYTES_PER_HOP = 8


@dataclass
class AntNetParams:
    launch_interval_s: float = 0.3
    heuristic_weight: float = 0.3  # queue-state correction weight, sane in 0.2-0.5
    model_decay: float = 0.005  # eta of the exponential trip-time model
    window_fraction: float = 0.3  # c: short-term window as a fraction of 5/eta
    confidence_z: float = 1.70  # z = 1/sqrt(1-gamma), ~0.95 confidence
    reward_w1: float = 0.7
    reward_w2: float = 0.3
    squash_gain: float = 10.0
    data_power_exponent: float = 1.2

    def __post_init__(self):
        if abs(self.reward_w1 + self.reward_w2 - 1.0) > 1e-12:
            raise ValueError("reward weights must sum to 1")
        if not 0.0 < self.window_fraction < 1.0:
            raise ValueError("window_fraction must be in (0, 1)")
        if self.model_decay <= 0 or self.squash_gain <= 0:
            raise ValueError("model_decay and squash_gain must be positive")

    @property
    def window_max(self) -> int:
        return round(5.0 * self.window_fraction / self.model_decay)


class TripModel:
    """Per-destination trip-time statistics: exponential mean/variance plus a
    short observation window tracking the best trip time."""

    __slots__ = ("mu", "var", "w_count", "w_best")

    def __init__(self, first_sample: float):
        self.mu = first_sample
        self.var = 0.0
        self.w_count = 1
        self.w_best = first_sample

    def update(self, trip: float, eta: float, window_max: int) -> None:
        self.mu += eta * (trip - self.mu)
        # variance update uses the post-update mean
        self.var += eta * ((trip - self.mu) ** 2 - self.var)
        if self.w_count >= window_max:
            self.w_count = 1
            self.w_best = trip  # window wrap: best resets to the next sample
        else:
            self.w_count += 1
            if trip < self.w_best:
                self.w_best = trip


def score_trip(trip: float, model: TripModel, n_neighbors: int, params: AntNetParams) -> float:
    """Reinforcement in (0, 1] for an observed trip time, squashed so that
    good (small) times are sharply rewarded and poor ones saturate low."""
    if trip <= 0:
        raise ValueError("trip time must be positive")
    i_inf = model.w_best
    i_sup = model.mu + params.confidence_z * math.sqrt(model.var) / math.sqrt(model.w_count)
    width = i_sup - i_inf
    if trip <= i_inf:
        second = 1.0  # at least as good as the window best
    elif width > 0:
        second = width / (width + (trip - i_inf))
    else:
        second = 0.0
    raw = params.reward_w1 * (model.w_best / trip) + params.reward_w2 * second
    raw = min(max(raw, 1e-12), 1.0)
    return _squash(raw, n_neighbors, params.squash_gain) / _squash(
        1.0, n_neighbors, params.squash_gain
    )


def _squash(x: float, n_neighbors: int, gain: float) -> float:
    exponent = min(gain / (x * n_neighbors), 700.0)
    return 1.0 / (1.0 + math.exp(exponent))


def reinforce_row(row: List[float], chosen_idx: int, r: float) -> None:
    """Push probability toward the chosen neighbor; the compensating decay of
    the other entries keeps the row sum at exactly 1 in real arithmetic."""
    for i in range(len(row)):
        if i == chosen_idx:
            row[i] += r * (1.0 - row[i])
        else:
            row[i] -= r * row[i]


def queue_heuristic(queue_bits: List[float]) -> List[float]:
    """Per-neighbor queue correction; entries sum to n-1 (uniform when idle)."""
    n = len(queue_bits)
    total = sum(queue_bits)
    if total <= 0:
        return [(n - 1) / n] * n
    return [1.0 - q / total for q in queue_bits]


def blend_probabilities(row: List[float], heuristic: List[float], alpha: float) -> List[float]:
    n = len(row)
    denom = 1.0 + alpha * (n - 1)
    return [(row[i] + alpha * heuristic[i]) / denom for i in range(n)]


class _Trail:
    """Forward-ant memory: visited nodes with elapsed times since launch."""

    __slots__ = ("stack", "index", "pos")

    def __init__(self, source: int):
        self.stack: List[Tuple[int, float]] = [(source, 0.0)]
        self.index: Dict[int, int] = {source: 0}
        self.pos = 0  # backward-travel cursor

    def push(self, node: int, elapsed: float) -> None:
        self.index[node] = len(self.stack)
        self.stack.append((node, elapsed))

    def truncate_cycle(self, node: int) -> None:
        """Pop the cycle ending at ``node``, destroying its nodes' memory.

        The original entry for ``node`` survives with its first-visit
        elapsed time.
        """
        idx = self.index[node]
        del self.stack[idx + 1 :]
        self.index = {n: i for i, (n, _) in enumerate(self.stack)}


class AntNetRouting(RoutingAlgorithm):
    name = "antnet"
    elab_s = 0.003

    def __init__(self, params: Optional[AntNetParams] = None):
        self.params = params or AntNetParams()

    def attach(self, net) -> None:
        self.net = net
        topo = net.topo
        self.neighbors: Dict[int, List[int]] = {u: topo.neighbors(u) for u in topo.nodes}
        self.nbr_index: Dict[int, Dict[int, int]] = {
            u: {n: i for i, n in enumerate(nbrs)} for u, nbrs in self.neighbors.items()
        }
        # Routing tables start uniform per destination.
        self.tables: Dict[int, Dict[int, List[float]]] = {}
        for u in topo.nodes:
            nbrs = self.neighbors[u]
            self.tables[u] = {
                d: [1.0 / len(nbrs)] * len(nbrs) for d in topo.nodes if d != u
            }
        self.models: Dict[int, Dict[int, TripModel]] = {u: {} for u in topo.nodes}
        self.flows: Dict[int, Dict[int, float]] = {u: {} for u in topo.nodes}
        self.ant_rng = net.sim.stream("ant_routing")
        self.data_rng = net.sim.stream("data_routing")
        if self.params.launch_interval_s != math.inf:
            for u in topo.nodes:
                self._schedule_launch(u)

    # -- ant launching -------------------------------------------------------

    def _schedule_launch(self, node: int) -> None:
        t = self.net.sim.now + self.params.launch_interval_s
        self.net.sim.schedule(t, lambda: self._launch(node))

    def _launch(self, node: int) -> None:
        dst = self.pick_ant_destination(node)
        packet = Packet(
            FORWARD_ANT,
            ANT_BASE_BYTES * 8,
            node,
            dst,
            self.net.sim.now,
            ttl=self.net.ttl_s,
            payload=_Trail(node),
        )
        self._forward_move(node, packet)
        self._schedule_launch(node)

    def pick_ant_destination(self, node: int) -> int:
        """Destination biased by locally generated data flow per destination;
        uniform over the other nodes when no data has been observed."""
        flows = self.flows[node]
        total = sum(flows.values())
        if total > 0:
            pick = self.ant_rng.random() * total
            acc = 0.0
            for d, f in flows.items():
                acc += f
                if pick <= acc:
                    return d
            return next(reversed(flows))
        others = [v for v in self.net.topo.nodes if v != node]
        return self.ant_rng.choice(others)

    def on_local_data(self, node: int, dst: int, bits: float) -> None:
        self.flows[node][dst] = self.flows[node].get(dst, 0.0) + bits

    # -- forward ants --------------------------------------------------------

    def on_ant(self, node: int, packet: Packet, from_node: int) -> None:
        if packet.kind == FORWARD_ANT:
            self._forward_arrive(node, packet)
        else:
            self._backward_arrive(node, packet)

    def _forward_arrive(self, node: int, packet: Packet) -> None:
        trail: _Trail = packet.payload
        elapsed = self.net.sim.now - packet.created_at
        if node in trail.index:
            pre_cycle_age = trail.stack[trail.index[node]][1]
            cycle_time = elapsed - pre_cycle_age
            if cycle_time > pre_cycle_age:
                # the ant wasted more than half its age in the cycle
                self.net.metrics.on_dropped("cycle", FORWARD_ANT)
                return
            trail.truncate_cycle(node)
        else:
            trail.push(node, elapsed)
        if node == packet.dst:
            self._spawn_backward(node, packet)
        else:
            self._forward_move(node, packet)

    def _forward_move(self, node: int, packet: Packet) -> None:
        trail: _Trail = packet.payload
        nbrs = self.neighbors[node]
        candidates = [n for n in nbrs if n not in trail.index]
        if not candidates:
            candidates = nbrs
        probs = self.forward_probabilities(node, packet.dst)
        weights = [probs[self.nbr_index[node][n]] for n in candidates]
        total = sum(weights)
        if total <= 0:
            chosen = self.ant_rng.choice(candidates)
        else:
            chosen = self._weighted_pick(self.ant_rng, candidates, weights, total)
        hops_done = len(trail.stack) - 1
        packet.size = (ANT_BASE_BYTES + ANT_BYTES_PER_HOP * hops_done) * 8
        self.net.send_ant(node, chosen, packet)

    def forward_probabilities(self, node: int, dst: int) -> List[float]:
        """Routing-table row blended with the instantaneous queue heuristic."""
        nbrs = self.neighbors[node]
        queue_bits = [self.net.port(node, n).lo_bits for n in nbrs]
        heuristic = queue_heuristic(queue_bits)
        return blend_probabilities(
            self.tables[node][dst], heuristic, self.params.heuristic_weight
        )

    @staticmethod
    def _weighted_pick(rng, items, weights, total):
        pick = rng.random() * total
        acc = 0.0
        for item, w in zip(items, weights):
            acc += w
            if pick <= acc:
                return item
        return items[-1]

    # -- backward ants -------------------------------------------------------

    def _spawn_backward(self, node: int, forward: Packet) -> None:
        trail: _Trail = forward.payload
        if len(trail.stack) < 2:
            return
        hops = len(trail.stack) - 1
        packet = Packet(
            BACKWARD_ANT,
            (ANT_BASE_BYTES + ANT_BYTES_PER_HOP * hops) * 8,
            node,
            trail.stack[0][0],
            self.net.sim.now,
            ttl=self.net.ttl_s,
            payload=trail,
        )
        trail.pos = len(trail.stack) - 1
        self.net.send_ant(node, trail.stack[trail.pos - 1][0], packet)

    def _backward_arrive(self, node: int, packet: Packet) -> None:
        trail: _Trail = packet.payload
        trail.pos -= 1
        assert trail.stack[trail.pos][0] == node
        self.backward_update(node, trail)
        if trail.pos > 0:
            self.net.send_ant(node, trail.stack[trail.pos - 1][0], packet)

    def backward_update(self, node: int, trail: _Trail) -> None:
        """Model and routing-table updates for the final destination and for
        every statistically good sub-path destination beyond ``node``."""
        params = self.params
        stack = trail.stack
        pos = trail.pos
        here_elapsed = stack[pos][1]
        from_nbr = stack[pos + 1][0]
        from_idx = self.nbr_index[node][from_nbr]
        n_nbrs = len(self.neighbors[node])
        models = self.models[node]
        last = len(stack) - 1
        for j in range(pos + 1, last + 1):
            dst = stack[j][0]
            trip = stack[j][1] - here_elapsed
            model = models.get(dst)
            if j != last and model is not None:
                # sub-path times count only when statistically good
                bound = model.mu + params.confidence_z * math.sqrt(model.var) / math.sqrt(
                    model.w_count
                )
                if trip >= bound:
                    continue
            if model is None:
                model = TripModel(trip)
                models[dst] = model
            else:
                model.update(trip, params.model_decay, params.window_max)
            r = score_trip(trip, model, n_nbrs, params)
            reinforce_row(self.tables[node][dst], from_idx, r)

    # -- data forwarding -----------------------------------------------------

    def select_next_hop(self, node: int, packet: Packet):
        nbrs = self.neighbors[node]
        if packet.prev_node is not None and len(nbrs) >= 2:
            candidates = [n for n in nbrs if n != packet.prev_node]
        else:
            candidates = nbrs
        row = self.tables[node][packet.dst]
        exp = self.params.data_power_exponent
        idx = self.nbr_index[node]
        weights = [row[idx[n]] ** exp for n in candidates]
        total = sum(weights)
        if total <= 0:
            chosen = self.data_rng.choice(candidates)
        else:
            chosen = self._weighted_pick(self.data_rng, candidates, weights, total)
        return self.net.topo.link(node, chosen)
