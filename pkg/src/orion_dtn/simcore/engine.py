"""Fixed-step scenario engine.

Each step runs, in order: mobility, unit-disk connectivity, HELLO delivery
and contact bookkeeping, PRoPHET aging and encounter exchange, traffic
generation at the source, and forwarding at every node in ascending id
order. Transmissions are committed immediately, but a packet received during
a step is not forwarded again until the next step.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..contacts import NeighborContactState, Phase
from ..protocols.orion import orion_forward
from ..protocols.packet import Action, NeighborSnapshot, Packet, Rule, distance
from ..protocols.prophet import ProphetState, prophet_age, prophet_encounter, prophet_forward
from .config import Protocol, ScenarioConfig
from .metrics import Event, MetricsReport, collect_metrics
from .mobility import TRAFFIC_STREAM, NodeState, build_nodes, node_rng, step_mobility


def compute_connectivity(positions, radio_range: float) -> np.ndarray:
    """Symmetric boolean adjacency: distinct nodes within ``radio_range`` of each other.

    ``positions`` is an (n, 2) array or a sequence of :class:`NodeState`.
    """
    if len(positions) and isinstance(positions[0], NodeState):
        positions = [nd.pos for nd in positions]
    p = np.asarray(positions, dtype=float).reshape(-1, 2)
    diff = p[:, None, :] - p[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    adj = dist <= radio_range
    np.fill_diagonal(adj, False)
    return adj


@dataclass
class SimulationResult:
    config: ScenarioConfig
    metrics: MetricsReport
    events: List[Event]
    source: int
    destination: int


class Simulation:
    def __init__(self, config: ScenarioConfig):
        self.config = config.validate()
        self.protocol = Protocol(config.protocol)
        self.nodes: List[NodeState] = build_nodes(
            config.node_count,
            config.area_width,
            config.area_height,
            config.speed,
            config.seed,
            config.regular_fraction,
            config.fixed_count,
        )
        rng = node_rng(config.seed, TRAFFIC_STREAM)
        src, dst = rng.choice(config.node_count, size=2, replace=False)
        self.source, self.destination = int(src), int(dst)

        if self.protocol is Protocol.PROPHET:
            for nd in self.nodes:
                nd.protocol_state = ProphetState(nd.id, config.prophet, capacity=config.node_count)

        self.step_index = 0
        self.time = 0.0
        self.events: List[Event] = []
        self.delivered: Dict[int, float] = {}
        self.holders: Dict[int, set] = {}  # packet_id -> node ids holding a copy
        self.adjacency = np.zeros((config.node_count, config.node_count), dtype=bool)
        self.neighbors: List[List[int]] = [[] for _ in self.nodes]
        self._next_packet_id = 0
        # ORION: neighbours whose contact state is currently Connected, per node
        self._live: List[set] = [set() for _ in self.nodes]
        self._last_action: Dict[int, str] = {}

    # --- public API ----------------------------------------------------------

    @property
    def done(self) -> bool:
        return self.step_index >= self.config.steps

    def run(self) -> SimulationResult:
        while not self.done:
            self.step()
        return SimulationResult(
            self.config, collect_metrics(self.events), self.events, self.source, self.destination
        )

    def custodians(self, packet_id: int) -> List[int]:
        return sorted(self.holders.get(packet_id, ()))

    def undelivered(self) -> List[int]:
        return sorted(pid for pid, h in self.holders.items() if h)

    def step(self) -> None:
        cfg = self.config
        k = self.step_index
        t = (k + 1) * cfg.delta_t
        self.time = t

        for nd in self.nodes:
            step_mobility(nd, cfg.delta_t)
        prev_adj = self.adjacency
        adj = compute_connectivity([nd.pos for nd in self.nodes], cfg.radio_range)
        self.adjacency = adj
        rows, cols = np.nonzero(adj)
        neighbors: List[List[int]] = [[] for _ in self.nodes]
        for i, j in zip(rows.tolist(), cols.tolist()):
            neighbors[i].append(j)
        self.neighbors = neighbors

        if self.protocol is Protocol.ORION:
            self._exchange_hellos(t)
        elif self.protocol is Protocol.PROPHET:
            for nd in self.nodes:
                prophet_age(nd.protocol_state, t)
            new_i, new_j = np.nonzero(np.triu(adj & ~prev_adj))
            for i, j in zip(new_i.tolist(), new_j.tolist()):
                prophet_encounter(self.nodes[i].protocol_state, self.nodes[j].protocol_state, t)

        if k % cfg.traffic_every == 0:
            self._create_packet(t)

        for nd in self.nodes:
            if not nd.queue:
                continue
            if self.protocol is Protocol.ORION:
                self._forward_orion(nd, t)
            else:
                self._forward_copies(nd, t)

        self.step_index += 1

    # --- per-step phases -----------------------------------------------------

    def _exchange_hellos(self, t: float) -> None:
        dt = self.config.delta_t
        for nd in self.nodes:
            states = nd.contact_states
            live = self._live[nd.id]
            heard = self.neighbors[nd.id]
            for j in heard:
                st = states.get(j)
                if st is None:
                    st = states[j] = NeighborContactState(j, delta_t=dt)
                st.record_hello(t)
            # neighbours heard this step cannot time out, so only the silent ones are ticked
            for j in live.difference(heard):
                st = states[j]
                st.tick(t, dt)
                if st.phase is not Phase.CONNECTED:
                    live.discard(j)
            live.update(heard)

    def _create_packet(self, t: float) -> None:
        pid = self._next_packet_id
        self._next_packet_id += 1
        dest = self.nodes[self.destination]
        pk = Packet(pid, self.source, self.destination, dest.pos, t, ttl_hops=self.config.ttl_hops)
        src = self.nodes[self.source]
        src.queue[pid] = pk
        self.holders[pid] = {self.source}
        self.events.append(Event(t, pid, "created", self.source, None, 0))

    def _deliver(self, holder: NodeState, pk: Packet, t: float, rule: str) -> None:
        hops = pk.hop_count + 1
        self.events.append(
            Event(
                t,
                pk.packet_id,
                "delivered",
                holder.id,
                pk.dest_id,
                hops,
                rule,
                distance(holder.pos, pk.dest_pos),
                distance(self.nodes[pk.dest_id].pos, pk.dest_pos),
            )
        )
        self.delivered[pk.packet_id] = t
        for h in self.holders.pop(pk.packet_id, ()):
            self.nodes[h].queue.pop(pk.packet_id, None)
            self.nodes[h].arrived_step.pop(pk.packet_id, None)
        self._last_action.pop(pk.packet_id, None)

    def _drop(self, holder: NodeState, pk: Packet, t: float) -> None:
        self.events.append(Event(t, pk.packet_id, "dropped", holder.id, None, pk.hop_count))
        holder.queue.pop(pk.packet_id, None)
        holder.arrived_step.pop(pk.packet_id, None)
        h = self.holders.get(pk.packet_id)
        if h is not None:
            h.discard(holder.id)
            if not h:
                del self.holders[pk.packet_id]

    def _is_fresh(self, nd: NodeState, pid: int) -> bool:
        return nd.arrived_step.get(pid) == self.step_index

    def _receive(self, sender: NodeState, receiver: NodeState, pk: Packet) -> None:
        pk.hop_count += 1
        pk.previous_hop = sender.id
        receiver.queue[pk.packet_id] = pk
        receiver.arrived_step[pk.packet_id] = self.step_index
        self.holders.setdefault(pk.packet_id, set()).add(receiver.id)

    def _forward_orion(self, nd: NodeState, t: float) -> None:
        cfg = self.config
        snapshots: Optional[List[NeighborSnapshot]] = None
        estimated: Optional[list] = None
        for pk in list(nd.queue.values()):
            if self._is_fresh(nd, pk.packet_id):
                continue
            if snapshots is None:
                snapshots = [
                    NeighborSnapshot(j, self.nodes[j].pos, self.nodes[j].prev_pos)
                    for j in self.neighbors[nd.id]
                ]
            if estimated is None:
                # only needed when greedy criteria fail; computed lazily once per step
                estimated = _LazyPredictions(nd, t)
            decision = orion_forward(
                nd.pos,
                pk,
                snapshots,
                estimated,
                t,
                delta_t=cfg.delta_t,
                weight_speed=cfg.orion_weight_speed,
                confidence_k=cfg.orion_confidence_k,
            )
            pid = pk.packet_id
            if decision.action is Action.SEND:
                j = decision.next_hop
                if pk.hop_count >= pk.ttl_hops:
                    self._drop(nd, pk, t)
                    continue
                if j == pk.dest_id:
                    nd.queue.pop(pid)
                    nd.arrived_step.pop(pid, None)
                    self._deliver(nd, pk, t, decision.rule.value)
                    continue
                receiver = self.nodes[j]
                self.events.append(
                    Event(
                        t,
                        pid,
                        "sent",
                        nd.id,
                        j,
                        pk.hop_count + 1,
                        decision.rule.value,
                        distance(nd.pos, pk.dest_pos),
                        distance(receiver.pos, pk.dest_pos),
                    )
                )
                nd.queue.pop(pid)
                nd.arrived_step.pop(pid, None)
                self.holders[pid].discard(nd.id)
                pk.clear_schedule()
                self._receive(nd, receiver, pk)
                self._last_action.pop(pid, None)
            elif decision.action is Action.SCHEDULE:
                changed = pk.scheduled_next_hop != decision.next_hop
                pk.scheduled_next_hop = decision.next_hop
                pk.scheduled_at = t
                pk.scheduled_contact_start = decision.contact_start
                if changed or self._last_action.get(pid) != "scheduled":
                    self.events.append(Event(t, pid, "scheduled", nd.id, decision.next_hop, pk.hop_count))
                self._last_action[pid] = "scheduled"
            else:
                if decision.rule is Rule.WAITING:
                    continue
                pk.clear_schedule()
                if self._last_action.get(pid) != "stored":
                    self.events.append(Event(t, pid, "stored", nd.id, None, pk.hop_count))
                self._last_action[pid] = "stored"

    def _forward_copies(self, nd: NodeState, t: float) -> None:
        prophet = self.protocol is Protocol.PROPHET
        for pk in list(nd.queue.values()):
            pid = pk.packet_id
            if pid in self.delivered or self._is_fresh(nd, pid) or pk.hop_count >= pk.ttl_hops:
                continue
            for j in self.neighbors[nd.id]:
                if j == pk.dest_id:
                    self._deliver(nd, pk, t, Rule.DESTINATION.value)
                    break
                receiver = self.nodes[j]
                if pid in receiver.queue:
                    continue
                if prophet and not prophet_forward(
                    nd.protocol_state, pk, j, receiver.protocol_state.prob(pk.dest_id)
                ):
                    continue
                copy = Packet(
                    pid,
                    pk.source_id,
                    pk.dest_id,
                    pk.dest_pos,
                    pk.created_at,
                    hop_count=pk.hop_count,
                    ttl_hops=pk.ttl_hops,
                )
                self.events.append(
                    Event(t, pid, "sent", nd.id, j, pk.hop_count + 1, "replicate")
                )
                self._receive(nd, receiver, copy)


class _LazyPredictions:
    """Iterable of (neighbor_id, ContactPrediction) built on first use."""

    def __init__(self, node: NodeState, now: float):
        self._node = node
        self._now = now
        self._items: Optional[list] = None

    def __iter__(self):
        if self._items is None:
            items = []
            for j in sorted(self._node.contact_states):
                pred = self._node.contact_states[j].predict_next_contact(self._now)
                if pred is not None:
                    items.append((j, pred))
            self._items = items
        return iter(self._items)


def run_scenario(config: ScenarioConfig) -> MetricsReport:
    """Run one scenario to completion and return its metrics."""
    return Simulation(config).run().metrics


def simulate(config: ScenarioConfig) -> SimulationResult:
    """Run one scenario and keep the full event log."""
    return Simulation(config).run()


def trace_positions(config: ScenarioConfig) -> np.ndarray:
    """Positions of every node at every step, shape (steps, nodes, 2).

    Mobility never depends on routing, so this is the same for every protocol.
    """
    sim = Simulation(config)
    out = np.zeros((config.steps, config.node_count, 2))
    for k in range(config.steps):
        for nd in sim.nodes:
            step_mobility(nd, config.delta_t)
        out[k] = [nd.pos for nd in sim.nodes]
    return out


__all__: Sequence[str] = [
    "Simulation",
    "SimulationResult",
    "compute_connectivity",
    "run_scenario",
    "simulate",
    "trace_positions",
]
