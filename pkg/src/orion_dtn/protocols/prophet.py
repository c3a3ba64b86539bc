"""PRoPHET delivery predictabilities and replication rule.

Aging is applied lazily: each stored value remembers the aging-unit counter
at which it was written, and is read as ``value * gamma ** (units - stamp)``.
Aging therefore only advances an integer counter, and aging by ``n1`` then
``n2`` units reads back bit-identical to aging by ``n1 + n2`` at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Union

import numpy as np

from .packet import Packet

_GRID_EPS = 1e-9


@dataclass(frozen=True)
class ProphetParams:
    l_encounter: float = 0.75
    gamma: float = 0.98
    beta: float = 0.25
    time_unit: float = 1.0

    def __post_init__(self) -> None:
        for name in ("l_encounter", "gamma", "beta"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.time_unit <= 0:
            raise ValueError("time_unit must be positive")


class ProphetState:
    """Delivery predictabilities P(owner, k) held by one node.

    Values live in arrays indexed by node id and grow on demand.
    """

    def __init__(self, owner: int, params: Optional[ProphetParams] = None, capacity: int = 0):
        self.owner = owner
        self.params = params if params is not None else ProphetParams()
        self.last_aged_at = 0.0
        self.units = 0
        size = max(capacity, owner + 1)
        self._value = np.zeros(size)
        self._stamp = np.zeros(size, dtype=np.int64)

    def __repr__(self) -> str:
        return f"ProphetState(owner={self.owner}, units={self.units}, probabilities={self.probabilities})"

    def _grow(self, size: int) -> None:
        if size > len(self._value):
            extra = size - len(self._value)
            self._value = np.concatenate([self._value, np.zeros(extra)])
            self._stamp = np.concatenate([self._stamp, np.zeros(extra, dtype=np.int64)])

    def prob(self, node: int) -> float:
        if node >= len(self._value):
            return 0.0
        value = float(self._value[node])
        age = self.units - int(self._stamp[node])
        if value == 0.0 or age == 0:
            return value
        return value * self.params.gamma**age

    def vector(self) -> np.ndarray:
        """Current predictabilities as an array indexed by node id."""
        return self._value * self.params.gamma ** (self.units - self._stamp)

    @property
    def probabilities(self) -> Dict[int, float]:
        return {int(k): self.prob(int(k)) for k in np.nonzero(self._value)[0]}

    def set_prob(self, node: int, value: float) -> None:
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"probability out of range: {value}")
        self._grow(node + 1)
        self._value[node] = value
        self._stamp[node] = self.units


def prophet_update(state: ProphetState, encountered: int) -> ProphetState:
    """Direct-encounter reinforcement of P(owner, encountered)."""
    if encountered == state.owner:
        raise ValueError("a node cannot encounter itself")
    old = state.prob(encountered)
    state.set_prob(encountered, old + (1.0 - old) * state.params.l_encounter)
    return state


def prophet_age(state: ProphetState, now: float, time_unit: Optional[float] = None) -> ProphetState:
    """Decay every predictability by gamma per whole time unit since the last aging."""
    unit = state.params.time_unit if time_unit is None else time_unit
    if now < state.last_aged_at:
        raise ValueError(f"aging time {now} precedes last aging at {state.last_aged_at}")
    n = int(math.floor((now - state.last_aged_at) / unit + _GRID_EPS))
    if n > 0:
        state.units += n
        state.last_aged_at += n * unit
    return state


def prophet_transitivity(
    state: ProphetState, p_ij: float, peer_probs: Union[Mapping[int, float], np.ndarray]
) -> ProphetState:
    """Raise P(owner, k) for destinations the encountered peer reaches well.

    ``peer_probs`` maps destination to P(peer, k), or is an array indexed by node id.
    """
    if not 0.0 <= p_ij <= 1.0:
        raise ValueError(f"p_ij out of range: {p_ij}")
    if isinstance(peer_probs, np.ndarray):
        peer = peer_probs.astype(float, copy=True)
    else:
        size = max(peer_probs, default=-1) + 1
        peer = np.zeros(size)
        for k, v in peer_probs.items():
            peer[k] = v
    if peer.size and (peer.min() < 0.0 or peer.max() > 1.0):
        raise ValueError("peer probabilities must lie in [0, 1]")
    if state.owner < peer.size:
        peer[state.owner] = 0.0
    idx = np.nonzero(peer)[0]
    if idx.size == 0:
        return state
    state._grow(peer.size)
    old = state._value[idx] * state.params.gamma ** (state.units - state._stamp[idx])
    state._value[idx] = old + (1.0 - old) * p_ij * peer[idx] * state.params.beta
    state._stamp[idx] = state.units
    return state


def prophet_encounter(a: ProphetState, b: ProphetState, now: float) -> None:
    """Full exchange when two nodes come into contact."""
    prophet_age(a, now)
    prophet_age(b, now)
    prophet_update(a, b.owner)
    prophet_update(b, a.owner)
    a_view = a.vector()
    b_view = b.vector()
    prophet_transitivity(a, a.prob(b.owner), b_view)
    prophet_transitivity(b, b.prob(a.owner), a_view)


def prophet_forward(self_state: ProphetState, pk: Packet, peer_id: int, peer_p_dest: float) -> bool:
    """Whether to hand a copy of ``pk`` to the peer (the sender keeps its own)."""
    if peer_id == pk.dest_id:
        return True
    return peer_p_dest > self_state.prob(pk.dest_id)
