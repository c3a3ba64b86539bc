"""Greedy geographic forwarding with contact-prediction fallback.

A holder tries, in order: the destination itself, the connected neighbour
closest to the destination (if strictly closer than the holder), the
connected neighbour whose last move brought it closest toward the
destination, and finally the neighbour with the best predicted future
contact, for which the packet is scheduled and carried.
"""
from __future__ import annotations

from typing import Collection, Iterable, Optional, Sequence, Tuple

from ..contacts import ContactPrediction
from .packet import (
    Action,
    ForwardDecision,
    NeighborSnapshot,
    Packet,
    Position,
    Rule,
    distance,
)

DEFAULT_WEIGHT_SPEED = 0.5
DEFAULT_CONFIDENCE_K = 5.0
PATIENCE_PERIODS = 5
PATIENCE_FRACTION = 0.25


def f_opt(
    prediction: ContactPrediction,
    now: float,
    weight_speed: float = DEFAULT_WEIGHT_SPEED,
    confidence_k: float = DEFAULT_CONFIDENCE_K,
) -> float:
    """Score a predicted contact: sooner and better-supported is higher.

    ``weight_speed`` trades delivery speed (inverse wait) against certainty
    (a saturating function of the number of observations behind the forecast).
    """
    if not 0.0 <= weight_speed <= 1.0:
        raise ValueError("weight_speed must lie in [0, 1]")
    wait = max(0.0, prediction.next_contact_start - now)
    n = prediction.confidence_n
    speed = 1.0 / (1.0 + wait)
    certainty = n / (n + confidence_k)
    return weight_speed * speed + (1.0 - weight_speed) * certainty


def closest_neighbor(
    self_pos: Position, dest_pos: Position, connected: Iterable[NeighborSnapshot], exclude: Optional[int]
) -> Optional[int]:
    own = distance(self_pos, dest_pos)
    best: Optional[Tuple[float, int]] = None
    for nb in connected:
        if nb.neighbor_id == exclude:
            continue
        d = distance(nb.pos, dest_pos)
        if d < own and (best is None or (d, nb.neighbor_id) < best):
            best = (d, nb.neighbor_id)
    return None if best is None else best[1]


def most_advancing_neighbor(
    dest_pos: Position, connected: Iterable[NeighborSnapshot], exclude: Optional[int]
) -> Optional[int]:
    best: Optional[Tuple[float, int]] = None
    for nb in connected:
        if nb.neighbor_id == exclude:
            continue
        advance = distance(nb.prev_pos, dest_pos) - distance(nb.pos, dest_pos)
        if advance > 0 and (best is None or (-advance, nb.neighbor_id) < best):
            best = (-advance, nb.neighbor_id)
    return None if best is None else best[1]


def best_future_neighbor(
    estimated: Iterable[Tuple[int, ContactPrediction]],
    now: float,
    skip: Collection[Optional[int]],
    weight_speed: float = DEFAULT_WEIGHT_SPEED,
    confidence_k: float = DEFAULT_CONFIDENCE_K,
) -> Optional[Tuple[int, ContactPrediction]]:
    best = None
    best_key: Optional[Tuple[float, int]] = None
    for nid, pred in estimated:
        if nid in skip or pred is None:
            continue
        key = (-f_opt(pred, now, weight_speed, confidence_k), nid)
        if best_key is None or key < best_key:
            best_key, best = key, (nid, pred)
    return best


def schedule_expired(pk: Packet, now: float, delta_t: float) -> bool:
    start = pk.scheduled_contact_start
    if start is None:
        return True
    waited_for = start - (pk.scheduled_at if pk.scheduled_at is not None else start)
    patience = max(PATIENCE_PERIODS * delta_t, PATIENCE_FRACTION * waited_for)
    return now > start + patience


def orion_forward(
    self_pos: Position,
    pk: Packet,
    connected: Sequence[NeighborSnapshot],
    estimated: Iterable[Tuple[int, ContactPrediction]],
    now: float,
    *,
    delta_t: float = 1.0,
    weight_speed: float = DEFAULT_WEIGHT_SPEED,
    confidence_k: float = DEFAULT_CONFIDENCE_K,
) -> ForwardDecision:
    """Decide what to do with ``pk`` this step. Does not modify ``pk``.

    A STORE decision with rule WAITING means an existing schedule stays in
    force; any other STORE or SEND invalidates it.
    """
    ids = {nb.neighbor_id for nb in connected}
    if pk.dest_id in ids:
        return ForwardDecision(Action.SEND, pk.dest_id, Rule.DESTINATION)

    prev = pk.previous_hop
    if pk.scheduled_next_hop is not None:
        if pk.scheduled_next_hop in ids:
            fn = closest_neighbor(self_pos, pk.dest_pos, connected, prev)
            if fn is not None:
                return ForwardDecision(Action.SEND, fn, Rule.CLOSEST)
            # nobody strictly closer: plain arg-min over the connected set
            fn = min(
                (
                    (distance(nb.pos, pk.dest_pos), nb.neighbor_id)
                    for nb in connected
                    if nb.neighbor_id != prev
                ),
                default=(None, None),
            )[1]
            if fn is not None:
                return ForwardDecision(Action.SEND, fn, Rule.SCHEDULED_CONTACT)
        elif not schedule_expired(pk, now, delta_t):
            return ForwardDecision(Action.STORE, None, Rule.WAITING)

    fn = closest_neighbor(self_pos, pk.dest_pos, connected, prev)
    if fn is not None:
        return ForwardDecision(Action.SEND, fn, Rule.CLOSEST)
    fn = most_advancing_neighbor(pk.dest_pos, connected, prev)
    if fn is not None:
        return ForwardDecision(Action.SEND, fn, Rule.ADVANCING)
    best = best_future_neighbor(estimated, now, ids | {prev}, weight_speed, confidence_k)
    if best is not None:
        nid, pred = best
        return ForwardDecision(Action.SCHEDULE, nid, Rule.PREDICTED, pred.next_contact_start)
    return ForwardDecision(Action.STORE)
