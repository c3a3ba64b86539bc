"""Types shared by the routing engines."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

Position = Tuple[float, float]

DEFAULT_TTL_HOPS = 64


def distance(a: Position, b: Position) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


@dataclass
class Packet:
    packet_id: int
    source_id: int
    dest_id: int
    dest_pos: Position
    created_at: float
    hop_count: int = 0
    ttl_hops: int = DEFAULT_TTL_HOPS
    previous_hop: Optional[int] = None
    # ORION store-carry-forward bookkeeping
    scheduled_next_hop: Optional[int] = None
    scheduled_at: Optional[float] = None
    scheduled_contact_start: Optional[float] = None

    def clear_schedule(self) -> None:
        self.scheduled_next_hop = None
        self.scheduled_at = None
        self.scheduled_contact_start = None


@dataclass(frozen=True)
class NeighborSnapshot:
    """Where a connected neighbour is now and where it was one step ago."""

    neighbor_id: int
    pos: Position
    prev_pos: Position


class Action(enum.Enum):
    SEND = "send"
    SCHEDULE = "schedule"
    STORE = "store"


class Rule(enum.Enum):
    """Which branch of the forwarding logic produced a decision."""

    DESTINATION = "destination"
    CLOSEST = "closest"
    ADVANCING = "advancing"
    SCHEDULED_CONTACT = "scheduled_contact"
    PREDICTED = "predicted"
    WAITING = "waiting"
    NONE = "none"


@dataclass(frozen=True)
class ForwardDecision:
    action: Action
    next_hop: Optional[int] = None
    rule: Rule = Rule.NONE
    # set for SCHEDULE: the predicted contact start used for patience checks
    contact_start: Optional[float] = None

    def __post_init__(self) -> None:
        if self.action is not Action.STORE and self.next_hop is None:
            raise ValueError(f"{self.action.value} decision needs a next hop")
