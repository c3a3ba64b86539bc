"""Epidemic flooding: copy to every neighbour that lacks the packet."""
from __future__ import annotations

from typing import Collection, Iterable, List, Mapping

from .packet import Packet


def epidemic_forward(
    pk: Packet, connected: Iterable[int], peer_holdings: Mapping[int, Collection[int]]
) -> List[int]:
    """Neighbours (ascending id) that should receive a copy of ``pk``."""
    return sorted(n for n in connected if pk.packet_id not in peer_holdings.get(n, ()))
