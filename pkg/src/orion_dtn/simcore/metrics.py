"""Packet event log and the aggregate metrics computed from it."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Iterable, Optional

EVENT_KINDS = ("created", "sent", "scheduled", "stored", "delivered", "dropped")
EVENT_LOG_HEADER = ("time_s", "packet_id", "event", "from", "to")


@dataclass(frozen=True)
class Event:
    time: float
    packet_id: int
    kind: str
    src: Optional[int] = None
    dst: Optional[int] = None
    hop_count: Optional[int] = None
    rule: Optional[str] = None
    # holder's and receiver's distance to the packet's destination position
    dist_from: Optional[float] = None
    dist_to: Optional[float] = None


@dataclass(frozen=True)
class MetricsReport:
    sent: int
    delivered: int
    psr: float
    avg_hop_count: Optional[float]
    first_packet_arrival: Optional[float]
    avg_e2e_delay: Optional[float]


def collect_metrics(events: Iterable[Event]) -> MetricsReport:
    """Aggregate a complete event log. Averages are None when nothing was delivered."""
    created = {}
    delivered = {}
    for ev in events:
        if ev.kind == "created":
            created[ev.packet_id] = ev.time
        elif ev.kind == "delivered" and ev.packet_id not in delivered:
            delivered[ev.packet_id] = ev
    sent = len(created)
    n = len(delivered)
    if n == 0:
        return MetricsReport(sent, 0, 0.0, None, None, None)
    hops = [ev.hop_count for ev in delivered.values()]
    delays = [ev.time - created[pid] for pid, ev in delivered.items()]
    return MetricsReport(
        sent=sent,
        delivered=n,
        psr=n / sent if sent else 0.0,
        avg_hop_count=sum(hops) / n,
        first_packet_arrival=min(ev.time for ev in delivered.values()),
        avg_e2e_delay=sum(delays) / n,
    )


def _cell(v) -> str:
    return "" if v is None else repr(v) if isinstance(v, float) else str(v)


def write_event_log(events: Iterable[Event], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(EVENT_LOG_HEADER)
    for ev in events:
        writer.writerow((_cell(float(ev.time)), ev.packet_id, ev.kind, _cell(ev.src), _cell(ev.dst)))
