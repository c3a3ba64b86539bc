"""Per-neighbour contact tracking and contact prediction.

Time is divided into periods of length ``delta_t``. A contact is a maximal
run of periods in which at least one HELLO was heard from the neighbour; a
non-contact is the run of silent periods between two contacts. Each
completed duration feeds an :class:`~orion_dtn.arma.ArmaOnlineState`.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import IO, Iterable, List, Optional

from .arma import ArmaOnlineState, forecast_next, online_update

MIN_CONTACTS = 2
"""Completed contacts required before a neighbour's next contact is predicted."""


class Phase(enum.Enum):
    UNKNOWN = "unknown"
    CONNECTED = "connected"
    DISCONNECTED = "disconnected"


class TimeRegressionError(ValueError):
    """Raised when a HELLO is timestamped before the previous one."""


@dataclass(frozen=True)
class ContactPrediction:
    next_contact_start: float
    expected_duration: float
    confidence_n: int


def _on_grid(duration: float, delta_t: float) -> float:
    return round(duration / delta_t) * delta_t


@dataclass
class NeighborContactState:
    neighbor_id: int
    delta_t: float = 1.0
    phase: Phase = Phase.UNKNOWN
    phase_start: float = 0.0
    last_hello: float = float("-inf")
    c_model: ArmaOnlineState = None  # type: ignore[assignment]
    cbar_model: ArmaOnlineState = None  # type: ignore[assignment]
    contact_count: int = 0
    keep_history: bool = True
    c_history: List[float] = field(default_factory=list)
    cbar_history: List[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.delta_t <= 0:
            raise ValueError("delta_t must be positive")
        if self.c_model is None:
            self.c_model = ArmaOnlineState(delta_t=self.delta_t)
        if self.cbar_model is None:
            self.cbar_model = ArmaOnlineState(delta_t=self.delta_t)

    def _close_contact(self, delta_t: float) -> None:
        end = self.last_hello + delta_t
        duration = max(delta_t, _on_grid(end - self.phase_start, delta_t))
        online_update(self.c_model, duration)
        if self.keep_history:
            self.c_history.append(duration)
        self.contact_count += 1
        self.phase = Phase.DISCONNECTED
        self.phase_start = end

    def record_hello(self, now: float) -> "NeighborContactState":
        """Register a HELLO heard from the neighbour at time ``now``."""
        if now < self.last_hello:
            raise TimeRegressionError(f"HELLO at {now} precedes previous HELLO at {self.last_hello}")
        if self.phase is Phase.CONNECTED and now - self.last_hello <= 2 * self.delta_t:
            self.last_hello = now
            return self
        # tick() was skipped for long enough that the contact must already have ended
        if self.phase is Phase.CONNECTED:
            self._close_contact(self.delta_t)

        if self.phase is Phase.DISCONNECTED:
            gap = _on_grid(now - self.phase_start, self.delta_t)
            if gap > 0:
                online_update(self.cbar_model, gap)
                if self.keep_history:
                    self.cbar_history.append(gap)
            self.phase = Phase.CONNECTED
            self.phase_start = now
        elif self.phase is Phase.UNKNOWN:
            self.phase = Phase.CONNECTED
            self.phase_start = now
        self.last_hello = now
        return self

    def tick(self, now: float, delta_t: Optional[float] = None) -> "NeighborContactState":
        """Close the current contact once a full period passed without a HELLO."""
        dt = self.delta_t if delta_t is None else delta_t
        if self.phase is Phase.CONNECTED and now - self.last_hello > dt:
            self._close_contact(dt)
        return self

    def predict_next_contact(self, now: float) -> Optional[ContactPrediction]:
        if self.contact_count < MIN_CONTACTS:
            return None
        confidence = self.c_model.n + self.cbar_model.n
        if self.phase is Phase.CONNECTED:
            elapsed = now - self.phase_start
            remaining = max(0.0, forecast_next(self.c_model) - elapsed)
            return ContactPrediction(now, remaining, confidence)
        start = max(now, self.phase_start + forecast_next(self.cbar_model))
        return ContactPrediction(start, forecast_next(self.c_model), confidence)


CONTACT_TRACE_HEADER = ("neighbor_id", "kind", "index", "duration_s")


def write_contact_trace(states: Iterable[NeighborContactState], fh: IO[str]) -> int:
    """Dump the recorded duration series of ``states`` as CSV; returns rows written."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CONTACT_TRACE_HEADER)
    rows = 0
    for st in sorted(states, key=lambda s: s.neighbor_id):
        for kind, series in (("C", st.c_history), ("Cbar", st.cbar_history)):
            for i, d in enumerate(series):
                writer.writerow((st.neighbor_id, kind, i, repr(float(d))))
                rows += 1
    return rows
