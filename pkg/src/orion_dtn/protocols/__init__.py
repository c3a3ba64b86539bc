"""Routing engines: ORION, PRoPHET and Epidemic."""
from .epidemic import epidemic_forward
from .orion import f_opt, orion_forward
from .packet import (
    DEFAULT_TTL_HOPS,
    Action,
    ForwardDecision,
    NeighborSnapshot,
    Packet,
    Rule,
    distance,
)
from .prophet import (
    ProphetParams,
    ProphetState,
    prophet_age,
    prophet_encounter,
    prophet_forward,
    prophet_transitivity,
    prophet_update,
)

__all__ = [
    "Action",
    "DEFAULT_TTL_HOPS",
    "ForwardDecision",
    "NeighborSnapshot",
    "Packet",
    "ProphetParams",
    "ProphetState",
    "Rule",
    "distance",
    "epidemic_forward",
    "f_opt",
    "orion_forward",
    "prophet_age",
    "prophet_encounter",
    "prophet_forward",
    "prophet_transitivity",
    "prophet_update",
]
