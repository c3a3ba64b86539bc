"""Deterministic fixed-step DTN simulation engine."""
from .config import ConfigError, Protocol, ScenarioConfig
from .engine import (
    Simulation,
    SimulationResult,
    compute_connectivity,
    run_scenario,
    simulate,
    trace_positions,
)
from .metrics import Event, MetricsReport, collect_metrics, write_event_log
from .mobility import NodeKind, NodeState, RandomWaypoint, RectangleLoop, build_nodes, step_mobility

__all__ = [
    "ConfigError",
    "Event",
    "MetricsReport",
    "NodeKind",
    "NodeState",
    "Protocol",
    "RandomWaypoint",
    "RectangleLoop",
    "ScenarioConfig",
    "Simulation",
    "SimulationResult",
    "build_nodes",
    "collect_metrics",
    "compute_connectivity",
    "run_scenario",
    "simulate",
    "step_mobility",
    "trace_positions",
    "write_event_log",
]
