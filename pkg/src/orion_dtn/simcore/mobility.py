"""Node mobility: random waypoint, rectangular loops and fixed hotspots."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

Position = Tuple[float, float]

# stream identifiers for per-subsystem generators
MOBILITY_STREAM = 1
TRAFFIC_STREAM = 2


def node_rng(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """Independent generator for one (subsystem, node) pair of a scenario seed."""
    return np.random.default_rng([seed % 2**64, stream, index])


class NodeKind(enum.Enum):
    RANDOM = "random"
    REGULAR = "regular"
    FIXED = "fixed"


class RandomWaypoint:
    """Move toward a uniform waypoint; on arrival draw a new waypoint and speed."""

    def __init__(self, rng, width, height, nominal_speed, waypoint=None, speed=None):
        self.rng = rng
        self.width = width
        self.height = height
        self.nominal_speed = nominal_speed
        self.waypoint = waypoint if waypoint is not None else self._draw_waypoint()
        self.speed = speed if speed is not None else self._draw_speed()

    def _draw_waypoint(self) -> Position:
        return (float(self.rng.uniform(0.0, self.width)), float(self.rng.uniform(0.0, self.height)))

    def _draw_speed(self) -> float:
        v = self.nominal_speed
        return float(self.rng.uniform(0.5 * v, 1.5 * v))

    def step(self, pos: Position, dt: float) -> Position:
        wx, wy = self.waypoint
        dx, dy = wx - pos[0], wy - pos[1]
        d = math.hypot(dx, dy)
        travel = self.speed * dt
        if d <= travel:
            self.waypoint = self._draw_waypoint()
            self.speed = self._draw_speed()
            return (wx, wy)
        f = travel / d
        return (pos[0] + dx * f, pos[1] + dy * f)


class RectangleLoop:
    """Closed rectangular route driven with a fixed speed per side, like a bus line."""

    def __init__(self, corners: List[Position], speeds: List[float], segment: int = 0):
        if len(corners) != len(speeds):
            raise ValueError("one speed per segment")
        self.corners = corners
        self.speeds = speeds
        self.segment = segment  # heading from corners[segment] to corners[segment + 1]

    @classmethod
    def random(cls, rng, width, height, nominal_speed) -> Tuple["RectangleLoop", Position]:
        x0 = float(rng.uniform(0.0, 0.4 * width))
        x1 = float(rng.uniform(0.6 * width, width))
        y0 = float(rng.uniform(0.0, 0.4 * height))
        y1 = float(rng.uniform(0.6 * height, height))
        corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        if rng.uniform() < 0.5:
            corners.reverse()
        speeds = [float(s) for s in rng.uniform(0.5 * nominal_speed, 1.5 * nominal_speed, size=4)]
        seg = int(rng.integers(4))
        a, b = corners[seg], corners[(seg + 1) % 4]
        frac = float(rng.uniform())
        start = (a[0] + (b[0] - a[0]) * frac, a[1] + (b[1] - a[1]) * frac)
        return cls(corners, speeds, seg), start

    def step(self, pos: Position, dt: float) -> Position:
        remaining = dt
        x, y = pos
        for _ in range(4 * len(self.corners)):
            if remaining <= 0:
                break
            speed = self.speeds[self.segment]
            if speed <= 0:
                break
            tx, ty = self.corners[(self.segment + 1) % len(self.corners)]
            d = math.hypot(tx - x, ty - y)
            need = d / speed
            if need > remaining:
                f = speed * remaining / d
                return (x + (tx - x) * f, y + (ty - y) * f)
            x, y = tx, ty
            remaining -= need
            self.segment = (self.segment + 1) % len(self.corners)
        return (x, y)


@dataclass
class NodeState:
    id: int
    kind: NodeKind
    pos: Position
    prev_pos: Position
    mover: Optional[object] = None
    contact_states: Dict[int, object] = field(default_factory=dict)
    protocol_state: Optional[object] = None
    queue: Dict[int, object] = field(default_factory=dict)  # packet_id -> Packet, FIFO
    arrived_step: Dict[int, int] = field(default_factory=dict)

    @property
    def current_speed(self) -> float:
        return getattr(self.mover, "speed", 0.0) if self.kind is NodeKind.RANDOM else 0.0


def step_mobility(node: NodeState, delta_t: float) -> NodeState:
    """Advance one node by one step; fixed nodes stay put."""
    node.prev_pos = node.pos
    if node.kind is not NodeKind.FIXED and node.mover is not None:
        node.pos = node.mover.step(node.pos, delta_t)
    return node


def build_nodes(
    node_count: int,
    width: float,
    height: float,
    speed: float,
    seed: int,
    regular_fraction: float = 0.5,
    fixed_count: int = 0,
) -> List[NodeState]:
    """Deploy nodes: ids below ``fixed_count`` are hotspots, then regular, then random."""
    mobile = node_count - fixed_count
    n_regular = int(round(regular_fraction * mobile))
    nodes = []
    for i in range(node_count):
        rng = node_rng(seed, MOBILITY_STREAM, i)
        if i < fixed_count:
            p = (float(rng.uniform(0.0, width)), float(rng.uniform(0.0, height)))
            nodes.append(NodeState(i, NodeKind.FIXED, p, p))
        elif i < fixed_count + n_regular:
            mover, p = RectangleLoop.random(rng, width, height, speed)
            nodes.append(NodeState(i, NodeKind.REGULAR, p, p, mover))
        else:
            p = (float(rng.uniform(0.0, width)), float(rng.uniform(0.0, height)))
            nodes.append(NodeState(i, NodeKind.RANDOM, p, p, RandomWaypoint(rng, width, height, speed)))
    return nodes
