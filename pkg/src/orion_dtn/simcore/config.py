"""Scenario description."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from ..protocols.packet import DEFAULT_TTL_HOPS
from ..protocols.prophet import ProphetParams


class ConfigError(ValueError):
    """Invalid scenario or experiment configuration."""


class Protocol(str, enum.Enum):
    ORION = "orion"
    PROPHET = "prophet"
    EPIDEMIC = "epidemic"


def _is_multiple(value: float, unit: float) -> bool:
    ratio = value / unit
    return math.isclose(ratio, round(ratio), rel_tol=0.0, abs_tol=1e-9)


@dataclass(frozen=True)
class ScenarioConfig:
    area_width: float = 500.0
    area_height: float = 500.0
    node_count: int = 30
    speed: float = 10.0
    radio_range: float = 100.0
    delta_t: float = 1.0
    duration: float = 600.0
    seed: int = 1
    protocol: Protocol = Protocol.ORION
    traffic_period: float = 5.0
    regular_fraction: float = 0.5
    fixed_count: int = 0
    ttl_hops: int = DEFAULT_TTL_HOPS
    prophet: ProphetParams = field(default_factory=ProphetParams)
    orion_weight_speed: float = 0.5
    orion_confidence_k: float = 5.0

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.delta_t))

    @property
    def traffic_every(self) -> int:
        """Traffic period expressed in steps."""
        return int(round(self.traffic_period / self.delta_t))

    def validate(self) -> "ScenarioConfig":
        if self.area_width <= 0 or self.area_height <= 0:
            raise ConfigError("area dimensions must be positive")
        if self.delta_t <= 0 or self.duration <= 0:
            raise ConfigError("delta_t and duration must be positive")
        if not _is_multiple(self.duration, self.delta_t):
            raise ConfigError("delta_t must divide duration")
        if self.traffic_period <= 0 or not _is_multiple(self.traffic_period, self.delta_t):
            raise ConfigError("traffic_period must be a positive multiple of delta_t")
        if self.node_count < 2:
            raise ConfigError("node_count must be at least 2")
        if not 0 <= self.fixed_count <= self.node_count:
            raise ConfigError("fixed_count must lie in [0, node_count]")
        if self.speed < 0:
            raise ConfigError("speed must be non-negative")
        if self.radio_range < 0:
            raise ConfigError("radio_range must be non-negative")
        if not 0.0 <= self.regular_fraction <= 1.0:
            raise ConfigError("regular_fraction must lie in [0, 1]")
        if self.ttl_hops < 1:
            raise ConfigError("ttl_hops must be at least 1")
        if not 0.0 <= self.orion_weight_speed <= 1.0:
            raise ConfigError("orion_weight_speed must lie in [0, 1]")
        if self.orion_confidence_k <= 0:
            raise ConfigError("orion_confidence_k must be positive")
        try:
            Protocol(self.protocol)
        except ValueError:
            raise ConfigError(f"unknown protocol {self.protocol!r}") from None
        return self
