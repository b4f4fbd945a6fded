"""Scenario configuration and its flat ``key = value`` file format.

Values are given in the units named by each key (km/h, kWh, kW, meters,
seconds) and converted to SI by the accessors used by the simulator.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from ..comms import CommMode
from ..domain import ConfigurationError, consumption_per_meter, kmh_to_mps, kw_to_w, kwh_to_j


@dataclass(frozen=True)
class ScenarioConfig:
    mode: str = "pull"
    graph_file: Optional[str] = None
    grid_width: int = 9
    grid_height: int = 7
    grid_spacing: float = 500.0
    placement_seed: int = 1
    cs_nodes: tuple = ()
    rsu_nodes: tuple = ()
    ev_count: int = 100
    speed_min_kmh: float = 30.0
    speed_max_kmh: float = 50.0
    battery_kwh: float = 30.0
    max_range_km: float = 161.0
    soc_threshold: float = 0.40
    initial_soc_min: float = 0.40
    initial_soc_max: float = 1.0
    cs_count: int = 5
    cs_energy_budget_kwh: float = 3000.0  # math.inf means unlimited
    slots: int = 3
    power_kw: float = 62.0
    rsu_count: int = 7
    rsu_radius: float = 300.0
    ev_range: float = 300.0
    publication_interval: float = 100.0
    publication_phase: float = 0.0
    reservation_grace: float = 600.0
    duration: float = 43200.0
    runs: int = 10
    seed: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        try:
            CommMode(self.mode)
        except ValueError:
            raise ConfigurationError(f"unknown mode {self.mode!r}; use push, pull, apull or ideal") from None
        positive = ["grid_spacing", "speed_min_kmh", "speed_max_kmh", "battery_kwh", "max_range_km",
                    "cs_energy_budget_kwh", "power_kw", "rsu_radius", "ev_range", "publication_interval"]
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        for name in ("ev_count", "cs_count", "slots", "runs", "grid_width", "grid_height"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1")
        if self.rsu_count < 0:
            raise ConfigurationError("rsu_count must be >= 0")
        if self.speed_min_kmh > self.speed_max_kmh:
            raise ConfigurationError("speed_min_kmh exceeds speed_max_kmh")
        if not 0 < self.soc_threshold < 1:
            raise ConfigurationError("soc_threshold must lie in (0, 1)")
        if not 0 <= self.initial_soc_min <= self.initial_soc_max <= 1:
            raise ConfigurationError("need 0 <= initial_soc_min <= initial_soc_max <= 1")
        if not 0 <= self.publication_phase < self.publication_interval:
            raise ConfigurationError("publication_phase must lie in [0, publication_interval)")
        if self.duration < 0 or self.reservation_grace < 0:
            raise ConfigurationError("duration and reservation_grace must be non-negative")

    # -- SI accessors --------------------------------------------------------

    @property
    def comm_mode(self) -> CommMode:
        return CommMode(self.mode)

    @property
    def battery_max(self) -> float:
        return kwh_to_j(self.battery_kwh)

    @property
    def consumption_rate(self) -> float:
        return consumption_per_meter(self.battery_max, self.max_range_km * 1000.0)

    @property
    def power(self) -> float:
        return kw_to_w(self.power_kw)

    @property
    def energy_budget(self) -> float:
        return kwh_to_j(self.cs_energy_budget_kwh)

    @property
    def speed_range(self) -> tuple[float, float]:
        return kmh_to_mps(self.speed_min_kmh), kmh_to_mps(self.speed_max_kmh)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


CONFIG_KEYS = {f.name: f for f in fields(ScenarioConfig)}


def parse_value(name: str, text: str):
    """Convert the textual value of ``name`` to the field's type."""
    if name not in CONFIG_KEYS:
        raise ConfigurationError(f"unknown configuration key {name!r}")
    default = CONFIG_KEYS[name].default
    text = text.strip()
    if name in ("cs_nodes", "rsu_nodes"):
        return tuple(int(tok) for tok in text.replace(",", " ").split())
    if name == "graph_file":
        return text or None
    if name == "cs_energy_budget_kwh" and text.lower() in ("unlimited", "inf"):
        return math.inf
    if isinstance(default, str):
        return text
    try:
        if isinstance(default, int) and not isinstance(default, bool):
            return int(text)
        return float(text)
    except ValueError:
        raise ConfigurationError(f"bad value for {name}: {text!r}") from None


def read_pairs(path) -> list[tuple[str, str]]:
    pairs = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        pairs.append((key.strip(), value.strip()))
    return pairs


def load_config(path, **overrides) -> ScenarioConfig:
    values = {key: parse_value(key, value) for key, value in read_pairs(path)}
    if values.get("graph_file") and not Path(values["graph_file"]).is_absolute():
        values["graph_file"] = str(Path(path).parent / values["graph_file"])
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ScenarioConfig(**values)


def dump_config(config: ScenarioConfig) -> str:
    lines = []
    for name in CONFIG_KEYS:
        value = getattr(config, name)
        if value is None:
            continue
        if isinstance(value, tuple):
            if not value:
                continue
            value = " ".join(str(v) for v in value)
        elif value == math.inf:
            value = "unlimited"
        lines.append(f"{name} = {value}")
    return "\n".join(lines) + "\n"
