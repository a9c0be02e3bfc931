"""Safe sequencing and MPC-CBF control for highway merging with mixed traffic."""

from .core import (HdvParams, RoadId, ScenarioConfig, VehicleClass, VehicleRecord, VehicleState,
                   Zone, load_config, parse_config_text)
from .sim import RunResult, World, run

__all__ = ["HdvParams", "RoadId", "ScenarioConfig", "VehicleClass", "VehicleRecord", "VehicleState",
           "Zone", "load_config", "parse_config_text", "RunResult", "World", "run"]

__version__ = "0.1.0"
