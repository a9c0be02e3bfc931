"""Shared domain types, scenario configuration and the coordinator's vehicle table."""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

KMH = 1.0 / 3.6

VehicleId = int


class VehicleClass(str, enum.Enum):
    CAV = "CAV"
    HDV = "HDV"


class RoadId(enum.IntEnum):
    MAIN = 1
    SIDE = 2

    @property
    def other(self) -> "RoadId":
        return RoadId.SIDE if self is RoadId.MAIN else RoadId.MAIN


class Zone(str, enum.Enum):
    SZ = "SZ"
    AZ = "AZ"
    EXITED = "Exited"


class ConfigError(ValueError):
    pass


class TableInconsistency(LookupError):
    """An id referenced by a sequence or assignment is missing from the table."""


@dataclass(frozen=True, slots=True)
class VehicleState:
    position: float
    velocity: float
    accel: float = 0.0


@dataclass(frozen=True, slots=True)
class HdvParams:
    model: str = "CarFollowing"  # ConstantSpeed | CarFollowing | Aggressive
    desired_speed: float = 25.0
    headway_T: float = 1.5
    min_gap_s0: float = 2.0
    accel_a: float = 1.4
    decel_b: float = 2.0
    aggression: float = 0.0
    seed_offset: int = 0

    def __post_init__(self):
        if self.model not in ("ConstantSpeed", "CarFollowing", "Aggressive"):
            raise ConfigError(f"unknown HDV model {self.model!r}")
        if self.accel_a <= 0 or self.decel_b <= 0:
            raise ConfigError("IDM accel_a and decel_b must be positive")
        if not 0.0 <= self.aggression <= 1.0:
            raise ConfigError("aggression must lie in [0, 1]")


@dataclass(slots=True, eq=False)
class VehicleRecord:
    id: VehicleId
    cls: VehicleClass
    road: RoadId
    state: VehicleState
    t_entry: float
    zone: Zone = Zone.SZ
    t_az: Optional[float] = None
    t_exit: Optional[float] = None
    control_history: list = field(default_factory=list)
    hdv_params: Optional[HdvParams] = None

    @property
    def x(self) -> float:
        return self.state.position

    @property
    def v(self) -> float:
        return self.state.velocity

    @property
    def is_cav(self) -> bool:
        return self.cls is VehicleClass.CAV

    def remaining(self, L: float) -> float:
        return L - self.state.position


@dataclass(frozen=True)
class ScenarioConfig:
    # geometry
    L: float = 400.0
    L_SZ: float = 300.0
    L_AZ: float = 100.0
    # safety
    phi: float = 1.8
    delta: float = 3.78
    # limits
    v_min: float = 0.0
    v_max: float = 108 * KMH
    u_min: float = -5.886
    u_max: float = 4.905
    # controller
    T_d: float = 0.1
    H: int = 15
    beta1: float = 1.0
    c3: float = 1.0
    k1: float = 1.0
    k2: float = 1.0
    k3: float = 1.0
    k4: float = 1.0
    k5: float = 1.0
    k6: float = 1.0
    gamma: float = 0.5
    # traffic
    arrival_rate_per_road: float = 600.0 / 3600.0
    penetration_rate: float = 0.5
    init_speed_range: tuple = (60 * KMH, 100 * KMH)
    # illustrative polynomial fuel coefficients (w0..w3, r0..r2), mL/s
    fuel_coeffs: tuple = (0.1569, 2.450e-2, -7.415e-4, 5.975e-5, 0.07224, 9.681e-2, 1.075e-3)
    seed: int = 0
    alpha_oracle: float = 0.5
    sequencing_policy: str = "SS"
    # run control and stand-ins
    n_vehicles: int = 100
    wall_limit: float = 3600.0
    hdv_model: str = "CarFollowing"
    hdv_aggression: float = 0.0
    enum_cap: int = 5000
    sequencing_method: str = "dp"
    sequence_commitment: bool = True
    T_max: float = 120.0
    downstream_length: float = 100.0

    def __post_init__(self):
        if abs(self.L_SZ + self.L_AZ - self.L) > 1e-9:
            raise ConfigError("L_SZ + L_AZ must equal L")
        if not self.v_min < self.v_max:
            raise ConfigError("v_min must be below v_max")
        if not self.u_min < 0 < self.u_max:
            raise ConfigError("need u_min < 0 < u_max")
        if self.T_d <= 0:
            raise ConfigError("T_d must be positive")
        if self.H < 1:
            raise ConfigError("H must be at least 1")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError("gamma must lie in (0, 1)")
        if not 0.0 <= self.penetration_rate <= 1.0:
            raise ConfigError(f"penetration_rate {self.penetration_rate} outside [0, 1]")
        if self.arrival_rate_per_road < 0:
            raise ConfigError("arrival_rate_per_road must be non-negative")
        lo, hi = self.init_speed_range
        if not 0 <= lo <= hi:
            raise ConfigError("init_speed_range must be an ordered non-negative pair")
        if len(self.fuel_coeffs) != 7:
            raise ConfigError("fuel_coeffs needs 7 values (w0..w3, r0..r2)")
        if not 0.0 <= self.alpha_oracle <= 1.0:
            raise ConfigError("alpha_oracle must lie in [0, 1]")
        if self.sequencing_policy not in ("SS", "SDF"):
            raise ConfigError(f"unknown sequencing_policy {self.sequencing_policy!r}")
        if self.sequencing_method not in ("dp", "enumerate"):
            raise ConfigError(f"unknown sequencing_method {self.sequencing_method!r}")
        if min(self.k1, self.k2, self.k3, self.k4, self.k5, self.k6) <= 0:
            raise ConfigError("class-K gains must be positive")
        if self.n_vehicles < 0:
            raise ConfigError("n_vehicles must be non-negative")
        HdvParams(model=self.hdv_model, aggression=self.hdv_aggression)

    @property
    def az_start(self) -> float:
        return self.L - self.L_AZ

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def Phi(self, x: float) -> float:
        """Time-headway shaping for the merge barriers: 0 at the CZ entry, phi at M."""
        return self.phi * x / self.L


_TUPLE_KEYS = {"init_speed_range", "fuel_coeffs"}
_KMH_KEYS = {"v_min_kmh": "v_min", "v_max_kmh": "v_max", "init_speed_range_kmh": "init_speed_range"}


def _coerce(name: str, raw: str, template):
    if name in _TUPLE_KEYS:
        return tuple(float(p) for p in raw.replace(",", " ").split())
    if isinstance(template, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(template, int):
        return int(raw)
    if isinstance(template, float):
        return float(raw)
    return raw


def parse_config_text(text: str, **overrides) -> ScenarioConfig:
    """Parse ``key = value`` lines (``#`` comments) into a ScenarioConfig.

    Keys ending in ``_kmh`` are converted to m/s; everything else is SI.
    """
    defaults = ScenarioConfig()
    fields = {f.name for f in dataclasses.fields(ScenarioConfig)}
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key in _KMH_KEYS:
            target = _KMH_KEYS[key]
            val = _coerce(target, raw, getattr(defaults, target))
            val = tuple(p * KMH for p in val) if isinstance(val, tuple) else val * KMH
            values[target] = val
            continue
        if key not in fields:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _coerce(key, raw, getattr(defaults, key))
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {raw!r}") from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ScenarioConfig(**values)


def load_config(path, **overrides) -> ScenarioConfig:
    return parse_config_text(Path(path).read_text(), **overrides)


def dump_config(cfg: ScenarioConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        val = getattr(cfg, f.name)
        if isinstance(val, tuple):
            val = ", ".join(repr(float(p)) for p in val)
        lines.append(f"{f.name} = {val}")
    return "\n".join(lines) + "\n"


def zone_for(x: float, cfg: ScenarioConfig) -> Zone:
    if x >= cfg.L:
        return Zone.EXITED
    if x >= cfg.L - cfg.L_AZ:
        return Zone.AZ
    return Zone.SZ


def by_remaining_distance(records: Iterable[VehicleRecord]) -> list:
    """Order by remaining distance to M (largest position first), ties by (road, id)."""
    return sorted(records, key=lambda r: (-r.state.position, int(r.road), r.id))


def snapshot(records: Iterable[VehicleRecord], zone: Zone,
             road: Optional[RoadId] = None, cls: Optional[VehicleClass] = None) -> list:
    """Records in ``zone`` (by label), optionally filtered by road and class,
    ordered by remaining distance."""
    out = [r for r in records
           if r.zone is zone and (road is None or r.road is road) and (cls is None or r.cls is cls)]
    return by_remaining_distance(out)
