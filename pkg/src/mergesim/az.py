"""Awareness-zone logic: HDV aggressiveness, merge-ahead versus yield, and yield execution."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .core import ScenarioConfig, VehicleRecord, VehicleState
from .trajectory import InfeasibleStop, LinearControlLaw, max_speed_to_stop, solve_yield_stop

W_SPEED = 0.7
W_ACCEL = 0.3
# close enough to the stop line to count as stopped there
STOP_TOLERANCE = 0.5
REST_SPEED = 0.05


class AzDecision(str, enum.Enum):
    MERGE_AHEAD = "MergeAhead"
    YIELD = "Yield"


@dataclass(frozen=True)
class AggressivenessEstimate:
    value: float
    window_start: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError("aggressiveness must lie in [0, 1]")


def _clamp01(a: float) -> float:
    return min(max(a, 0.0), 1.0)


def allowed_speed(distance: float, cfg: ScenarioConfig) -> float:
    """Fastest speed from which a driver could still stop before M, capped at v_max."""
    return min(cfg.v_max, max_speed_to_stop(distance, cfg.u_min))


def estimate_aggressiveness(history: Sequence, cfg: ScenarioConfig) -> AggressivenessEstimate:
    """Default heuristic over an HDV trace of (t, VehicleState, u) samples.

    Speed is scored against the stopping envelope at the HDV's current
    distance to M; acceleration by its mean positive part.
    """
    if not history:
        raise ValueError("empty aggressiveness history")
    n = len(history)
    v_bar = sum(s.velocity for _, s, _ in history) / n
    u_pos = sum(max(u, 0.0) for _, _, u in history) / n
    d = cfg.L - history[-1][1].position
    v_allow = allowed_speed(d, cfg)
    speed_term = v_bar / v_allow if v_allow > 0 else (1.0 if v_bar > 0 else 0.0)
    a = W_SPEED * max(speed_term, 0.0) + W_ACCEL * max(u_pos / cfg.u_max, 0.0)
    return AggressivenessEstimate(_clamp01(a), history[0][0])


Estimator = Callable[[Sequence, ScenarioConfig], AggressivenessEstimate]


def stop_point(cfg: ScenarioConfig) -> float:
    return cfg.L - cfg.delta


def can_still_stop(state: VehicleState, cfg: ScenarioConfig) -> bool:
    d = stop_point(cfg) - state.position
    return d >= 0 and state.velocity <= max_speed_to_stop(d, cfg.u_min)


def az_decide(cav: VehicleRecord, iminus: Optional[VehicleRecord],
              a: Optional[AggressivenessEstimate], cfg: ScenarioConfig) -> AzDecision:
    if iminus is None or iminus.is_cav:
        return AzDecision.MERGE_AHEAD
    if a is None or a.value < cfg.gamma:
        return AzDecision.MERGE_AHEAD
    if not can_still_stop(cav.state, cfg):
        return AzDecision.MERGE_AHEAD
    return AzDecision.YIELD


def yield_law(state: VehicleState, t: float, cfg: ScenarioConfig) -> LinearControlLaw:
    """Reference for one yield tick, re-planned from the current state.

    Falls back to full braking when the closed-form stop would exceed u_min,
    brakes out the last few cm/s in one tick, and holds once at rest.
    """
    x, v = state.position, state.velocity
    x_stop = stop_point(cfg)
    if v <= 1e-9:
        return LinearControlLaw(0.0, 0.0, t, t, x, 0.0)
    if v <= REST_SPEED:
        # finish the stop within one tick instead of creeping forward
        u = max(cfg.u_min, -v / cfg.T_d)
        return LinearControlLaw(0.0, u, t, t + v / -u, x, v)
    if x_stop - x <= 0:
        return LinearControlLaw(0.0, cfg.u_min, t, t + v / -cfg.u_min, x, v)
    try:
        return solve_yield_stop(x, v, x_stop, t, cfg.u_min)
    except InfeasibleStop:
        return LinearControlLaw(0.0, cfg.u_min, t, t + v / -cfg.u_min, x, v)


def execute_yield(state: VehicleState, t: float, cfg: ScenarioConfig) -> float:
    """Reference control for this tick of a yield manoeuvre."""
    return yield_law(state, t, cfg).u(t)


@dataclass
class YieldEpisode:
    """Committed yield, released once the conflicting HDV is past M with b4 >= 0."""

    hdv_id: int
    t_commit: float
    released: bool = False
