"""Double-integrator propagation under zero-order-hold control."""

from __future__ import annotations

from dataclasses import dataclass

from .core import VehicleState


@dataclass(frozen=True)
class PredictedTrajectory:
    start_time: float
    dt: float
    states: list


def step(state: VehicleState, u: float, dt: float, clamp_at_rest: bool = False) -> VehicleState:
    """Advance ``state`` by ``dt`` with constant acceleration ``u``.

    With ``clamp_at_rest`` the vehicle stops at the zero-speed crossing instead
    of reversing (HDV models and yield mode only).
    """
    x, v = state.position, state.velocity
    v_new = v + u * dt
    if clamp_at_rest and u < 0.0 and v_new < 0.0:
        t_stop = v / -u if v > 0.0 else 0.0
        return VehicleState(x + v * t_stop + 0.5 * u * t_stop * t_stop, 0.0, u)
    return VehicleState(x + v * dt + 0.5 * u * dt * dt, v_new, u)


def crossing_time(state: VehicleState, u: float, target: float, dt: float):
    """Time within [0, dt] at which the position reaches ``target``, or None."""
    x, v = state.position, state.velocity
    if x >= target:
        return 0.0
    # 0.5 u t^2 + v t - (target - x) = 0
    gap = target - x
    if abs(u) < 1e-12:
        if v <= 0:
            return None
        t = gap / v
    else:
        disc = v * v + 2.0 * u * gap
        if disc < 0:
            return None
        t = (-v + disc ** 0.5) / u
        if t < 0:
            return None
    return t if t <= dt + 1e-12 else None


def predict_constant_velocity(state: VehicleState, steps: int, dt: float,
                              start_time: float = 0.0) -> PredictedTrajectory:
    if steps < 1:
        raise ValueError("steps must be >= 1")
    x, v = state.position, state.velocity
    states = [VehicleState(x + v * dt * h, v, 0.0) for h in range(steps + 1)]
    return PredictedTrajectory(start_time, dt, states)


def rollout(state: VehicleState, controls, dt: float, start_time: float = 0.0) -> PredictedTrajectory:
    """Open-loop exact rollout of a control sequence (no rest clamping)."""
    states = [state]
    for u in controls:
        states.append(step(states[-1], float(u), dt))
    return PredictedTrajectory(start_time, dt, states)
