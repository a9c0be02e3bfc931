"""Affine-in-control constraint rows from the barrier and Lyapunov conditions.

Class-K functions are linear, alpha_q(b) = k_q * b. State arguments may carry
numpy arrays so one call builds a row per horizon step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ScenarioConfig, VehicleState

GEQ0 = "GEQ0"
LEQ0 = "LEQ0"


class MisroutedConstraint(ValueError):
    """The merge-behind HOCBF was requested for a vehicle that is not a CAV."""


@dataclass(frozen=True)
class LinearControlConstraint:
    a_u: object
    a_e: object
    c: object
    sense: str
    label: str

    def residual(self, u, e=0.0):
        """Signed residual, non-negative when satisfied."""
        val = self.a_u * u + self.a_e * e + self.c
        return val if self.sense == GEQ0 else -val

    def as_geq(self) -> "LinearControlConstraint":
        if self.sense == GEQ0:
            return self
        return LinearControlConstraint(-self.a_u, -self.a_e, -self.c, GEQ0, self.label)


def b_speed_max(state: VehicleState, cfg: ScenarioConfig):
    return cfg.v_max - state.velocity


def b_speed_min(state: VehicleState, cfg: ScenarioConfig):
    return state.velocity - cfg.v_min


def b_rear_end(state_i: VehicleState, state_ip: VehicleState, cfg: ScenarioConfig):
    return state_ip.position - state_i.position - cfg.phi * state_i.velocity - cfg.delta


def b_merge_ahead(state_i: VehicleState, state_plus: VehicleState, cfg: ScenarioConfig):
    x, v = state_i.position, state_i.velocity
    return state_plus.position - x - cfg.Phi(x) * v - cfg.delta


def b_merge_behind(state_i: VehicleState, state_minus: VehicleState, cfg: ScenarioConfig):
    xm, vm = state_minus.position, state_minus.velocity
    return state_i.position - xm - cfg.Phi(xm) * vm - cfg.delta


def cbf_speed_limits(state: VehicleState, cfg: ScenarioConfig) -> tuple:
    v = state.velocity
    one = np.ones_like(v) if isinstance(v, np.ndarray) else 1.0
    return (
        LinearControlConstraint(-one, 0.0 * one, cfg.k1 * (cfg.v_max - v), GEQ0, "speed_max"),
        LinearControlConstraint(one, 0.0 * one, cfg.k2 * (v - cfg.v_min), GEQ0, "speed_min"),
    )


def cbf_rear_end(state_i: VehicleState, state_ip: VehicleState, cfg: ScenarioConfig,
                 a_ip=0.0, dt: float = 0.0) -> LinearControlConstraint:
    """Rear-end CBF row; with ``dt`` > 0 the zero-order-hold step is exact.

    Over one held step b3 gains 0.5 dt^2 (a_ip - u_i) on top of dt * db3/dt,
    so the sampled condition b3(t + dt) >= (1 - k3 dt) b3(t) becomes
    db3/dt + k3 b3 + 0.5 dt (a_ip - u_i) >= 0.
    """
    v = state_i.velocity
    one = np.ones_like(v) if isinstance(v, np.ndarray) else 1.0
    c = (state_ip.velocity - v) + cfg.k3 * b_rear_end(state_i, state_ip, cfg) + 0.5 * dt * a_ip
    return LinearControlConstraint(-(cfg.phi + 0.5 * dt) * one, 0.0 * one, c, GEQ0, "rear_end")


def cbf_merge_ahead(state_i: VehicleState, state_plus: VehicleState, cfg: ScenarioConfig,
                    a_plus=0.0, dt: float = 0.0) -> LinearControlConstraint:
    """Merge-ahead CBF row; ``dt`` > 0 adds the held-step term as in cbf_rear_end."""
    # d/dt[Phi(x_i) v_i] = (phi/L) v_i^2 + Phi(x_i) u_i
    x, v = state_i.position, state_i.velocity
    c = state_plus.velocity - v - (cfg.phi / cfg.L) * v * v + cfg.k4 * b_merge_ahead(state_i, state_plus, cfg)
    c = c + 0.5 * dt * a_plus
    return LinearControlConstraint(-(cfg.Phi(x) + 0.5 * dt), 0.0 * c, c, GEQ0, "merge_ahead")


def merge_behind_psi1(state_i: VehicleState, state_minus: VehicleState, u_minus, cfg: ScenarioConfig):
    """First HOCBF level: db5/dt + k5 * b5."""
    xm, vm = state_minus.position, state_minus.velocity
    b5_dot = state_i.velocity - vm - (cfg.phi / cfg.L) * vm * vm - cfg.Phi(xm) * u_minus
    return b5_dot + cfg.k5 * b_merge_behind(state_i, state_minus, cfg)


def hocbf_merge_behind(state_i: VehicleState, state_minus: VehicleState, u_minus, udot_minus,
                       cfg: ScenarioConfig, minus_is_cav: bool = True) -> LinearControlConstraint:
    """d(psi1)/dt + k6 * psi1 >= 0 for the order-2 merge-behind barrier.

    d(psi1)/dt = u_i - u_m - 3 (phi/L) v_m u_m - Phi(x_m) udot_m + k5 * db5/dt
    """
    if not minus_is_cav:
        raise MisroutedConstraint("merge-behind HOCBF applies only to a CAV follower")
    xm, vm = state_minus.position, state_minus.velocity
    g = cfg.phi / cfg.L
    b5_dot = state_i.velocity - vm - g * vm * vm - cfg.Phi(xm) * u_minus
    psi1 = b5_dot + cfg.k5 * b_merge_behind(state_i, state_minus, cfg)
    c = -u_minus - 3.0 * g * vm * u_minus - cfg.Phi(xm) * udot_minus + cfg.k5 * b5_dot + cfg.k6 * psi1
    one = np.ones_like(c) if isinstance(c, np.ndarray) else 1.0
    return LinearControlConstraint(one, 0.0 * one, c, GEQ0, "merge_behind")


def clf_track_speed(state: VehicleState, v_ref, cfg: ScenarioConfig) -> LinearControlConstraint:
    err = state.velocity - v_ref
    one = np.ones_like(err) if isinstance(err, np.ndarray) else 1.0
    return LinearControlConstraint(2.0 * err, -one, cfg.c3 * err * err, LEQ0, "clf")
