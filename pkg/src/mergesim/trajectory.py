"""Minimum-energy reference trajectories for the double integrator.

Both reference problems minimise the integral of u^2/2 with a free terminal
time and fixed terminal position/speed. The costate analysis gives a control
linear in time, and free-time transversality makes the Hamiltonian vanish
along the whole arc, so u(t)^2 = 2 a v(t). Hence sqrt(v) is affine in time,
which yields the terminal time in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class NoFiniteSolution(ValueError):
    pass


class InfeasibleStop(ValueError):
    pass


@dataclass(frozen=True)
class LinearControlLaw:
    """u(t) = a (t - t0) + b on [t0, t_f]; zero afterwards (speed held)."""

    a: float
    b: float
    t0: float
    t_f: float
    x0: float = 0.0
    v0: float = 0.0

    @property
    def duration(self) -> float:
        return self.t_f - self.t0

    def _tau(self, t):
        return min(max(t - self.t0, 0.0), self.duration)

    def u(self, t) -> float:
        if t > self.t_f:
            return 0.0
        return self.a * self._tau(t) + self.b

    def v(self, t) -> float:
        s = self._tau(t)
        return self.v0 + self.b * s + 0.5 * self.a * s * s

    def x(self, t) -> float:
        s = self._tau(t)
        base = self.x0 + self.v0 * s + 0.5 * self.b * s * s + self.a * s ** 3 / 6.0
        return base + self.v(t) * max(t - self.t_f, 0.0)

    def cost(self) -> float:
        """Integral of u^2/2 over [t0, t_f]."""
        T, a, b = self.duration, self.a, self.b
        return 0.5 * (a * a * T ** 3 / 3.0 + a * b * T * T + b * b * T)


def retain_law(x0: float, v0: float, t0: float) -> LinearControlLaw:
    return LinearControlLaw(0.0, 0.0, t0, t0, x0, v0)


def _free_time_candidates(d: float, v0: float, v_f: float):
    p, q = math.sqrt(v0), math.sqrt(v_f)
    # monotone branch: sqrt(v) goes p -> q
    T1 = 3.0 * d / (v0 + p * q + v_f)
    yield T1, (q - p) / T1
    # through-rest branch: sqrt(v) goes p -> -q (stops, then re-accelerates)
    if p > 0 and q > 0:
        T2 = 3.0 * d / (v0 - p * q + v_f)
        yield T2, -(q + p) / T2


def solve_energy_optimal(x0: float, v0: float, x_f: float, v_f: float,
                         t0: float = 0.0, T_max: float = 120.0) -> LinearControlLaw:
    d = x_f - x0
    if d <= 0:
        raise NoFiniteSolution("terminal position must lie ahead")
    if v0 < 0 or v_f < 0:
        raise ValueError("speeds must be non-negative")
    if v0 == 0 and v_f == 0:
        raise NoFiniteSolution("rest-to-rest has no finite free-time optimum")
    best = None
    for T, m in _free_time_candidates(d, v0, v_f):
        if not 0 < T <= T_max:
            continue
        cost = 2.0 * m * m * d
        if best is None or cost < best[0]:
            best = (cost, T, m)
    if best is None:
        raise NoFiniteSolution(f"no terminal time within (0, {T_max}] s")
    _, T, m = best
    return LinearControlLaw(2.0 * m * m, 2.0 * m * math.sqrt(v0), t0, t0 + T, x0, v0)


def constant_accel_law(x0: float, v0: float, x_f: float, v_f: float,
                       u_min: float, u_max: float, t0: float = 0.0) -> LinearControlLaw:
    """Constant control reaching ``v_f`` over the distance, clamped to the box."""
    d = max(x_f - x0, 1e-9)
    u = min(max((v_f * v_f - v0 * v0) / (2.0 * d), u_min), u_max)
    if abs(u) < 1e-12:
        T = d / v0 if v0 > 0 else 0.0
    else:
        disc = v0 * v0 + 2.0 * u * d
        T = (-v0 + math.sqrt(disc)) / u if disc >= 0 else -v0 / u
    return LinearControlLaw(0.0, u, t0, t0 + T, x0, v0)


def reference_law(x0, v0, x_f, v_f, cfg, t0=0.0) -> LinearControlLaw:
    """P(v_f) with graceful degradation to the constant-control profile."""
    try:
        return solve_energy_optimal(x0, v0, x_f, v_f, t0, cfg.T_max)
    except NoFiniteSolution:
        return constant_accel_law(x0, v0, x_f, v_f, cfg.u_min, cfg.u_max, t0)


def solve_yield_stop(x0: float, v0: float, x_stop: float, t0: float = 0.0,
                     u_min: float | None = None) -> LinearControlLaw:
    """Minimum-energy stop exactly at ``x_stop``; the deceleration ramps to zero.

    With T the manoeuvre time: v0 = a T^2 / 2 and d = v0 T / 3, so
    T = 3 d / v0, a = 2 v0 / T^2, b = -2 v0 / T.
    """
    d = x_stop - x0
    if v0 <= 0.0:
        return LinearControlLaw(0.0, 0.0, t0, t0, x0, 0.0)
    if d <= 0:
        raise InfeasibleStop("already at or past the stop point while moving")
    T = 3.0 * d / v0
    a = 2.0 * v0 / (T * T)
    b = -2.0 * v0 / T
    if u_min is not None and b < u_min:
        raise InfeasibleStop(f"stop needs {b:.3f} m/s^2 below u_min={u_min}")
    return LinearControlLaw(a, b, t0, t0 + T, x0, v0)


def max_speed_to_stop(distance: float, u_min: float) -> float:
    if u_min >= 0:
        raise ValueError("u_min must be negative")
    return math.sqrt(2.0 * -u_min * max(distance, 0.0))
