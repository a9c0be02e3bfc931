"""Brute-force references for auditing the coordinator and the reference trajectories.

Deliberately independent of ``sequencing`` and ``trajectory``: everything here
is recomputed from the definitions using only the core record types.
"""

from __future__ import annotations

import itertools
import math
from typing import Mapping, Sequence

import numpy as np

from .core import ScenarioConfig

MAX_ORACLE_VEHICLES = 12


def _violates(cav, follower, cfg: ScenarioConfig) -> bool:
    # CAV merging ahead of a close HDV on the other road
    gap = cav.x - follower.x - cfg.phi * follower.x / cfg.L * follower.v - cfg.delta
    return cav.is_cav and not follower.is_cav and gap < 0


def _safe(order: Sequence, table: Mapping, cfg: ScenarioConfig) -> bool:
    for k, vid in enumerate(order):
        me = table[vid]
        if not me.is_cav:
            continue
        for later in order[k + 1:]:
            other = table[later]
            if other.road != me.road:
                if _violates(me, other, cfg):
                    return False
                break
    return True


def brute_force_best_safe(road1: Sequence, road2: Sequence, table: Mapping, cfg: ScenarioConfig):
    """(minimum disruption, set of all minimising safe interleavings)."""
    n1, n2 = len(road1), len(road2)
    if n1 + n2 > MAX_ORACLE_VEHICLES:
        raise ValueError(f"oracle limited to {MAX_ORACLE_VEHICLES} vehicles")
    everyone = list(road1) + list(road2)
    s0 = sorted(everyone, key=lambda v: (cfg.L - table[v].x, int(table[v].road), v))
    best, witnesses = math.inf, set()
    for picks in itertools.combinations(range(n1 + n2), n1):
        it1, it2 = iter(road1), iter(road2)
        chosen = set(picks)
        order = tuple(next(it1) if p in chosen else next(it2) for p in range(n1 + n2))
        if not _safe(order, table, cfg):
            continue
        d = sum(a != b for a, b in zip(order, s0))
        if d < best:
            best, witnesses = d, {order}
        elif d == best:
            witnesses.add(order)
    return best, witnesses


def fixed_time_min_energy(x0, v0, x_f, v_f, T):
    """Coefficients (c1, c2) and cost of the fixed-horizon optimum u = c1 t + c2.

    ``T`` may be an array.
    """
    T = np.asarray(T, dtype=float)
    dv = v_f - v0
    dx = (x_f - x0) - v0 * T
    # [T, T^2/2; T^2/2, T^3/6] [c2, c1]^T = [dv, dx]^T
    det = T * T ** 3 / 6.0 - (T * T / 2.0) ** 2
    c2 = (dv * T ** 3 / 6.0 - dx * T * T / 2.0) / det
    c1 = (T * dx - T * T / 2.0 * dv) / det
    cost = 0.5 * (c1 * c1 * T ** 3 / 3.0 + c1 * c2 * T * T + c2 * c2 * T)
    return c1, c2, cost


def _min_speed(v0, c1, c2, T):
    """Minimum of v0 + c2 t + c1 t^2 / 2 over [0, T]."""
    lo = np.minimum(v0, v0 + c2 * T + 0.5 * c1 * T * T)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_star = np.where(c1 > 0, -c2 / c1, -1.0)
    inside = (t_star > 0) & (t_star < T)
    v_star = v0 + c2 * t_star + 0.5 * c1 * t_star * t_star
    return np.where(inside, np.minimum(lo, v_star), lo)


def direct_trajectory_oracle(x0, v0, x_f, v_f, t_grid_step=1e-3, T_max=120.0, v_floor=0.0):
    """(best cost, best terminal time) by scanning the fixed-time optimum over a grid.

    Horizons whose optimal profile would dip below ``v_floor`` (reversing) are
    discarded; without that filter long horizons win by backing up.
    """
    if t_grid_step > 1e-3 + 1e-15:
        raise ValueError("grid step must not exceed 1e-3 s")
    T = np.arange(1, int(round(T_max / t_grid_step)) + 1) * t_grid_step
    c1, c2, cost = fixed_time_min_energy(x0, v0, x_f, v_f, T)
    feasible = _min_speed(v0, c1, c2, T) >= v_floor - 1e-9
    if not feasible.any():
        return math.inf, math.nan
    cost = np.where(feasible, cost, np.inf)
    k = int(np.argmin(cost))
    return float(cost[k]), float(T[k])
