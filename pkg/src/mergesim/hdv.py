"""Longitudinal human-driver models.

The car-following law is the intelligent driver model. Gaps are net of the
minimum centre-to-centre distance delta, so s = z - delta.
"""

from __future__ import annotations

import math
from typing import Iterable, Optional

from .core import HdvParams, ScenarioConfig, VehicleRecord, Zone

KP_CONSTANT_SPEED = 0.5


def effective_params(params: HdvParams) -> HdvParams:
    """Aggressive drivers shorten headway and standstill gap and drive faster."""
    if params.model != "Aggressive":
        return params
    g = params.aggression
    return HdvParams(model="CarFollowing", desired_speed=params.desired_speed * (1.0 + 0.2 * g),
                     headway_T=params.headway_T * (1.0 - g), min_gap_s0=params.min_gap_s0 * (1.0 - g),
                     accel_a=params.accel_a, decel_b=params.decel_b, aggression=g,
                     seed_offset=params.seed_offset)


def idm_accel(v: float, v0: float, gap: Optional[float], dv: float, p: HdvParams) -> float:
    """Raw IDM law; ``gap`` None means free road."""
    free = 1.0 - (v / v0) ** 4 if v0 > 0 else -1.0
    if gap is None:
        return p.accel_a * free
    if gap <= 0:
        return -math.inf
    s_star = p.min_gap_s0 + max(0.0, v * p.headway_T + v * dv / (2.0 * math.sqrt(p.accel_a * p.decel_b)))
    return p.accel_a * (free - (s_star / gap) ** 2)


def hdv_control(me: VehicleRecord, leader: Optional[VehicleRecord], params: HdvParams,
                cfg: ScenarioConfig) -> float:
    if params.model == "ConstantSpeed":
        u = KP_CONSTANT_SPEED * (params.desired_speed - me.v)
    else:
        p = effective_params(params)
        if leader is None:
            u = idm_accel(me.v, p.desired_speed, None, 0.0, p)
        else:
            gap = leader.x - me.x - cfg.delta
            u = idm_accel(me.v, p.desired_speed, gap, me.v - leader.v, p)
    return min(max(u, cfg.u_min), cfg.u_max)


def effective_leader(me: VehicleRecord, others: Iterable[VehicleRecord], cfg: ScenarioConfig,
                     ignore=frozenset()) -> Optional[VehicleRecord]:
    """Nearest vehicle ahead by remaining distance that this driver reacts to.

    Same-road vehicles always count. Inside the AZ, vehicles of the other road
    are projected onto this lane once they are in the AZ too, or already past
    M. Downstream every vehicle shares one lane. Ids in ``ignore`` (CAVs
    holding at the stop line) are not projected.
    """
    best = None
    for o in others:
        if o is me or o.x <= me.x and not (o.x == me.x and (int(o.road), o.id) < (int(me.road), me.id)):
            continue
        if o.road is not me.road:
            if me.zone is Zone.SZ or o.zone is Zone.SZ or o.id in ignore:
                continue
        if best is None or o.x < best.x:
            best = o
    return best
