import math

import numpy as np
import pytest

from mergesim.core import HdvParams, ScenarioConfig, VehicleClass, RoadId, Zone
from mergesim.hdv import effective_leader, effective_params, hdv_control, idm_accel
from mergesim.sim import World, run_world
from conftest import make_rec


def idm_reference(v, v0, s, dv, a=1.4, b=2.0, T=1.5, s0=2.0):
    s_star = s0 + max(0.0, v * T + v * dv / (2 * math.sqrt(a * b)))
    return a * (1 - (v / v0) ** 4 - (s_star / s) ** 2)


def test_constant_speed_equilibrium(cfg):
    me = make_rec(1, "HDV", 1, 0.0, 20.0)
    assert hdv_control(me, None, HdvParams(model="ConstantSpeed", desired_speed=20.0), cfg) == 0.0


def test_free_flow_equilibrium(cfg):
    me = make_rec(1, "HDV", 1, 0.0, 20.0)
    far = make_rec(2, "HDV", 1, 5000.0, 20.0)
    assert hdv_control(me, far, HdvParams(desired_speed=20.0), cfg) == pytest.approx(0.0, abs=1e-4)
    assert hdv_control(me, None, HdvParams(desired_speed=20.0), cfg) == 0.0


@pytest.mark.parametrize("v,s,dv", [(20.0, 32.0, 0.0), (15.0, 10.0, 3.0), (25.0, 60.0, -4.0), (5.0, 4.0, 1.0)])
def test_idm_cross_check(v, s, dv):
    assert idm_accel(v, 25.0, s, dv, HdvParams()) == pytest.approx(idm_reference(v, 25.0, s, dv))


def test_idm_at_desired_gap_equals_minus_a():
    p = HdvParams(desired_speed=20.0)
    s_star = p.min_gap_s0 + 20.0 * p.headway_T
    assert idm_accel(20.0, 20.0, s_star, 0.0, p) == pytest.approx(-p.accel_a)


def test_aggressive_scaling():
    p = effective_params(HdvParams(model="Aggressive", desired_speed=20.0, aggression=0.5))
    assert p.desired_speed == pytest.approx(22.0)
    assert p.headway_T == pytest.approx(0.75) and p.min_gap_s0 == pytest.approx(1.0)


def test_output_bounded(cfg):
    rng = np.random.default_rng(0)
    for _ in range(300):
        me = make_rec(1, "HDV", 1, 0.0, float(rng.uniform(0, 30)))
        lead = make_rec(2, "HDV", 1, float(rng.uniform(0.5, 200)), float(rng.uniform(0, 30)))
        for model in ("ConstantSpeed", "CarFollowing", "Aggressive"):
            u = hdv_control(me, lead, HdvParams(model=model, desired_speed=25.0, aggression=0.7), cfg)
            assert cfg.u_min <= u <= cfg.u_max


def test_cross_road_projection_only_in_az(cfg):
    me = make_rec(1, "HDV", 1, 320.0, 20.0)
    me.zone = Zone.AZ
    other = make_rec(2, "CAV", 2, 330.0, 20.0)
    other.zone = Zone.AZ
    assert effective_leader(me, [me, other], cfg) is other
    assert effective_leader(me, [me, other], cfg, ignore={2}) is None
    other.zone = Zone.SZ
    assert effective_leader(me, [me, other], cfg) is None


def test_hdv_platoon_never_collides():
    """Ten minutes of all-HDV arrivals: same-road gaps stay positive at every sample."""
    cfg = ScenarioConfig().replace(penetration_rate=0.0, n_vehicles=200, seed=4)
    res = run_world(World(cfg, keep_traces=True))
    assert res.records[-1].t_entry > 540.0
    roads = {r.id: r.road for r in res.records}
    by_t = {}
    for vid, tr in res.traces.items():
        for t, s in tr:
            if s.position < cfg.L:
                by_t.setdefault((round(t, 6), roads[vid]), []).append(s.position)
    for xs in by_t.values():
        xs.sort()
        assert all(b - a > 0 for a, b in zip(xs, xs[1:]))
