import pytest

from mergesim.az import (AggressivenessEstimate, AzDecision, STOP_TOLERANCE, allowed_speed, az_decide,
                         can_still_stop, estimate_aggressiveness, execute_yield, stop_point, yield_law)
from mergesim.core import VehicleState
from conftest import make_rec


def trace(v_of_k, u, n=10, x0=320.0, dt=0.1):
    out, x = [], x0
    for k in range(n):
        v = v_of_k(k)
        out.append((k * dt, VehicleState(x, v, u), u))
        x += v * dt
    return out


def test_decelerating_hdv_scores_low(cfg):
    a = estimate_aggressiveness(trace(lambda k: 5.0 - 0.1 * k, -1.0), cfg)
    assert a.value < 0.15


def test_hdv_at_envelope_accelerating_scores_one(cfg):
    d = cfg.L - 320.0
    v = allowed_speed(d, cfg)
    a = estimate_aggressiveness([(0.0, VehicleState(320.0, v, cfg.u_max), cfg.u_max)], cfg)
    assert a.value == pytest.approx(1.0)


def test_single_rest_sample_scores_zero(cfg):
    a = estimate_aggressiveness([(0.0, VehicleState(320.0, 0.0), 0.0)], cfg)
    assert a.value == 0.0


def test_estimate_validation(cfg):
    with pytest.raises(ValueError):
        estimate_aggressiveness([], cfg)
    with pytest.raises(ValueError):
        AggressivenessEstimate(1.2, 0.0)


def test_az_decide(cfg):
    cav = make_rec(1, "CAV", 1, 330.0, 15.0)
    hdv = make_rec(2, "HDV", 2, 320.0, 20.0)
    hot = AggressivenessEstimate(0.9, 0.0)
    assert az_decide(cav, None, hot, cfg) is AzDecision.MERGE_AHEAD
    assert az_decide(cav, make_rec(3, "CAV", 2, 320.0, 20.0), hot, cfg) is AzDecision.MERGE_AHEAD
    assert az_decide(cav, hdv, AggressivenessEstimate(0.3, 0.0), cfg) is AzDecision.MERGE_AHEAD
    assert az_decide(cav, hdv, hot, cfg) is AzDecision.YIELD
    fast = make_rec(1, "CAV", 1, 380.0, 25.0)
    assert not can_still_stop(fast.state, cfg)
    assert az_decide(fast, hdv, hot, cfg) is AzDecision.MERGE_AHEAD


def test_yield_law_stops_at_line(cfg):
    x_stop = stop_point(cfg)
    law = yield_law(VehicleState(x_stop - 60.0, 10.0), 0.0, cfg)
    assert law.b == pytest.approx(-10.0 / 9.0)
    assert law.a == pytest.approx(2 * 10.0 / 18.0 ** 2)
    # closed loop with per-tick re-planning
    s, t = VehicleState(x_stop - 60.0, 10.0), 0.0
    for _ in range(400):
        u = max(execute_yield(s, t, cfg), cfg.u_min)
        v = max(s.velocity + u * cfg.T_d, 0.0)
        s = VehicleState(s.position + 0.5 * (s.velocity + v) * cfg.T_d, v)
        t += cfg.T_d
    assert s.velocity == pytest.approx(0.0, abs=0.06)
    assert abs(s.position - x_stop) < STOP_TOLERANCE


def test_yield_law_holds_at_rest_and_brakes_when_too_fast(cfg):
    assert execute_yield(VehicleState(stop_point(cfg), 0.0), 3.0, cfg) == 0.0
    assert execute_yield(VehicleState(stop_point(cfg) - 5.0, 20.0), 0.0, cfg) == cfg.u_min
