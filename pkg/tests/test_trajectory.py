import math

import pytest

from mergesim.oracle import direct_trajectory_oracle
from mergesim.trajectory import (InfeasibleStop, LinearControlLaw, NoFiniteSolution, constant_accel_law,
                                 max_speed_to_stop, reference_law, retain_law, solve_energy_optimal,
                                 solve_yield_stop)


def integrate(law: LinearControlLaw, n=20000):
    """Numerical forward integration of u(t) (midpoint rule)."""
    x, v = law.x0, law.v0
    h = law.duration / n
    for k in range(n):
        u = law.u(law.t0 + (k + 0.5) * h)
        x += v * h + 0.5 * u * h * h
        v += u * h
    return x, v


def test_cruise_is_zero_control():
    law = solve_energy_optimal(0.0, 20.0, 300.0, 20.0)
    assert law.a == 0.0 and law.b == 0.0
    assert law.duration == pytest.approx(15.0)


def test_accelerating_instance_against_oracle():
    law = solve_energy_optimal(0.0, 20.0, 300.0, 30.0)
    assert law.x(law.t_f) == pytest.approx(300.0, abs=1e-6)
    assert law.v(law.t_f) == pytest.approx(30.0, abs=1e-6)
    cost, T = direct_trajectory_oracle(0.0, 20.0, 300.0, 30.0)
    assert law.cost() == pytest.approx(cost, rel=1e-3)
    assert law.duration == pytest.approx(T, abs=2e-3)


def test_transversality_at_terminal_time():
    """Hamiltonian at t_f vanishes: u(t_f)^2 / 2 = a v_f for the free-time optimum."""
    law = solve_energy_optimal(0.0, 20.0, 300.0, 30.0)
    assert law.b > 0
    assert law.u(law.t_f) == pytest.approx(math.sqrt(2.0 * law.a * 30.0))


def test_integration_reproduces_boundary():
    law = solve_energy_optimal(10.0, 25.0, 300.0, 12.0)
    x, v = integrate(law)
    assert (x, v) == pytest.approx((300.0, 12.0), abs=1e-6)


def test_degenerate_inputs():
    with pytest.raises(NoFiniteSolution):
        solve_energy_optimal(0.0, 0.0, 10.0, 0.0)
    with pytest.raises(NoFiniteSolution):
        solve_energy_optimal(10.0, 5.0, 5.0, 5.0)


def test_reference_law_falls_back_to_constant_control(cfg):
    # rest to rest has no free-time optimum; the fallback holds still
    law = reference_law(0.0, 0.0, 100.0, 0.0, cfg)
    assert (law.a, law.b, law.duration) == (0.0, 0.0, 0.0)
    ca = constant_accel_law(0.0, 20.0, 100.0, 10.0, cfg.u_min, cfg.u_max)
    assert ca.b == pytest.approx((100 - 400) / 200.0)
    assert ca.v(ca.t_f) == pytest.approx(10.0)


def test_retain_law_holds_speed():
    law = retain_law(5.0, 12.0, 1.0)
    assert law.u(3.0) == 0.0 and law.x(3.0) == pytest.approx(29.0)


def test_yield_stop_examples(cfg):
    # T = 3 d / v0; verified by forward integration
    law = solve_yield_stop(0.0, 20.0, 60.0, u_min=cfg.u_min)
    assert law.duration == pytest.approx(9.0)
    assert law.b == pytest.approx(-40.0 / 9.0)
    assert law.a == pytest.approx(40.0 / 81.0)
    law = solve_yield_stop(0.0, 10.0, 60.0, u_min=cfg.u_min)
    assert law.duration == pytest.approx(18.0)
    assert law.b == pytest.approx(-10.0 / 9.0)
    x, v = integrate(law)
    assert x == pytest.approx(60.0, abs=1e-6) and v == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(InfeasibleStop):
        solve_yield_stop(0.0, 30.0, 10.0, u_min=cfg.u_min)
    rest = solve_yield_stop(60.0, 0.0, 60.0)
    assert rest.duration == 0.0 and rest.u(0.0) == 0.0


def test_yield_stop_matches_oracle():
    law = solve_yield_stop(0.0, 20.0, 60.0)
    _, T = direct_trajectory_oracle(0.0, 20.0, 60.0, 0.0)
    assert law.duration == pytest.approx(T, abs=1e-3)


def test_max_speed_to_stop(cfg):
    assert max_speed_to_stop(0.0, cfg.u_min) == 0.0
    assert max_speed_to_stop(33.98, -5.886) == pytest.approx(20.0, abs=1e-2)
    assert max_speed_to_stop(100.0, -5.886) == pytest.approx(34.31, abs=1e-2)
    with pytest.raises(ValueError):
        max_speed_to_stop(10.0, 1.0)
