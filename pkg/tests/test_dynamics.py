import pytest
from hypothesis import given, strategies as st

from mergesim.core import VehicleState
from mergesim.dynamics import crossing_time, predict_constant_velocity, rollout, step


def test_step_examples():
    s = step(VehicleState(0.0, 20.0), 0.0, 0.1)
    assert (s.position, s.velocity) == pytest.approx((2.0, 20.0))
    s = step(VehicleState(0.0, 20.0), 2.0, 0.1)
    assert (s.position, s.velocity) == pytest.approx((2.01, 20.2))


def test_step_clamps_at_rest():
    s = step(VehicleState(0.0, 0.1), -5.886, 0.1, clamp_at_rest=True)
    assert s.velocity == 0.0
    assert s.position == pytest.approx(0.1 ** 2 / (2 * 5.886))
    # without the clamp the vehicle reverses
    assert step(VehicleState(0.0, 0.1), -5.886, 0.1).velocity < 0


@given(x=st.floats(-100, 500), v=st.floats(0, 40), u=st.floats(-6, 4), dt=st.floats(0.01, 0.5))
def test_two_half_steps_equal_one(x, v, u, dt):
    whole = step(VehicleState(x, v), u, dt)
    half = step(step(VehicleState(x, v), u, dt / 2), u, dt / 2)
    assert half.position == pytest.approx(whole.position, abs=1e-9)
    assert half.velocity == pytest.approx(whole.velocity, abs=1e-12)


def test_predict_constant_velocity():
    tr = predict_constant_velocity(VehicleState(100.0, 10.0), 3, 0.1)
    assert [s.position for s in tr.states] == pytest.approx([100.0, 101.0, 102.0, 103.0])
    still = predict_constant_velocity(VehicleState(5.0, 0.0), 4, 0.1)
    assert {s.position for s in still.states} == {5.0}
    assert len(predict_constant_velocity(VehicleState(0.0, 1.0), 1, 0.1).states) == 2
    with pytest.raises(ValueError):
        predict_constant_velocity(VehicleState(0.0, 1.0), 0, 0.1)


def test_rollout_matches_repeated_steps():
    tr = rollout(VehicleState(0.0, 20.0), [1.0, -1.0, 0.5], 0.1)
    s = VehicleState(0.0, 20.0)
    for u in (1.0, -1.0, 0.5):
        s = step(s, u, 0.1)
    assert tr.states[-1] == s and len(tr.states) == 4


def test_crossing_time():
    assert crossing_time(VehicleState(399.0, 20.0), 0.0, 400.0, 0.1) == pytest.approx(0.05)
    assert crossing_time(VehicleState(390.0, 20.0), 0.0, 400.0, 0.1) is None
    assert crossing_time(VehicleState(401.0, 20.0), 0.0, 400.0, 0.1) == 0.0
    t = crossing_time(VehicleState(399.0, 10.0), 2.0, 400.0, 0.1)
    assert 399.0 + 10 * t + t * t == pytest.approx(400.0)
