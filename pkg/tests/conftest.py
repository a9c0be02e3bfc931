import numpy as np
import pytest

from mergesim.core import RoadId, ScenarioConfig, VehicleClass, VehicleRecord, VehicleState


def make_rec(vid, cls, road, x, v, u=0.0):
    cls = VehicleClass(cls) if isinstance(cls, str) else cls
    return VehicleRecord(vid, cls, RoadId(road), VehicleState(x, v, u), 0.0)


def random_snapshot(rng, n_max=10, penetration=None, min_gap=8.0, x_max=300.0):
    """SZ snapshot with per-road spacing of at least ``min_gap``."""
    pen = rng.uniform(0.2, 0.8) if penetration is None else penetration
    n = int(rng.integers(1, n_max + 1))
    n1 = int(rng.integers(0, n + 1))
    recs, vid = [], 1
    for road, count in ((RoadId.MAIN, n1), (RoadId.SIDE, n - n1)):
        xs = np.sort(rng.uniform(0.0, x_max - 1.0, size=count))
        for k in range(1, count):
            xs[k] = max(xs[k], xs[k - 1] + min_gap)
        for x in xs:
            if x >= x_max:
                continue
            cls = VehicleClass.CAV if rng.random() < pen else VehicleClass.HDV
            recs.append(make_rec(vid, cls, road, float(x), float(rng.uniform(16.7, 27.8))))
            vid += 1
    return recs


@pytest.fixture
def cfg():
    return ScenarioConfig()


@pytest.fixture
def rec():
    return make_rec


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
