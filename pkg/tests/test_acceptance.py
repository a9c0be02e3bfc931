"""Acceptance suite: one pass/fail line per criterion, printed in the terminal summary.

Criterion 7 runs 120 full simulations (about five minutes on one core).
"""

import math
import statistics
import time

import numpy as np
import pytest

from mergesim import sim
from mergesim.core import RoadId, ScenarioConfig
from mergesim.metrics import export
from mergesim.oracle import brute_force_best_safe, direct_trajectory_oracle
from mergesim.sequencing import (_road_lists, constructive_safe_sequence, coordinate, disruption,
                                 enumerate_safe_sequences, is_safe, sdf_sequence, select_optimal)
from mergesim.trajectory import solve_energy_optimal, solve_yield_stop
from conftest import ACCEPTANCE_LINES, random_snapshot


def report(k, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    print(ACCEPTANCE_LINES[-1])
    assert ok, detail


def within_road_order(order, table):
    for road in RoadId:
        xs = [table[v].x for v in order if table[v].road is road]
        if any(a < b for a, b in zip(xs, xs[1:])):
            return False
    return True


@pytest.fixture(scope="module")
def snapshots():
    rng = np.random.default_rng(2024)
    pens = (0.2, 0.4, 0.6, 0.8)
    return [random_snapshot(rng, n_max=10, penetration=pens[k % 4]) for k in range(1000)]


def test_c01_safe_sequence_soundness(snapshots, cfg):
    bad = 0
    start = time.perf_counter()
    for recs in snapshots:
        table = {r.id: r for r in recs}
        out = coordinate(recs, cfg)
        if not (is_safe(out.sequence, table, cfg) and within_road_order(out.sequence.order, table)):
            bad += 1
    elapsed = time.perf_counter() - start
    report(1, bad == 0 and elapsed < 10.0,
           f"{len(snapshots) - bad}/{len(snapshots)} snapshots safe and order-preserving in {elapsed:.2f} s (< 10 s)")


def test_c02_constructive_fallback_safe(snapshots, cfg):
    n = bad = 0
    for recs in snapshots:
        if not any(r.is_cav for r in recs):
            continue
        n += 1
        table = {r.id: r for r in recs}
        s = constructive_safe_sequence(sdf_sequence(recs), table, cfg)
        if not (is_safe(s, table, cfg) and within_road_order(s.order, table)):
            bad += 1
    report(2, bad == 0, f"{n - bad}/{n} snapshots with a CAV: constructive sequence safe")


def test_c03_disruption_optimality(cfg):
    rng = np.random.default_rng(7)
    mismatches = 0
    for _ in range(500):
        recs = random_snapshot(rng, n_max=10, min_gap=5.0)
        table = {r.id: r for r in recs}
        s0 = sdf_sequence(recs)
        r1, r2 = _road_lists(s0, table)
        best, _ = brute_force_best_safe(r1, r2, table, cfg)
        chosen = select_optimal(enumerate_safe_sequences(r1, r2, table, cfg), s0, table)
        if disruption(chosen, s0) != best:
            mismatches += 1
    report(3, mismatches == 0, f"{500 - mismatches}/500 instances match the brute-force minimum disruption")


def test_c04_cbf_forward_invariance():
    out = sim.run_following(duration=60.0, v_mid=20.0, amp=5.0, period=10.0)
    b3, b1, b2 = min(out["b3"]), min(out["b1"]), min(out["b2"])
    report(4, b3 >= -1e-3 and b1 >= -1e-6 and b2 >= -1e-6,
           f"min b3 = {b3:.4f} m (>= -1e-3), min b1 = {b1:.4f}, min b2 = {b2:.4f} (>= -1e-6) over 60 s")


def test_c05_reference_trajectory_optimality():
    rng = np.random.default_rng(11)
    worst_res = worst_gap = 0.0
    done = 0
    while done < 100:
        v0, v_f = rng.uniform(5.0, 30.0), rng.uniform(1.0, 30.0)
        x_f = rng.uniform(50.0, 400.0)
        law = solve_energy_optimal(0.0, v0, x_f, v_f)
        if law.duration > 60.0:
            continue
        res = max(abs(law.x(law.t_f) - x_f), abs(law.v(law.t_f) - v_f))
        cost, _ = direct_trajectory_oracle(0.0, v0, x_f, v_f, T_max=law.duration * 2 + 5)
        worst_res = max(worst_res, res)
        if cost > 1e-9:
            worst_gap = max(worst_gap, abs(law.cost() - cost) / cost)
        else:
            worst_gap = max(worst_gap, law.cost())
        done += 1
    worst_tf = 0.0
    for _ in range(20):
        v0, d = rng.uniform(5.0, 25.0), rng.uniform(30.0, 150.0)
        law = solve_yield_stop(0.0, v0, d)
        _, T = direct_trajectory_oracle(0.0, v0, d, 0.0, T_max=law.duration * 2)
        worst_tf = max(worst_tf, abs(law.duration - T))
    report(5, worst_res < 1e-6 and worst_gap < 1e-3 and worst_tf <= 1e-3 + 1e-12,
           f"100 instances: max boundary residual {worst_res:.1e}, max cost gap {worst_gap:.2e} (< 1e-3); "
           f"yield t_f max |diff| {worst_tf:.1e} s (<= 1e-3)")


def test_c06_yield_safety():
    yields = bad = 0
    worst_clear = math.inf
    for seed in range(50):
        res = sim.run_world(sim.yield_world(seed))
        cfg = res.config
        commit = [e for e in res.events if e["event"] == "yield_commit" and e["vehicle"] == 1]
        if not commit:
            continue
        yields += 1
        hdv_id = commit[0]["payload"]["hdv"]
        t_commit = commit[0]["t"]
        hdv_cross = next(t for t, s in res.traces[hdv_id] if s.position >= cfg.L)
        overshoot = any(s.position > cfg.L - cfg.delta + 0.5
                        for t, s in res.traces[1] if t_commit <= t < hdv_cross)
        clear = res.metrics[1].mp_clearance_residual
        worst_clear = min(worst_clear, clear)
        if overshoot or not clear >= 0:
            bad += 1
    report(6, bad == 0 and yields > 0,
           f"{yields}/50 seeds yielded; {yields - bad}/{yields} stayed behind L - delta + 0.5 m "
           f"with post-yield clearance >= 0 (worst {worst_clear:.3f} m)")


def sign_test_p(wins, n):
    """One-sided P(X >= wins) for X ~ Binomial(n, 1/2)."""
    return sum(math.comb(n, k) for k in range(wins, n + 1)) / 2 ** n if n else 1.0


def test_c07_table_direction():
    seeds = range(20)
    lines, ok = [], True
    for pen in (0.2, 0.4, 0.6):
        means = {}
        for pol in ("SS", "SDF"):
            for seed in seeds:
                cfg = ScenarioConfig().replace(sequencing_policy=pol, penetration_rate=pen, seed=seed,
                                               n_vehicles=100)
                rows = sim.run(cfg, keep_traces=False).vehicle_rows()
                means[pol, seed] = {m: statistics.fmean(r[m] for r in rows) for m in ("travel_time", "l2_energy")}
        for metric in ("travel_time", "l2_energy"):
            ss = [means["SS", s][metric] for s in seeds]
            sdf = [means["SDF", s][metric] for s in seeds]
            diffs = [a - b for a, b in zip(ss, sdf) if a != b]
            wins = sum(d < 0 for d in diffs)
            p = sign_test_p(wins, len(diffs))
            cell_ok = statistics.fmean(ss) <= statistics.fmean(sdf) and p < 0.05
            ok &= cell_ok
            lines.append(f"{pen:.0%} {metric}: SS {statistics.fmean(ss):.3f} vs SDF {statistics.fmean(sdf):.3f}, "
                         f"SS lower in {wins}/{len(diffs)}, p = {p:.3g}")
    report(7, ok, "; ".join(lines))


def test_c08_fig6_reproduction():
    mins = {}
    for pol in ("SS", "SDF"):
        res = sim.run_world(sim.fig6_world(pol))
        traces = sim.velocity_traces(res)
        mins[pol] = {vid: min(v for _, v in traces[vid]) for vid in sim.FIG6_IDS["cav"]}
    blocked = min(mins["SDF"], key=mins["SDF"].get)
    ok = mins["SDF"][blocked] < 1.0 and min(mins["SS"].values()) > 5.0
    fmt = lambda d: ", ".join(f"{k}: {v:.2f}" for k, v in sorted(d.items()))
    report(8, ok, f"SDF blocked CAV {blocked} min speed {mins['SDF'][blocked]:.2f} m/s (< 1); "
                  f"SS CAV min speeds {fmt(mins['SS'])} (> 5)")


def test_c09_real_time_budget():
    w = sim.timing_world()
    times = []
    for _ in range(100):
        t0 = time.perf_counter()
        w.tick()
        times.append(time.perf_counter() - t0)
    med = statistics.median(times)
    report(9, med < 0.1, f"median tick {med * 1000:.1f} ms over 100 ticks with N1 = 10, N2 = 5, H = {w.cfg.H} (< 100 ms)")


def test_c10_determinism(tmp_path):
    cfg = ScenarioConfig().replace(seed=42, n_vehicles=40, penetration_rate=0.5)
    a = export(sim.run(cfg, keep_traces=False), "csv", tmp_path / "a.csv").read_bytes()
    b = export(sim.run(cfg, keep_traces=False), "csv", tmp_path / "b.csv").read_bytes()
    report(10, a == b, f"two runs with seed 42 give byte-identical CSV ({len(a)} bytes)")
