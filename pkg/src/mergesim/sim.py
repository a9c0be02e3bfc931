"""Discrete-time closed-loop simulation of the merging control zone."""

from __future__ import annotations

import json
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import az, barriers, hdv
from .controller import CavController, ControllerMode, Neighbor, worst_leader_accel
from .core import (HdvParams, RoadId, ScenarioConfig, VehicleClass, VehicleRecord, VehicleState,
                   Zone, by_remaining_distance)
from .dynamics import crossing_time, step
from .metrics import VehicleMetrics, accumulate, aggregate, check_fuel_coeffs
from .sequencing import (EMPTY_OUTCOME, Assignment, coordinate, merging_pair, sdf_outcome, sdf_sequence,
                         sequence_neighbors)
from .trajectory import reference_law, retain_law

log = logging.getLogger(__name__)

AUDIT_TOL = 1e-3


@dataclass
class SimClock:
    tick_index: int = 0
    dt: float = 0.1

    @property
    def t(self) -> float:
        return self.tick_index * self.dt


@dataclass
class RunResult:
    config: ScenarioConfig
    records: list
    metrics: dict
    events: list
    audit: dict
    partial: bool = False
    traces: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.config.seed

    def exited(self) -> list:
        return [r for r in self.records if r.t_exit is not None]

    def vehicle_rows(self) -> list:
        rows = []
        for r in self.exited():
            m = self.metrics[r.id]
            rows.append({
                "id": r.id, "class": r.cls.value, "road": int(r.road),
                "t_entry": r.t_entry, "t_exit": r.t_exit, "travel_time": m.travel_time,
                "l2_energy": m.l2_energy, "fuel": m.fuel,
                "min_rear_gap_residual": m.min_rear_gap_residual,
                "mp_clearance_residual": m.mp_clearance_residual,
            })
        return rows

    def aggregates(self):
        return aggregate(self.vehicle_rows())

    @property
    def audit_passed(self) -> bool:
        """No CAV-caused safety violation; HDV-caused ones count only under SS with polite HDVs."""
        a = self.audit
        if a["cav_clearance_violations"] or a["rear_end_violations"]:
            return False
        strict = self.config.sequencing_policy == "SS" and self.config.hdv_model == "CarFollowing"
        return not (strict and a["hdv_caused_clearance_violations"])


class World:
    """Vehicle table plus everything the tick loop mutates."""

    def __init__(self, cfg: ScenarioConfig, stochastic_arrivals: bool = True, keep_traces: bool = True):
        check_fuel_coeffs(cfg)
        self.cfg = cfg
        self.clock = SimClock(0, cfg.T_d)
        self.rng = np.random.default_rng(cfg.seed)
        self.records: dict = {}
        self.active: list = []
        self.controllers: dict = {}
        self.metrics: dict = {}
        self.events: list = []
        self.traces: dict = {}
        self.keep_traces = keep_traces
        self.outcome = EMPTY_OUTCOME
        self.yields: dict = {}
        self.hold_at_rest: set = set()
        self.cruise: dict = {}
        self.hdv_history: dict = {}
        self.held: set = set()
        self.audit = {"cav_clearance_violations": 0, "hdv_caused_clearance_violations": 0,
                      "rear_end_violations": 0, "qp_infeasible": 0, "min_cav_rear_residual": math.inf}
        self.next_id = 1
        self.planned = 0
        self.queues = {road: deque() for road in RoadId}
        self.stochastic = stochastic_arrivals and cfg.arrival_rate_per_road > 0
        self.next_arrival = {}
        if self.stochastic:
            for road in RoadId:
                self.next_arrival[road] = self.rng.exponential(1.0 / cfg.arrival_rate_per_road)

    @property
    def t(self) -> float:
        return self.clock.t

    def log_event(self, vid, event: str, **payload):
        self.events.append({"tick": self.clock.tick_index, "t": round(self.t, 10), "vehicle": vid,
                            "event": event, "payload": payload})

    # vehicles -----------------------------------------------------------

    def default_hdv_params(self, v0: float) -> HdvParams:
        return HdvParams(model=self.cfg.hdv_model, desired_speed=v0, aggression=self.cfg.hdv_aggression)

    def add_vehicle(self, cls: VehicleClass, road: RoadId, x: float, v: float,
                    hdv_params: Optional[HdvParams] = None, vid: Optional[int] = None) -> VehicleRecord:
        """Insert a vehicle now (scripted scenarios and spawns)."""
        vid = self.next_id if vid is None else vid
        if vid in self.records:
            raise ValueError(f"duplicate vehicle id {vid}")
        self.next_id = max(self.next_id, vid + 1)
        if cls is VehicleClass.HDV and hdv_params is None:
            hdv_params = self.default_hdv_params(v)
        rec = VehicleRecord(vid, cls, road, VehicleState(x, v, 0.0), self.t, hdv_params=hdv_params)
        rec.zone = Zone.AZ if x >= self.cfg.az_start else Zone.SZ
        if rec.zone is Zone.AZ:
            rec.t_az = self.t
        self.records[vid] = rec
        self.cruise[vid] = min(max(v, 1.0), self.cfg.v_max)
        self.active.append(rec)
        self.metrics[vid] = VehicleMetrics()
        if rec.is_cav:
            self.controllers[vid] = CavController(vid, rec.state, self.t, self.cfg)
        if self.keep_traces:
            self.traces[vid] = [(self.t, rec.state)]
        self.log_event(vid, "spawn", cls=cls.value, road=int(road), x=x, v=v)
        return rec

    def _last_on_road(self, road: RoadId) -> Optional[VehicleRecord]:
        cands = [r for r in self.active if r.road is road]
        return min(cands, key=lambda r: r.x) if cands else None

    def _insertion_ok(self, cls: VehicleClass, road: RoadId, v0: float) -> bool:
        last = self._last_on_road(road)
        if last is None:
            return True
        cfg = self.cfg
        me = VehicleState(0.0, v0)
        if barriers.b_rear_end(me, last.state, cfg) < 0:
            return False
        # the rear-end CBF row must admit some u >= u_min
        row = barriers.cbf_rear_end(me, last.state, cfg, float(worst_leader_accel(last.v, cfg)), cfg.T_d)
        return row.residual(cfg.u_min) >= 0

    def spawn_arrivals(self) -> list:
        cfg = self.cfg
        if self.stochastic:
            for road in RoadId:
                while self.next_arrival[road] <= self.t + 1e-12 and self.planned < cfg.n_vehicles:
                    cls = VehicleClass.CAV if self.rng.random() < cfg.penetration_rate else VehicleClass.HDV
                    v0 = float(self.rng.uniform(*cfg.init_speed_range))
                    self.queues[road].append((cls, v0))
                    self.planned += 1
                    self.next_arrival[road] += self.rng.exponential(1.0 / cfg.arrival_rate_per_road)
        born = []
        for road in RoadId:
            q = self.queues[road]
            if q and self._insertion_ok(q[0][0], road, q[0][1]):
                cls, v0 = q.popleft()
                born.append(self.add_vehicle(cls, road, 0.0, v0))
        return born

    # neighbour queries ---------------------------------------------------

    def _lane_leader(self, me: VehicleRecord) -> Optional[VehicleRecord]:
        """Nearest vehicle ahead in the same lane: same road, or anyone past M."""
        best = None
        for o in self.active:
            if o is me or o.x <= me.x:
                continue
            if o.road is me.road or o.zone is Zone.EXITED:
                if best is None or o.x < best.x:
                    best = o
        return best

    def _road_leader(self, me: VehicleRecord) -> Optional[VehicleRecord]:
        best = None
        for o in self.active:
            if o.road is me.road and o.x > me.x and (best is None or o.x < best.x):
                best = o
        return best

    def _physical_assignment(self, me: VehicleRecord) -> tuple:
        """Thresholded and raw opposite-road neighbours by remaining distance."""
        key = lambda r: (-r.x, int(r.road), r.id)
        mine = key(me)
        ahead = behind = None
        for o in self.active:
            if o.road is me.road:
                continue
            if key(o) < mine:
                if o.id in self.held:
                    continue
                if ahead is None or key(o) > key(ahead):
                    ahead = o
            elif behind is None or key(o) < key(behind):
                behind = o
        return merging_pair(me, ahead, behind, self.cfg), ahead, behind

    def _held_set(self) -> set:
        """Yielding CAVs and every vehicle queued behind one on its road.

        None of them can reach M before the yield is released, so the other
        road neither projects them nor merges behind them.
        """
        held = set()
        for vid in self.hold_at_rest:
            y = self.records[vid]
            held.add(vid)
            for o in self.active:
                if o.road is y.road and o.zone is not Zone.EXITED and o.x < y.x:
                    held.add(o.id)
        return held

    def _neighbor(self, vid) -> Optional[Neighbor]:
        if vid is None:
            return None
        r = self.records[vid]
        return Neighbor(r.state, r.is_cav, r.state.accel)

    # control ----------------------------------------------------------------

    def coordinate(self):
        sz = [r for r in self.active if r.zone is Zone.SZ]
        if self.cfg.sequencing_policy == "SS":
            out = coordinate(sz, self.cfg, self.outcome)
        else:
            out = sdf_outcome(sz, self.cfg)
        if out.resequenced and out.sequence.order != self.outcome.sequence.order:
            self.log_event(None, "resequence", order=list(out.sequence.order), source=out.sequence.source)
        self.outcome = out
        return out

    def _cav_sz_control(self, rec: VehicleRecord, raw: dict, base: dict) -> float:
        ctrl = self.controllers[rec.id]
        nb = raw.get(rec.id, Assignment(rec.id))
        ahead, behind = self._neighbor(nb.ahead), self._neighbor(nb.behind)
        started = ctrl.update_mode(rec.state, self.t, nb, self.outcome.sequence, ahead, behind,
                                   base.get(rec.id, nb))
        if started:
            self.log_event(rec.id, "mode", mode=ctrl.cs.mode.value,
                           suppressed=sorted(ctrl.cs.suppressed_constraints))
        lead = self._road_leader(rec)
        return ctrl.control(rec.state, self.t, nb, ip=self._neighbor(lead and lead.id),
                            ahead=ahead, behind=behind)

    def _hdv_history(self, hdv_id: int, since: float) -> list:
        trace = self.hdv_history.get(hdv_id, [])
        return [(t, s, s.accel) for t, s in trace if t >= since - 1e-9]

    def _release_safe(self, rec, hdv_rec, hat_plus, hat_minus) -> bool:
        """A yield ends only when merging is already safe on both sides.

        Vehicles on the other road ignored the held CAV, so a close follower
        there would otherwise start with a negative merge barrier.
        """
        cfg = self.cfg
        if barriers.b_merge_ahead(rec.state, hdv_rec.state, cfg) < 0:
            return False
        if hat_plus is not None and barriers.b_merge_ahead(rec.state, hat_plus.state, cfg) < 0:
            return False
        return hat_minus is None or barriers.b_merge_behind(rec.state, hat_minus.state, cfg) >= 0

    def _cav_az_control(self, rec: VehicleRecord) -> float:
        cfg, t = self.cfg, self.t
        ctrl = self.controllers[rec.id]
        asg, hat_plus, hat_minus = self._physical_assignment(rec)
        ahead = self._neighbor(hat_plus and hat_plus.id)
        behind = self._neighbor(hat_minus and hat_minus.id)
        ep = self.yields.get(rec.id)
        if ep is not None:
            other = self.records[ep.hdv_id]
            if other.x >= cfg.L and self._release_safe(rec, other, hat_plus, hat_minus):
                del self.yields[rec.id]
                self.hold_at_rest.discard(rec.id)
                ctrl.cs.mode = ControllerMode.RETAIN
                ctrl.cs.active_law = reference_law(rec.x, rec.v, cfg.L, cfg.v_max, cfg, t)
                ctrl.cs.last_solution = None
                self.log_event(rec.id, "yield_release", hdv=ep.hdv_id)
                ep = None
        if ep is None and asg.behind is not None and not self.records[asg.behind].is_cav:
            other = self.records[asg.behind]
            history = self._hdv_history(other.id, rec.t_az)
            est = az.estimate_aggressiveness(history, cfg) if history else None
            if az.az_decide(rec, other, est, cfg) is az.AzDecision.YIELD:
                ep = az.YieldEpisode(other.id, t)
                self.yields[rec.id] = ep
                self.hold_at_rest.add(rec.id)
                self.log_event(rec.id, "yield_commit", hdv=other.id, aggressiveness=est.value)
                ctrl.cs.last_solution = None
        lead = self._road_leader(rec)
        if ep is not None:
            # a yielding CAV lets the other road go first: no merge-behind row
            return ctrl.control(rec.state, t, asg, ip=self._neighbor(lead and lead.id),
                                ahead=ahead, behind=None, law=az.yield_law(rec.state, t, cfg))
        return ctrl.control(rec.state, t, asg, ip=self._neighbor(lead and lead.id),
                            ahead=ahead, behind=behind)

    def _hdv_control(self, rec: VehicleRecord) -> float:
        params = rec.hdv_params or self.default_hdv_params(rec.v)
        leader = hdv.effective_leader(rec, self.active, self.cfg, ignore=self.held)
        return hdv.hdv_control(rec, leader, params, self.cfg)

    def _downstream_control(self, rec: VehicleRecord) -> float:
        params = rec.hdv_params or HdvParams(desired_speed=self.cruise[rec.id])
        return hdv.hdv_control(rec, self._lane_leader(rec), params, self.cfg)

    # tick --------------------------------------------------------------------

    def tick(self) -> "World":
        cfg, t, dt = self.cfg, self.t, self.cfg.T_d
        self.spawn_arrivals()
        self.coordinate()
        raw = sequence_neighbors(self.outcome.sequence, self.records)
        base = {}
        if self.outcome.resequenced:
            sz = [r for r in self.active if r.zone is Zone.SZ]
            base = sequence_neighbors(sdf_sequence(sz), self.records)

        self.held = self._held_set()
        controls = {}
        for rec in self.active:
            if rec.zone is Zone.EXITED:
                u = self._downstream_control(rec)
            elif not rec.is_cav:
                u = self._hdv_control(rec)
            elif rec.zone is Zone.SZ:
                u = self._cav_sz_control(rec, raw, base)
            else:
                u = self._cav_az_control(rec)
            if rec.is_cav and rec.zone is not Zone.EXITED:
                status = self.controllers[rec.id].last_status
                if status != "Optimal":
                    self.audit["qp_infeasible"] += 1
                    self.log_event(rec.id, "qp_infeasible", u=u)
            controls[rec.id] = min(max(u, cfg.u_min), cfg.u_max)

        before = {rec.id: rec.state for rec in self.active}
        for rec in self.active:
            rec.state = step(rec.state, controls[rec.id], dt, clamp_at_rest=True)
            rec.control_history.append((t, controls[rec.id]))
        self.clock.tick_index += 1
        t_new = self.t

        keep = []
        for rec in self.active:
            u, s0 = controls[rec.id], before[rec.id]
            if rec.zone is not Zone.EXITED:
                tau = dt
                if rec.zone is Zone.SZ and rec.x >= cfg.az_start:
                    rec.zone = Zone.AZ
                    rec.t_az = t + (crossing_time(s0, u, cfg.az_start, dt) or dt)
                    self.log_event(rec.id, "enter_az", x=rec.x, v=rec.v)
                    if rec.is_cav:
                        self.controllers[rec.id].enter_az(rec.state, t_new)
                if rec.x >= cfg.L:
                    tau = crossing_time(s0, u, cfg.L, dt)
                    tau = dt if tau is None else tau
                    self._finalize_exit(rec, t + tau, tau, before, controls)
                m = self.metrics[rec.id]
                accumulate(m, u, s0.velocity, tau, cfg)
            if self.keep_traces:
                self.traces[rec.id].append((t_new, rec.state))
            if not rec.is_cav and rec.zone is not Zone.EXITED:
                # observed trace for the aggressiveness estimate
                self.hdv_history.setdefault(rec.id, []).append((t_new, rec.state))
            if rec.x <= cfg.L + cfg.downstream_length:
                keep.append(rec)
        self.active = keep

        for rec in self.active:
            if rec.is_cav and rec.zone is not Zone.EXITED:
                lead = self._road_leader(rec)
                if lead is not None:
                    b3 = barriers.b_rear_end(rec.state, lead.state, cfg)
                    m = self.metrics[rec.id]
                    m.min_rear_gap_residual = min(m.min_rear_gap_residual, b3)
                    self.audit["min_cav_rear_residual"] = min(self.audit["min_cav_rear_residual"], b3)
                    if b3 < -AUDIT_TOL:
                        self.audit["rear_end_violations"] += 1
        return self

    def _finalize_exit(self, rec, t_exit, tau, before, controls):
        cfg = self.cfg
        rec.zone = Zone.EXITED
        rec.t_exit = t_exit
        m = self.metrics[rec.id]
        m.travel_time = t_exit - rec.t_entry
        self.controllers.pop(rec.id, None)
        self.yields.pop(rec.id, None)
        self.hold_at_rest.discard(rec.id)
        payload = {"v": rec.v}
        if rec.is_cav:
            # nearest opposite-road vehicle ahead at the crossing instant
            ahead = None
            for o in self.active:
                if o.road is rec.road or o.id not in before:
                    continue
                s = before[o.id]
                x_o = s.position + s.velocity * tau + 0.5 * controls[o.id] * tau * tau
                if (x_o, -int(o.road)) > (cfg.L, -int(rec.road)) and (ahead is None or x_o < ahead[1]):
                    ahead = (o, x_o)
            if ahead is not None:
                s = before[rec.id]
                v_i = s.velocity + controls[rec.id] * tau
                res = ahead[1] - cfg.L - cfg.phi * v_i - cfg.delta
                m.mp_clearance_residual = res
                payload.update(ahead=ahead[0].id, ahead_cls=ahead[0].cls.value, clearance=res)
                if res < -AUDIT_TOL:
                    key = "cav_clearance_violations" if ahead[0].is_cav else "hdv_caused_clearance_violations"
                    self.audit[key] += 1
        self.log_event(rec.id, "exit", **payload)

    # run ----------------------------------------------------------------------

    def done(self) -> bool:
        if any(r.zone is not Zone.EXITED for r in self.active):
            return False
        if any(self.queues.values()):
            return False
        return not self.stochastic or self.planned >= self.cfg.n_vehicles

    def result(self, partial: bool = False) -> RunResult:
        recs = [self.records[k] for k in sorted(self.records)]
        return RunResult(self.cfg, recs, dict(self.metrics), self.events, dict(self.audit),
                         partial, self.traces if self.keep_traces else {})


def tick(world: World) -> World:
    return world.tick()


def run_world(world: World, t_limit: Optional[float] = None) -> RunResult:
    limit = world.cfg.wall_limit if t_limit is None else t_limit
    while not world.done():
        if world.t >= limit:
            log.warning("time limit %.1f s reached with vehicles still in the zone", limit)
            return world.result(partial=True)
        world.tick()
    return world.result()


def run(cfg: ScenarioConfig, keep_traces: bool = True) -> RunResult:
    return run_world(World(cfg, keep_traces=keep_traces))


def write_event_log(result: RunResult, path) -> Path:
    """Line-delimited JSON, one event per line."""
    path = Path(path)
    with path.open("w") as fh:
        for ev in result.events:
            fh.write(json.dumps(ev, sort_keys=True) + "\n")
    return path


# scripted scenarios -----------------------------------------------------------

FIG6_IDS = {"cav": (3, 4, 6), "hdv": (5, 7)}
FIG6_SPEED = 18.0


def fig6_world(policy: str, cfg: Optional[ScenarioConfig] = None) -> World:
    """Five vehicles in the SZ: CAVs 3, 4, 6 and HDVs 5, 7; HDV 5 drives aggressively."""
    base = cfg or ScenarioConfig()
    cfg = base.replace(sequencing_policy=policy, arrival_rate_per_road=0.0, n_vehicles=5)
    w = World(cfg, stochastic_arrivals=False)
    main, side = RoadId.MAIN, RoadId.SIDE
    v = FIG6_SPEED
    w.add_vehicle(VehicleClass.CAV, side, 164.0, v, vid=3)
    w.add_vehicle(VehicleClass.CAV, main, 134.0, v, vid=4)
    w.add_vehicle(VehicleClass.HDV, side, 117.0, v, vid=5,
                  hdv_params=HdvParams(model="Aggressive", desired_speed=v / 1.2, aggression=1.0))
    w.add_vehicle(VehicleClass.CAV, side, 72.0, v, vid=6)
    w.add_vehicle(VehicleClass.HDV, main, 58.0, v, vid=7,
                  hdv_params=HdvParams(model="CarFollowing", desired_speed=v))
    return w


def following_world(cfg: Optional[ScenarioConfig] = None, gap: float = 60.0, v0: float = 20.0) -> World:
    """Two CAVs on the main road; the leader is driven externally."""
    cfg = (cfg or ScenarioConfig()).replace(arrival_rate_per_road=0.0, L=2000.0, L_SZ=1900.0)
    w = World(cfg, stochastic_arrivals=False)
    w.add_vehicle(VehicleClass.CAV, RoadId.MAIN, gap, v0, vid=1)
    w.add_vehicle(VehicleClass.CAV, RoadId.MAIN, 0.0, v0, vid=2)
    return w


def run_following(cfg: Optional[ScenarioConfig] = None, duration: float = 60.0,
                  v_mid: float = 20.0, amp: float = 5.0, period: float = 10.0,
                  v_follow: float = 28.0) -> dict:
    """Follower under MPC-CBF behind a leader whose speed is v_mid + amp sin(2 pi t / period).

    The follower tracks ``v_follow``, faster than the leader, so the rear-end
    barrier is what keeps it back. Returns per-tick b1, b2, b3 of the follower.
    """
    w = following_world(cfg, v0=v_mid)
    cfg = w.cfg
    leader, follower = w.records[1], w.records[2]
    ctrl = w.controllers[2]
    ctrl.cs.active_law = retain_law(follower.x, v_follow, 0.0)
    omega = 2.0 * math.pi / period
    out = {"t": [], "b1": [], "b2": [], "b3": []}
    n = int(round(duration / cfg.T_d))
    for k in range(n):
        t = k * cfg.T_d
        u_f = ctrl.control(follower.state, t, Assignment(2),
                           ip=Neighbor(leader.state, True, leader.state.accel))
        # leader tracks the sinusoid exactly at the sample instants
        v_target = v_mid + amp * math.sin(omega * (t + cfg.T_d))
        u_l = (v_target - leader.v) / cfg.T_d
        leader.state = step(leader.state, u_l, cfg.T_d)
        follower.state = step(follower.state, u_f, cfg.T_d)
        out["t"].append(t + cfg.T_d)
        out["b1"].append(barriers.b_speed_max(follower.state, cfg))
        out["b2"].append(barriers.b_speed_min(follower.state, cfg))
        out["b3"].append(barriers.b_rear_end(follower.state, leader.state, cfg))
    return out


def yield_world(seed: int, cfg: Optional[ScenarioConfig] = None) -> World:
    """A CAV just inside the AZ with a fully aggressive HDV close behind on the other road.

    Both start in the AZ, so no resequencing can settle the conflict beforehand.
    """
    rng = np.random.default_rng(seed)
    cfg = (cfg or ScenarioConfig()).replace(arrival_rate_per_road=0.0, seed=seed)
    w = World(cfg, stochastic_arrivals=False)
    x_cav = float(rng.uniform(cfg.az_start + 8.0, cfg.az_start + 20.0))
    v_cav = float(rng.uniform(12.0, 18.0))
    lag = float(rng.uniform(2.0, 12.0))
    v_hdv = float(rng.uniform(v_cav + 2.0, min(v_cav + 8.0, cfg.v_max)))
    cav_road = RoadId.MAIN if rng.random() < 0.5 else RoadId.SIDE
    w.add_vehicle(VehicleClass.CAV, cav_road, x_cav, v_cav, vid=1)
    w.add_vehicle(VehicleClass.HDV, cav_road.other, max(x_cav - lag, cfg.az_start), v_hdv, vid=2,
                  hdv_params=HdvParams(model="Aggressive", desired_speed=v_hdv, aggression=1.0))
    return w


def timing_world(cfg: Optional[ScenarioConfig] = None, n_main: int = 10, n_side: int = 5,
                 seed: int = 0) -> World:
    """Mixed traffic loaded into the SZ for per-tick timing."""
    cfg = (cfg or ScenarioConfig()).replace(arrival_rate_per_road=0.0, seed=seed)
    rng = np.random.default_rng(seed)
    w = World(cfg, stochastic_arrivals=False)
    for road, n in ((RoadId.MAIN, n_main), (RoadId.SIDE, n_side)):
        spacing = (cfg.L_SZ - 20.0) / n
        for k in range(n):
            cls = VehicleClass.CAV if rng.random() < 0.6 else VehicleClass.HDV
            w.add_vehicle(cls, road, 10.0 + k * spacing + float(rng.uniform(0, 3)), 12.0)
    return w


def velocity_traces(result: RunResult) -> dict:
    return {vid: [(t, s.velocity) for t, s in tr] for vid, tr in result.traces.items()}


def sz_sequence_ids(records) -> list:
    return [r.id for r in by_remaining_distance(records)]
