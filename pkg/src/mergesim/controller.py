"""Per-CAV lower-level controller: mode selection and the MPC-CBF quadratic program."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import quadprog

from . import barriers
from .core import ScenarioConfig, VehicleState
from .sequencing import Assignment, MergeSequence
from .trajectory import LinearControlLaw, reference_law, retain_law

log = logging.getLogger(__name__)

EPS_E = 1e-8
MERGE_AHEAD = "merge_ahead"
MERGE_BEHIND = "merge_behind"
FALL_BEHIND_MIN_SPEED = 1.0


class ControllerMode(str, enum.Enum):
    JUMP_AHEAD = "JumpAhead"
    FALL_BEHIND = "FallBehind"
    RETAIN = "Retain"


@dataclass
class CavControllerState:
    prev_assignment: Optional[Assignment]
    active_law: LinearControlLaw
    mode: ControllerMode = ControllerMode.RETAIN
    suppressed_constraints: set = field(default_factory=set)
    last_solution: Optional[np.ndarray] = None
    infeasible_events: int = 0


@dataclass
class Neighbor:
    """Observed state of a vehicle referenced by a constraint row."""

    state: VehicleState
    is_cav: bool = True
    u: float = 0.0


@dataclass
class QpProblem:
    H: int
    u_ref: np.ndarray
    beta1: float
    A: np.ndarray  # rows over [u_0..u_{H-1}, e]; A z >= lb
    lb: np.ndarray
    labels: list
    steps: np.ndarray  # horizon index of each row

    @property
    def hessian(self) -> np.ndarray:
        return np.diag(np.r_[np.full(self.H, 2.0), 2.0 * (self.beta1 + EPS_E)])

    def rows_for(self, label: str) -> np.ndarray:
        return np.array([k for k, lab in enumerate(self.labels) if lab == label], dtype=int)


@dataclass
class QpSolution:
    u: np.ndarray
    e: float
    status: str  # Optimal | Infeasible


def select_mode(prev: Optional[Assignment], new: Assignment, seq: MergeSequence,
                state: VehicleState, t: float, cfg: ScenarioConfig):
    """Mode from how the sequence position of the leading merge partner moved.

    Empty partners, and partners no longer in the SZ sequence, sit at position 0.
    """
    def pos(vid):
        return 0 if vid is None else seq.position(vid)

    p_prev = pos(prev.ahead) if prev is not None else 0
    p_new = pos(new.ahead)
    x, v = state.position, state.velocity
    x_f = cfg.L - cfg.L_AZ
    if p_new < p_prev:
        return ControllerMode.JUMP_AHEAD, _target_law(x, v, x_f, cfg.v_max, t, cfg)
    if p_new > p_prev:
        v_f = max(cfg.v_min, FALL_BEHIND_MIN_SPEED)
        return ControllerMode.FALL_BEHIND, _target_law(x, v, x_f, v_f, t, cfg)
    return ControllerMode.RETAIN, retain_law(x, v, t)


def _target_law(x, v, x_f, v_f, t, cfg):
    if x_f - x < 1e-3:
        return LinearControlLaw(0.0, 0.0, t, t, x, v)
    return reference_law(x, v, x_f, v_f, cfg, t)


def _nominal_rollout(state: VehicleState, controls: np.ndarray, dt: float):
    """Positions and speeds at the start of each horizon step."""
    H = len(controls)
    prior = np.r_[0.0, np.cumsum(controls)[:-1]]
    v = state.velocity + dt * prior
    dist = np.r_[0.0, np.cumsum(v[:-1] * dt + 0.5 * controls[:-1] * dt * dt)] if H > 1 else np.zeros(1)
    return state.position + dist, v


def _cv_prediction(state: VehicleState, H: int, dt: float):
    h = np.arange(H)
    return VehicleState(state.position + state.velocity * dt * h, np.full(H, state.velocity))


def _ca_prediction(state: VehicleState, a: float, H: int, dt: float):
    """Constant acceleration until rest."""
    tau = dt * np.arange(H)
    if a < 0 and state.velocity > 0:
        tau = np.minimum(tau, state.velocity / -a)
    elif a < 0:
        return VehicleState(np.full(H, state.position), np.zeros(H)), np.zeros(H)
    v = state.velocity + a * tau
    acc = np.where(v > 0, a, 0.0) if a < 0 else np.full(H, a)
    return VehicleState(state.position + state.velocity * tau + 0.5 * a * tau * tau, v), acc


def worst_leader_accel(v_ip, cfg: ScenarioConfig):
    """Hardest braking the vehicle ahead can show over one step; a car at rest stays put."""
    return np.maximum(cfg.u_min, -2.0 * np.asarray(v_ip, dtype=float) / cfg.T_d)


def build_qp(state: VehicleState, t: float, assignment: Assignment, law: LinearControlLaw,
             cfg: ScenarioConfig, ip: Optional[Neighbor] = None, ahead: Optional[Neighbor] = None,
             behind: Optional[Neighbor] = None, suppressed=frozenset(),
             nominal: Optional[np.ndarray] = None) -> QpProblem:
    """Assemble the horizon QP.

    Barrier rows at step h are instantiated at the nominal own state (previous
    plan shifted, else constant speed) and constant-speed neighbour predictions,
    which keeps every row affine in (u_h, e).
    """
    H, dt = cfg.H, cfg.T_d
    if nominal is None:
        nominal = np.zeros(H)
    xs, vs = _nominal_rollout(state, nominal, dt)
    xs[0], vs[0] = state.position, state.velocity
    own = VehicleState(xs, vs)
    times = t + dt * np.arange(H)
    u_ref = np.array([law.u(tt) for tt in times])
    v_ref = np.array([law.v(tt) for tt in times])

    groups = list(barriers.cbf_speed_limits(own, cfg))
    if ip is not None:
        pred, _ = _ca_prediction(ip.state, ip.u, H, dt)
        groups.append(barriers.cbf_rear_end(own, pred, cfg, worst_leader_accel(pred.velocity, cfg), dt))
    if ahead is not None and MERGE_AHEAD not in suppressed:
        pred, _ = _ca_prediction(ahead.state, ahead.u, H, dt)
        groups.append(barriers.cbf_merge_ahead(own, pred, cfg, worst_leader_accel(pred.velocity, cfg), dt))
    if behind is not None and behind.is_cav and MERGE_BEHIND not in suppressed:
        groups.append(barriers.hocbf_merge_behind(own, _cv_prediction(behind.state, H, dt),
                                                  behind.u, 0.0, cfg))
    groups.append(barriers.clf_track_speed(own, v_ref, cfg).as_geq())

    n_rows = len(groups) * H + 2 * H
    A = np.zeros((n_rows, H + 1))
    lb = np.empty(n_rows)
    steps = np.empty(n_rows, dtype=int)
    labels = []
    idx = np.arange(H)
    r = 0
    for g in groups:
        rows = r + idx
        A[rows, idx] = g.a_u
        A[rows, H] = g.a_e
        lb[rows] = -np.asarray(g.c, dtype=float)
        steps[rows] = idx
        labels.extend([g.label] * H)
        r += H
    A[r + idx, idx] = 1.0
    lb[r + idx] = cfg.u_min
    A[r + H + idx, idx] = -1.0
    lb[r + H + idx] = -cfg.u_max
    steps[r:r + 2 * H] = np.r_[idx, idx]
    labels.extend(["u_min"] * H + ["u_max"] * H)
    return QpProblem(H, u_ref, cfg.beta1, A, lb, labels, steps)


def solve_qp(qp: QpProblem, rows: Optional[np.ndarray] = None) -> QpSolution:
    A, lb = (qp.A, qp.lb) if rows is None else (qp.A[rows], qp.lb[rows])
    if len(lb) == 0:
        # quadprog needs at least one row; the unconstrained optimum is the reference
        return QpSolution(np.array(qp.u_ref, dtype=float), 0.0, "Optimal")
    a = np.r_[2.0 * qp.u_ref, 0.0]
    try:
        z = quadprog.solve_qp(qp.hessian, a, A.T.copy(), lb, 0)[0]
    except ValueError:
        return QpSolution(np.full(qp.H, np.nan), np.nan, "Infeasible")
    return QpSolution(z[:qp.H], float(z[qp.H]), "Optimal")


def fallback_on_infeasible(barrier_values, cfg: ScenarioConfig) -> float:
    """Defensive braking when a safety barrier is already violated, else coast."""
    return cfg.u_min if any(b < 0 for b in barrier_values) else 0.0


def restore_suppressed(cs: CavControllerState, state: VehicleState, ahead: Optional[Neighbor],
                       behind: Optional[Neighbor], cfg: ScenarioConfig) -> CavControllerState:
    """Drop suppressions whose original barrier has turned non-negative."""
    for label in list(cs.suppressed_constraints):
        if label == MERGE_AHEAD:
            done = ahead is None or barriers.b_merge_ahead(state, ahead.state, cfg) >= 0
        else:
            done = behind is None or not behind.is_cav or \
                barriers.b_merge_behind(state, behind.state, cfg) >= 0
        if done:
            cs.suppressed_constraints.discard(label)
    return cs


class CavController:
    """Stateful wrapper running one CAV's controller tick by tick."""

    def __init__(self, vid: int, state: VehicleState, t: float, cfg: ScenarioConfig):
        self.vid = vid
        self.cfg = cfg
        self.v_cruise = min(max(state.velocity, FALL_BEHIND_MIN_SPEED), cfg.v_max)
        self.cs = CavControllerState(None, retain_law(state.position, state.velocity, t))
        self.last_status = "Optimal"

    def recovery_law(self, state: VehicleState, t: float) -> LinearControlLaw:
        """Energy-optimal return to the entry speed, reached at M."""
        return _target_law(state.position, state.velocity, self.cfg.L, self.v_cruise, t, self.cfg)

    def update_mode(self, state: VehicleState, t: float, neighbours: Assignment,
                    seq: MergeSequence, ahead: Optional[Neighbor], behind: Optional[Neighbor],
                    baseline: Optional[Assignment] = None) -> bool:
        """Advance the mode machine; True when a new manoeuvre started.

        ``neighbours`` holds the unthresholded sequence neighbours. A CAV without
        history is compared against ``baseline``, its neighbours in s0.
        """
        cs, cfg = self.cs, self.cfg
        restore_suppressed(cs, state, ahead, behind, cfg)
        prev = cs.prev_assignment if cs.prev_assignment is not None else baseline
        mode, law = select_mode(prev, neighbours, seq, state, t, cfg)
        started = mode is not ControllerMode.RETAIN
        if mode is ControllerMode.JUMP_AHEAD:
            cs.suppressed_constraints.discard(MERGE_AHEAD)
            cs.suppressed_constraints.add(MERGE_BEHIND)
            cs.mode, cs.active_law = mode, law
        elif mode is ControllerMode.FALL_BEHIND:
            cs.suppressed_constraints.discard(MERGE_BEHIND)
            cs.suppressed_constraints.add(MERGE_AHEAD)
            cs.mode, cs.active_law = mode, law
        elif cs.mode is not ControllerMode.RETAIN and not cs.suppressed_constraints:
            # manoeuvre completed: head back to cruise speed
            cs.mode, cs.active_law = ControllerMode.RETAIN, self.recovery_law(state, t)
        restore_suppressed(cs, state, ahead, behind, cfg)
        cs.prev_assignment = neighbours
        return started

    def enter_az(self, state: VehicleState, t: float) -> None:
        """No resequencing past the AZ boundary: every merge row is enforced again."""
        cs = self.cs
        if cs.suppressed_constraints or cs.mode is not ControllerMode.RETAIN:
            cs.suppressed_constraints.clear()
            cs.mode, cs.active_law = ControllerMode.RETAIN, self.recovery_law(state, t)

    def control(self, state: VehicleState, t: float, assignment: Assignment,
                ip: Optional[Neighbor] = None, ahead: Optional[Neighbor] = None,
                behind: Optional[Neighbor] = None, law: Optional[LinearControlLaw] = None) -> float:
        cs, cfg = self.cs, self.cfg
        nominal = None
        if cs.last_solution is not None:
            nominal = np.r_[cs.last_solution[1:], cs.last_solution[-1]]
        qp = build_qp(state, t, assignment, law or cs.active_law, cfg, ip=ip, ahead=ahead,
                      behind=behind, suppressed=cs.suppressed_constraints, nominal=nominal)
        sol = solve_qp(qp)
        self.last_status = sol.status
        if sol.status != "Optimal":
            cs.infeasible_events += 1
            cs.last_solution = None
            labels = np.asarray(qp.labels)
            box = np.isin(labels, ["u_min", "u_max"])
            now = qp.steps == 0
            # relax in order: later horizon steps, then the row protecting the follower
            for keep in (now | box, (now & (labels != MERGE_BEHIND)) | box):
                sol = solve_qp(qp, np.flatnonzero(keep))
                if sol.status == "Optimal":
                    break
            if sol.status != "Optimal":
                # a safety row that even u_min cannot meet counts as violated
                vals = []
                if ip is not None:
                    vals.append(barriers.b_rear_end(state, ip.state, cfg))
                if ahead is not None and MERGE_AHEAD not in cs.suppressed_constraints:
                    vals.append(barriers.b_merge_ahead(state, ahead.state, cfg))
                hard = now & np.isin(labels, ["rear_end", MERGE_AHEAD])
                vals.extend(qp.A[hard, 0] * cfg.u_min - qp.lb[hard])
                u = fallback_on_infeasible(vals, cfg)
                log.debug("CAV %s: QP infeasible at t=%.2f, fallback u=%.3f", self.vid, t, u)
                return u
            return float(min(max(sol.u[0], cfg.u_min), cfg.u_max))
        cs.last_solution = sol.u
        return float(min(max(sol.u[0], cfg.u_min), cfg.u_max))
