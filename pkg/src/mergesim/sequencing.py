"""Upper-level coordinator: SDF ordering, merging pairs and safe resequencing.

A sequence is safe when no CAV has an HDV as the opposite-road vehicle it
merges ahead of (after distance thresholding). Candidate sequences are the
order-preserving interleavings of the two roads.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .core import RoadId, ScenarioConfig, TableInconsistency, VehicleRecord, by_remaining_distance

SDF = "SDF"
SAFE_GENERATED = "SafeGenerated"
CONSTRUCTIVE = "ConstructiveFallback"


class NoCavInSz(ValueError):
    pass


@dataclass(frozen=True)
class MergeSequence:
    order: tuple
    source: str = SDF

    def __len__(self):
        return len(self.order)

    def __iter__(self):
        return iter(self.order)

    def position(self, vid) -> int:
        """1-based position of ``vid``; 0 when absent (already past the SZ)."""
        try:
            return self.order.index(vid) + 1
        except ValueError:
            return 0


@dataclass(frozen=True)
class Assignment:
    cav: int
    ahead: Optional[int] = None
    behind: Optional[int] = None


@dataclass(frozen=True)
class SequencingOutcome:
    sequence: MergeSequence
    assignments: tuple
    resequenced: bool = False

    def assignment_for(self, vid) -> Optional[Assignment]:
        for a in self.assignments:
            if a.cav == vid:
                return a
        return None


EMPTY_OUTCOME = SequencingOutcome(MergeSequence(()), ())


def sdf_sequence(sz_records: Sequence[VehicleRecord]) -> MergeSequence:
    return MergeSequence(tuple(r.id for r in by_remaining_distance(sz_records)), SDF)


def _lookup(table: Mapping, vid) -> VehicleRecord:
    try:
        return table[vid]
    except KeyError:
        raise TableInconsistency(f"vehicle {vid} not in coordinator table") from None


def neighbors(seq: MergeSequence, i, roads: Mapping) -> tuple:
    """Nearest opposite-road predecessor and successor of ``i`` in ``seq``."""
    if i not in roads:
        raise TableInconsistency(f"vehicle {i} not in coordinator table")
    try:
        p = seq.order.index(i)
    except ValueError:
        raise TableInconsistency(f"vehicle {i} not in sequence") from None
    r = roads[i]
    ahead = next((j for j in reversed(seq.order[:p]) if roads[j] != r), None)
    behind = next((j for j in seq.order[p + 1:] if roads[j] != r), None)
    return ahead, behind


def delta_minus(i: VehicleRecord, j: VehicleRecord, cfg: ScenarioConfig) -> float:
    """Merge-ahead margin of ``i`` over a trailing opposite-road vehicle ``j``."""
    return i.x - j.x - cfg.Phi(j.x) * j.v - cfg.delta


def delta_plus(i: VehicleRecord, j: VehicleRecord, cfg: ScenarioConfig) -> float:
    """Merge-behind margin of ``i`` under a leading opposite-road vehicle ``j``."""
    return j.x - i.x - cfg.Phi(i.x) * i.v - cfg.delta


def merging_pair(i: VehicleRecord, hat_plus: Optional[VehicleRecord],
                 hat_minus: Optional[VehicleRecord], cfg: ScenarioConfig) -> Assignment:
    ahead = hat_plus.id if hat_plus is not None and delta_plus(i, hat_plus, cfg) < 0 else None
    behind = hat_minus.id if hat_minus is not None and delta_minus(i, hat_minus, cfg) < 0 else None
    return Assignment(i.id, ahead, behind)


def _adjacent_opposite(recs: list) -> tuple:
    n = len(recs)
    prev_on = {RoadId.MAIN: None, RoadId.SIDE: None}
    ahead_of = [None] * n
    for k, r in enumerate(recs):
        ahead_of[k] = prev_on[r.road.other]
        prev_on[r.road] = r
    next_on = {RoadId.MAIN: None, RoadId.SIDE: None}
    behind_of = [None] * n
    for k in range(n - 1, -1, -1):
        r = recs[k]
        behind_of[k] = next_on[r.road.other]
        next_on[r.road] = r
    return ahead_of, behind_of


def sequence_neighbors(seq: MergeSequence, table: Mapping) -> dict:
    """Unthresholded nearest opposite-road (ahead, behind) of every CAV in ``seq``."""
    recs = [_lookup(table, vid) for vid in seq.order]
    ahead_of, behind_of = _adjacent_opposite(recs)
    ident = lambda rec: None if rec is None else rec.id
    return {r.id: Assignment(r.id, ident(ahead_of[k]), ident(behind_of[k]))
            for k, r in enumerate(recs) if r.is_cav}


def assignments(seq: MergeSequence, table: Mapping, cfg: ScenarioConfig) -> tuple:
    """Thresholded (ahead, behind) for every CAV in ``seq``, in sequence order."""
    recs = [_lookup(table, vid) for vid in seq.order]
    ahead_of, behind_of = _adjacent_opposite(recs)
    return tuple(merging_pair(r, ahead_of[k], behind_of[k], cfg)
                 for k, r in enumerate(recs) if r.is_cav)


def _unsafe_pair(cav: VehicleRecord, follower: Optional[VehicleRecord], cfg) -> bool:
    return (cav.is_cav and follower is not None and not follower.is_cav
            and delta_minus(cav, follower, cfg) < 0)


def is_safe(seq: MergeSequence, table: Mapping, cfg: ScenarioConfig) -> bool:
    for a in assignments(seq, table, cfg):
        if a.behind is not None and not table[a.behind].is_cav:
            return False
    return True


def _road_lists(s0: MergeSequence, table: Mapping) -> tuple:
    r1 = [v for v in s0.order if _lookup(table, v).road is RoadId.MAIN]
    r2 = [v for v in s0.order if table[v].road is RoadId.SIDE]
    return r1, r2


def interleavings(road1: Sequence, road2: Sequence):
    """All order-preserving merges of the two road lists."""
    n1, n2 = len(road1), len(road2)
    for slots in itertools.combinations(range(n1 + n2), n1):
        out, a, b = [], 0, 0
        slot_set = set(slots)
        for p in range(n1 + n2):
            if p in slot_set:
                out.append(road1[a]); a += 1
            else:
                out.append(road2[b]); b += 1
        yield tuple(out)


def enumerate_safe_sequences(road1: Sequence, road2: Sequence, table: Mapping,
                             cfg: ScenarioConfig, cap: Optional[int] = None) -> list:
    cap = cfg.enum_cap if cap is None else cap
    if math.comb(len(road1) + len(road2), len(road1)) > cap:
        s0 = sdf_sequence([table[v] for v in itertools.chain(road1, road2)])
        out = [constructive_safe_sequence(s0, table, cfg)]
        if is_safe(s0, table, cfg) and s0.order != out[0].order:
            out.append(s0)
        return out
    return [MergeSequence(order, SAFE_GENERATED)
            for order in interleavings(road1, road2)
            if is_safe(MergeSequence(order), table, cfg)]


def disruption(s: MergeSequence, s0: MergeSequence) -> int:
    if len(s.order) != len(s0.order) or set(s.order) != set(s0.order):
        raise ValueError("sequences must hold the same vehicles")
    return sum(1 for a, b in zip(s.order, s0.order) if a != b)


def _road_speed_orientation(s0: MergeSequence, table: Mapping) -> int:
    """+1 when the main road is at least as fast on average (minimise the
    position-sum objective), -1 otherwise (maximise it)."""
    speeds = {RoadId.MAIN: [], RoadId.SIDE: []}
    for vid in s0.order:
        rec = table[vid]
        speeds[rec.road].append(rec.v)
    avg = {r: (sum(vs) / len(vs) if vs else 0.0) for r, vs in speeds.items()}
    return 1 if avg[RoadId.MAIN] >= avg[RoadId.SIDE] else -1


def road_priority_score(s: MergeSequence, table: Mapping) -> int:
    """Sum of 1-based positions of main-road vehicles minus those of side-road ones."""
    return sum((p if table[v].road is RoadId.MAIN else -p) for p, v in enumerate(s.order, 1))


def select_optimal(safe_set, s0: MergeSequence, table: Mapping) -> MergeSequence:
    safe_set = list(safe_set)
    if not safe_set:
        raise ValueError("no safe sequence to select from")
    orient = _road_speed_orientation(s0, table)
    return min(safe_set, key=lambda s: (disruption(s, s0),
                                        orient * road_priority_score(s, table),
                                        s.order))


def constructive_safe_sequence(s0: MergeSequence, table: Mapping, cfg: ScenarioConfig) -> MergeSequence:
    """Always-safe sequence built around the first CAV of ``s0``.

    Everything ahead of that CAV in ``s0`` is HDV traffic and keeps its place;
    then the rest of the opposite road; then the CAV and its own road.
    """
    recs = [_lookup(table, v) for v in s0.order]
    first = next((k for k, r in enumerate(recs) if r.is_cav), None)
    if first is None:
        raise NoCavInSz("no CAV in the sequencing zone")
    if is_safe(s0, table, cfg):
        return s0
    road = recs[first].road
    prefix = [r.id for r in recs[:first]]
    rest_other = [r.id for r in recs[first:] if r.road is not road]
    rest_own = [r.id for r in recs[first:] if r.road is road]
    return MergeSequence(tuple(prefix + rest_other + rest_own), CONSTRUCTIVE)


def optimal_safe_sequence(s0: MergeSequence, table: Mapping, cfg: ScenarioConfig) -> Optional[MergeSequence]:
    """Least-disruptive safe interleaving via dynamic programming on the
    (placed-from-main, placed-from-side) grid.

    Placing a vehicle leaves the next unplaced opposite-road vehicle as its
    follower, so safety, disruption and the road-priority score are all
    additive along grid paths. Ties resolve to the lexicographically smallest
    id list, identical to :func:`select_optimal` over the full safe set.
    """
    r1, r2 = _road_lists(s0, table)
    n1, n2 = len(r1), len(r2)
    recs1 = [table[v] for v in r1]
    recs2 = [table[v] for v in r2]
    orient = _road_speed_orientation(s0, table)
    order0 = s0.order
    INF = (math.inf, math.inf)

    def moves(a, b):
        p = a + b
        if a < n1:
            follower = recs2[b] if b < n2 else None
            if not _unsafe_pair(recs1[a], follower, cfg):
                yield r1[a], (int(order0[p] != r1[a]), orient * (p + 1)), (a + 1, b)
        if b < n2:
            follower = recs1[a] if a < n1 else None
            if not _unsafe_pair(recs2[b], follower, cfg):
                yield r2[b], (int(order0[p] != r2[b]), -orient * (p + 1)), (a, b + 1)

    best = [[INF] * (n2 + 1) for _ in range(n1 + 1)]
    best[n1][n2] = (0, 0)
    for a in range(n1, -1, -1):
        for b in range(n2, -1, -1):
            if a == n1 and b == n2:
                continue
            cand = INF
            for _, (dd, ds), (na, nb) in moves(a, b):
                tail = best[na][nb]
                tot = (dd + tail[0], ds + tail[1])
                if tot < cand:
                    cand = tot
            best[a][b] = cand
    if best[0][0] == INF:
        return None
    out, a, b = [], 0, 0
    while (a, b) != (n1, n2):
        target = best[a][b]
        choice = None
        for vid, (dd, ds), (na, nb) in moves(a, b):
            tail = best[na][nb]
            if (dd + tail[0], ds + tail[1]) == target and (choice is None or vid < choice[0]):
                choice = (vid, na, nb)
        out.append(choice[0])
        a, b = choice[1], choice[2]
    return MergeSequence(tuple(out), SAFE_GENERATED)


def sdf_outcome(sz_records: Sequence[VehicleRecord], cfg: ScenarioConfig) -> SequencingOutcome:
    """SDF baseline: s0 with thresholded assignments, no resequencing."""
    table = {r.id: r for r in sz_records}
    s0 = sdf_sequence(sz_records)
    return SequencingOutcome(s0, assignments(s0, table, cfg), False)


def committed_sequence(prev: MergeSequence, s0: MergeSequence, table: Mapping) -> Optional[MergeSequence]:
    """Last tick's order over the vehicles still in the SZ, newcomers appended in s0 order.

    None when the result would break within-road order.
    """
    present = set(s0.order)
    old = [vid for vid in prev.order if vid in present]
    seen = set(old)
    order = tuple(old + [vid for vid in s0.order if vid not in seen])
    for road in RoadId:
        if [v for v in order if table[v].road is road] != [v for v in s0.order if table[v].road is road]:
            return None
    return MergeSequence(order, prev.source)


def coordinate(sz_records: Sequence[VehicleRecord], cfg: ScenarioConfig,
               prev: Optional[SequencingOutcome] = None) -> SequencingOutcome:
    """One coordinator invocation over the SZ snapshot (safe-sequencing policy)."""
    if not sz_records:
        return EMPTY_OUTCOME
    table = {r.id: r for r in sz_records}
    s0 = sdf_sequence(sz_records)
    asg0 = assignments(s0, table, cfg)
    if prev is not None and prev.resequenced and cfg.sequence_commitment:
        kept = committed_sequence(prev.sequence, s0, table)
        if kept is not None and kept.order != s0.order and is_safe(kept, table, cfg):
            return SequencingOutcome(kept, assignments(kept, table, cfg), True)
    if not any(a.behind is not None and not table[a.behind].is_cav for a in asg0):
        return SequencingOutcome(s0, asg0, False)
    if cfg.sequencing_method == "dp":
        chosen = optimal_safe_sequence(s0, table, cfg)
        if chosen is None:
            chosen = constructive_safe_sequence(s0, table, cfg)
    else:
        r1, r2 = _road_lists(s0, table)
        safe = enumerate_safe_sequences(r1, r2, table, cfg)
        if not safe:
            safe = [constructive_safe_sequence(s0, table, cfg)]
        chosen = select_optimal(safe, s0, table)
    return SequencingOutcome(chosen, assignments(chosen, table, cfg), chosen.order != s0.order)
