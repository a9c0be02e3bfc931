"""Per-vehicle and aggregate run metrics, plus CSV and JSON exporters."""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Optional

from .core import ScenarioConfig, dump_config

CSV_FIELDS = ("id", "class", "road", "t_entry", "t_exit", "travel_time", "l2_energy", "fuel",
              "min_rear_gap_residual", "mp_clearance_residual")
METRIC_FIELDS = ("travel_time", "l2_energy", "fuel")


@dataclass
class VehicleMetrics:
    travel_time: float = 0.0
    l2_energy: float = 0.0
    fuel: float = 0.0
    min_rear_gap_residual: float = math.inf
    mp_clearance_residual: float = math.nan


def fuel_rate(v: float, u: float, coeffs) -> float:
    """Cruise polynomial in v plus an acceleration term floored at zero."""
    w0, w1, w2, w3, r0, r1, r2 = coeffs
    cruise = w0 + v * (w1 + v * (w2 + v * w3))
    accel = (r0 + v * (r1 + v * r2)) * u
    return cruise + max(accel, 0.0)


def check_fuel_coeffs(cfg: ScenarioConfig, samples: int = 200) -> None:
    """Fuel must stay non-negative over [0, v_max] at zero acceleration."""
    for k in range(samples + 1):
        v = cfg.v_max * k / samples
        if fuel_rate(v, 0.0, cfg.fuel_coeffs) < 0:
            raise ValueError(f"fuel model negative at v={v:.2f} m/s")


def accumulate(m: VehicleMetrics, u: float, v: float, dt: float, cfg: ScenarioConfig,
               rear_residual: Optional[float] = None) -> VehicleMetrics:
    """Add one integration interval starting at speed ``v`` under control ``u``."""
    m.l2_energy += 0.5 * u * u * dt
    m.fuel += fuel_rate(v, u, cfg.fuel_coeffs) * dt
    if rear_residual is not None:
        m.min_rear_gap_residual = min(m.min_rear_gap_residual, rear_residual)
    return m


@dataclass(frozen=True)
class Stat:
    mean: float
    sd: float
    n: int


@dataclass(frozen=True)
class AggregateMetrics:
    overall: dict
    by_class: dict

    def to_dict(self) -> dict:
        conv = lambda d: {k: asdict(s) for k, s in d.items()}
        return {"overall": conv(self.overall), "by_class": {c: conv(d) for c, d in self.by_class.items()}}


def _stats(rows: list) -> dict:
    out = {}
    for f in METRIC_FIELDS:
        vals = [float(r[f]) for r in rows]
        sd = statistics.stdev(vals) if len(vals) > 1 else 0.0
        out[f] = Stat(statistics.fmean(vals), sd, len(vals))
    return out


def aggregate(rows: Iterable[dict]) -> AggregateMetrics:
    """Means and SDs over per-vehicle rows (dicts with CSV_FIELDS keys)."""
    rows = list(rows)
    if not rows:
        raise ValueError("no exited vehicles to aggregate")
    by_class = {}
    for cls in sorted({r["class"] for r in rows}):
        by_class[cls] = _stats([r for r in rows if r["class"] == cls])
    return AggregateMetrics(_stats(rows), by_class)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else ""
    return str(x)


def to_csv(rows: list, agg: Optional[AggregateMetrics]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow([_fmt(r[f]) for f in CSV_FIELDS])
    if agg is not None:
        w.writerow([])
        w.writerow(["# summary", "scope", "metric", "mean", "sd", "n"])
        scopes = [("all", agg.overall)] + sorted(agg.by_class.items())
        for scope, stats in scopes:
            for f in METRIC_FIELDS:
                s = stats[f]
                w.writerow(["# summary", scope, f, repr(s.mean), repr(s.sd), s.n])
    return buf.getvalue()


def read_csv_rows(path) -> list:
    """Per-vehicle rows of an exported CSV (summary block skipped)."""
    rows = []
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            if not r["id"] or r["id"].startswith("#"):
                break
            for f in CSV_FIELDS[3:]:
                r[f] = float(r[f]) if r[f] else math.nan
            rows.append(r)
    return rows


def export(result, fmt: str, path) -> Path:
    """Write a RunResult as CSV or JSON; returns the path written."""
    path = Path(path)
    rows = result.vehicle_rows()
    agg = aggregate(rows) if rows else None
    fmt = fmt.upper()
    if fmt == "CSV":
        text = to_csv(rows, agg)
    elif fmt == "JSON":
        doc = {
            "seed": result.config.seed,
            "config": dump_config(result.config),
            "partial": result.partial,
            "vehicles": [{k: (v if not isinstance(v, float) or math.isfinite(v) else None)
                          for k, v in r.items()} for r in rows],
            "aggregates": agg.to_dict() if agg else None,
            "audit": result.audit,
            "events": result.events,
        }
        text = json.dumps(doc, indent=1, sort_keys=True)
    else:
        raise ValueError(f"unknown export format {fmt!r}")
    path.write_text(text)
    return path
