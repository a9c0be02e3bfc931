"""Command-line front end: single runs, penetration sweeps and the five-vehicle scenario."""

from __future__ import annotations

import argparse
import csv
import logging
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import sim
from .core import ConfigError, ScenarioConfig, load_config
from .metrics import METRIC_FIELDS, export

log = logging.getLogger("mergesim")

POLICIES = {"ss": "SS", "sdf": "SDF"}


def _out_dir(arg) -> Path:
    path = Path(arg or os.environ.get("MERGESIM_OUT_DIR") or "out")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _base_config(args, **extra) -> ScenarioConfig:
    overrides = dict(seed=args.seed, penetration_rate=getattr(args, "penetration", None),
                     n_vehicles=args.vehicles, **extra)
    if args.config:
        return load_config(args.config, **overrides)
    return ScenarioConfig(**{k: v for k, v in overrides.items() if v is not None})


def _stem(cfg: ScenarioConfig) -> str:
    return f"{cfg.sequencing_policy.lower()}_p{cfg.penetration_rate:g}_s{cfg.seed}"


def _write_outputs(result: sim.RunResult, out: Path, fmt: str) -> list:
    stem = _stem(result.config)
    paths = []
    if fmt in ("csv", "both"):
        paths.append(export(result, "CSV", out / f"{stem}.csv"))
    if fmt in ("json", "both"):
        paths.append(export(result, "JSON", out / f"{stem}.json"))
    paths.append(sim.write_event_log(result, out / f"{stem}.events.jsonl"))
    return paths


def _report(result: sim.RunResult) -> str:
    state = "partial" if result.partial else "complete"
    audit = "passed" if result.audit_passed else "FAILED"
    return (f"{result.config.sequencing_policy} pen={result.config.penetration_rate:g} "
            f"seed={result.seed}: {len(result.exited())} exited ({state}), audit {audit}")


def cmd_run(args) -> int:
    cfg = _base_config(args, sequencing_policy=POLICIES[args.policy])
    out = _out_dir(args.out_dir)
    result = sim.run(cfg, keep_traces=False)
    for path in _write_outputs(result, out, args.format):
        log.info("wrote %s", path)
    print(_report(result))
    return 0 if not result.partial and result.audit_passed else 1


def _sweep_cell(cfg: ScenarioConfig):
    result = sim.run(cfg, keep_traces=False)
    rows = result.vehicle_rows()
    means = {m: statistics.fmean(r[m] for r in rows) if rows else float("nan") for m in METRIC_FIELDS}
    return cfg, means, result.partial, result.audit_passed


def _parse_floats(text: str) -> list:
    return [float(p) for p in text.split(",") if p.strip()]


def _parse_seeds(text: str) -> list:
    """``0-19`` or ``1,2,5``."""
    if "-" in text and "," not in text:
        lo, hi = (int(p) for p in text.split("-"))
        return list(range(lo, hi + 1))
    return [int(p) for p in text.split(",") if p.strip()]


def summary_table(long_rows: list) -> str:
    """Table-I-shaped text: metrics by row, penetration and policy by column."""
    pens = sorted({r["penetration"] for r in long_rows})
    pols = [p for p in ("SDF", "SS") if any(r["policy"] == p for r in long_rows)]
    cols = [(pen, pol) for pen in pens for pol in pols]
    head = f"{'metric':<14}" + "".join(f"{f'{pen:.0%} {pol}':>14}" for pen, pol in cols)
    lines = [head]
    for metric in METRIC_FIELDS:
        cells = []
        for pen, pol in cols:
            vals = [r["value"] for r in long_rows
                    if r["penetration"] == pen and r["policy"] == pol and r["metric"] == metric]
            cells.append(f"{statistics.fmean(vals):>14.3f}" if vals else f"{'-':>14}")
        lines.append(f"{metric:<14}" + "".join(cells))
    return "\n".join(lines)


def cmd_sweep(args) -> int:
    base = _base_config(args)
    pens = _parse_floats(args.penetrations)
    seeds = _parse_seeds(args.seeds)
    cells = [base.replace(sequencing_policy=pol, penetration_rate=pen, seed=seed)
             for pen in pens for pol in ("SS", "SDF") for seed in seeds]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_sweep_cell, cells))
    else:
        results = [_sweep_cell(cfg) for cfg in cells]

    long_rows, ok = [], True
    for cfg, means, partial, audit in results:
        if partial or not audit:
            ok = False
            log.warning("cell %s flagged: partial=%s audit_passed=%s", _stem(cfg), partial, audit)
        for metric in METRIC_FIELDS:
            long_rows.append({"policy": cfg.sequencing_policy, "penetration": cfg.penetration_rate,
                              "seed": cfg.seed, "metric": metric, "value": means[metric]})
    out = _out_dir(args.out_dir)
    path = out / "sweep.csv"
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, ["policy", "penetration", "seed", "metric", "value"], lineterminator="\n")
        w.writeheader()
        for r in long_rows:
            w.writerow({**r, "value": repr(r["value"])})
    print(summary_table(long_rows))
    print(f"{len(cells)} runs, long-format results in {path}")
    return 0 if ok else 1


def cmd_fig6(args) -> int:
    out = _out_dir(args.out_dir)
    ok = True
    for pol in ("SS", "SDF"):
        result = sim.run_world(sim.fig6_world(pol), t_limit=120.0)
        ok &= not result.partial and result.audit_passed
        classes = {r.id: r.cls.value for r in result.records}
        path = out / f"fig6_{pol.lower()}_velocity.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "vehicle", "class", "velocity"])
            for vid, trace in sorted(sim.velocity_traces(result).items()):
                for t, v in trace:
                    w.writerow([f"{t:.1f}", vid, classes[vid], repr(v)])
        mins = {vid: min(v for _, v in tr) for vid, tr in sim.velocity_traces(result).items()}
        cav_min = ", ".join(f"{vid}: {mins[vid]:.2f}" for vid in sim.FIG6_IDS["cav"])
        print(f"{pol}: CAV minimum speeds (m/s) {cav_min}; traces in {path}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mergesim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, penetration=True):
        p.add_argument("config", nargs="?", help="key = value scenario file")
        p.add_argument("--seed", type=int)
        if penetration:
            p.add_argument("--penetration", type=float, help="CAV share in [0, 1]")
        p.add_argument("--vehicles", type=int, help="vehicles to spawn")
        p.add_argument("--out-dir", help="output directory (default $MERGESIM_OUT_DIR or ./out)")

    p = sub.add_parser("run", help="simulate one scenario and export per-vehicle metrics")
    common(p)
    p.add_argument("--policy", choices=sorted(POLICIES), default="ss")
    p.add_argument("--format", choices=("csv", "json", "both"), default="both")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="SS and SDF over penetration rates and seeds")
    common(p, penetration=False)
    p.add_argument("--penetrations", default="0.2,0.4,0.6,0.8")
    p.add_argument("--seeds", default="0-19", help="range 'a-b' or list 'a,b,c'")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fig6", help="five-vehicle scenario velocity traces under both policies")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_fig6)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"mergesim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
