"""Command-line front end: ``analyze``, ``simulate`` and ``sweep``.

Exit codes: 0 success, 2 configuration error, 3 controller synthesis
failure, 4 collision abort.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import metrics
from .config import ConfigError, RunConfig
from .composition import segment_probabilities
from .frequency import STABILITY_TOL, find_critical_penetration, string_stability
from .lqr import SynthesisError
from .sim import CollisionError, Trajectory, run

log = logging.getLogger("mixed_platoon")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SYNTHESIS = 3
EXIT_COLLISION = 4

OUT_ENV = "MIXED_PLATOON_OUT"
TRAJECTORY_HEADER = ["t", "vehicle_id", "class", "position", "velocity", "acceleration"]


def fmt(x) -> str:
    return f"{float(x):.9g}"


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _cell_name(topology, m_max, p) -> str:
    return f"{topology.value}_M{m_max}_p{fmt(p)}"


def cmd_analyze(cfg: RunConfig, out: Path, out_format: str = "csv") -> list[dict]:
    out.mkdir(parents=True, exist_ok=True)
    grid = cfg.grid
    records, bode_json, prob_rows = [], {}, []
    critical = {}
    for topology, m_max, p in cfg.scenario_cells():
        scenario = cfg.scenario(topology, m_max, p)
        report = string_stability(scenario, grid)
        records.append(
            {
                "topology": topology.value,
                "p": p,
                "M": m_max,
                "peak_L": float(fmt(report.peak)),
                "argmax_omega": float(fmt(report.argmax_omega)),
                "stable": bool(report.stable),
            }
        )
        key = (topology.value, m_max)
        if key not in critical:
            critical[key] = find_critical_penetration(scenario, grid, cfg.data["analysis"]["step"])

        seg_keys = ["HDV", "CAV"] + list(range(2, m_max + 1))
        columns = ["omega", "L", "product"] + [f"G_{k}" for k in seg_keys]
        with np.errstate(over="ignore"):
            product = np.exp(report.log_mag)
        rows = [report.omegas, report.log_mag, product] + [report.segment_mags[k] for k in seg_keys]
        if out_format == "json":
            bode_json[_cell_name(topology, m_max, p)] = {c: [float(fmt(v)) for v in r] for c, r in zip(columns, rows)}
        else:
            with open(out / f"bode_{_cell_name(topology, m_max, p)}.csv", "w", newline="") as fh:
                w = _writer(fh)
                w.writerow(columns)
                for vals in zip(*rows):
                    w.writerow([fmt(v) for v in vals])

        probs = segment_probabilities(p, m_max)
        prob_rows.append([topology.value, m_max, fmt(p), "size_M", m_max, fmt(probs.p_size_M)])
        prob_rows += [[topology.value, m_max, fmt(p), "size_m", m, fmt(v)] for m, v in probs.p_size_m.items()]
        prob_rows.append([topology.value, m_max, fmt(p), "CAV", "", fmt(probs.p_cav)])
        prob_rows.append([topology.value, m_max, fmt(p), "HDV", "", fmt(probs.p_hdv)])

    with open(out / "probabilities.csv", "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["topology", "M", "p", "kind", "m", "probability"])
        w.writerows(prob_rows)
    if out_format == "json":
        _write_json(out / "bode.json", bode_json)
    _write_json(
        out / "verdicts.json",
        {
            "tolerance": STABILITY_TOL,
            "records": records,
            "critical_penetration": [
                {"topology": t, "M": m, "p": c} for (t, m), c in critical.items()
            ],
            "config": cfg.data,
        },
    )
    return records


def write_trajectory(path: Path, traj: Trajectory, abort: CollisionError | None = None) -> None:
    n = traj.n
    classes = [c.value for c in traj.classes]
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(TRAJECTORY_HEADER)
        for k, t in enumerate(traj.t):
            tt = fmt(t)
            pos, vel, acc = traj.position[k], traj.velocity[k], traj.acceleration[k]
            for i in range(1, n + 1):
                w.writerow([tt, i, classes[i - 1], fmt(pos[i]), fmt(vel[i]), fmt(acc[i])])
        if abort is not None:
            w.writerow(["ABORT", abort.index, "collision", "", "", fmt(abort.t)])


def _metrics_dict(report: metrics.MetricsReport) -> dict:
    return {
        "sd": report.sd,
        "mad": report.mad,
        "sd_normalized": report.sd_normalized,
        "mad_normalized": report.mad_normalized,
        "peak_deviation": [float(fmt(x)) for x in report.peak_deviation[1:]],
        "head_peak_deviation": float(fmt(report.peak_deviation[0])),
    }


def cmd_simulate(cfg: RunConfig, out: Path) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    s = cfg.data["simulate"]
    sim_cfg = cfg.sim_config(s["topology"], s["m_max"], s["p"], s["seed"])
    try:
        traj = run(sim_cfg)
    except CollisionError as err:
        if err.partial is not None:
            write_trajectory(out / "trajectory.csv", err.partial, abort=err)
        _write_json(out / "metrics.json", {"aborted": True, "reason": str(err), "config": cfg.data})
        raise
    write_trajectory(out / "trajectory.csv", traj)
    result = _metrics_dict(metrics.evaluate(traj))
    _write_json(out / "metrics.json", {**result, "aborted": False, "config": cfg.data})
    return result


def _sweep_job(args):
    cfg_data, topology, m_max, p, seed = args
    cfg = RunConfig(cfg_data)
    try:
        report = metrics.evaluate(run(cfg.sim_config(topology, m_max, p, seed)))
        return {"sd": report.sd, "mad": report.mad, "error": ""}
    except (CollisionError, SynthesisError) as err:
        return {"sd": float("nan"), "mad": float("nan"), "error": f"{type(err).__name__}: {err}"}


def cmd_sweep(cfg: RunConfig, out: Path) -> list[dict]:
    out.mkdir(parents=True, exist_ok=True)
    seeds = sorted(cfg.seeds)
    cells = cfg.scenario_cells()
    jobs = [(cfg.data, t, m, p, s) for t, m, p in cells for s in seeds]
    workers = cfg.data["workers"]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_sweep_job(j) for j in jobs]

    with open(out / "runs.csv", "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["topology", "M", "p", "seed", "sd", "mad", "failed"])
        for (_, t, m, p, s), r in zip(jobs, results):
            w.writerow([t.value, m, fmt(p), s, fmt(r["sd"]), fmt(r["mad"]), int(bool(r["error"]))])

    rows = []
    for idx, (t, m, p) in enumerate(cells):
        chunk = results[idx * len(seeds) : (idx + 1) * len(seeds)]
        ok = [r for r in chunk if not r["error"]]
        sd_v = np.array([r["sd"] for r in ok])
        mad_v = np.array([r["mad"] for r in ok])

        def stats(a):
            return (a.mean(), a.min(), a.max()) if a.size else (float("nan"),) * 3

        rows.append(
            {
                "topology": t.value, "M": m, "p": p, "n_seeds": len(ok), "n_failed": len(chunk) - len(ok),
                **dict(zip(("sd_mean", "sd_min", "sd_max"), stats(sd_v))),
                **dict(zip(("mad_mean", "mad_min", "mad_max"), stats(mad_v))),
            }
        )
        for r in chunk:
            if r["error"]:
                log.warning("%s M=%d p=%s failed: %s", t.value, m, fmt(p), r["error"])

    columns = ["topology", "M", "p", "n_seeds", "n_failed", "sd_mean", "sd_min", "sd_max",
               "mad_mean", "mad_min", "mad_max", "failed"]
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([r["topology"], r["M"], fmt(r["p"]), r["n_seeds"], r["n_failed"]]
                       + [fmt(r[c]) for c in columns[5:11]] + [int(r["n_failed"] > 0)])
    return rows


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixed-platoon", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("analyze", "frequency-domain string-stability grid"),
        ("simulate", "one nonlinear perturbation run"),
        ("sweep", "SD/MAD over a scenario grid and seed list"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="JSON config file (defaults used when omitted)")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config entry, e.g. --set sim.n=50 (repeatable)")
        p.add_argument("--out", type=Path, help=f"output directory (else ${OUT_ENV}, else ./out/<command>)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--seeds", help="comma-separated seed list")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    overrides = list(args.overrides)
    if args.seeds:
        overrides.append(f"seeds={args.seeds}")
    try:
        cfg = RunConfig.load(args.config, overrides)
        if args.command == "simulate" and args.seeds:
            if len(cfg.seeds) != 1:
                raise ConfigError("simulate takes a single seed")
            cfg = RunConfig.from_dict({**cfg.data, "simulate": {**cfg.data["simulate"], "seed": cfg.seeds[0]}})
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = args.out or Path(os.environ.get(OUT_ENV, "out")) / args.command
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(cfg.to_json())
    try:
        if args.command == "analyze":
            records = cmd_analyze(cfg, out, args.format)
            log.info("%d verdict records written to %s", len(records), out)
        elif args.command == "simulate":
            res = cmd_simulate(cfg, out)
            log.info("SD=%.4f MAD=%.4f", res["sd"], res["mad"])
        else:
            rows = cmd_sweep(cfg, out)
            log.info("%d sweep rows written to %s", len(rows), out)
    except SynthesisError as exc:
        print(f"controller synthesis failed: {exc}", file=sys.stderr)
        return EXIT_SYNTHESIS
    except CollisionError as exc:
        print(f"simulation aborted: {exc}", file=sys.stderr)
        return EXIT_COLLISION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
