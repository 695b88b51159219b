"""Command-line entry point: runs, sweeps, generators, analysis, validation.

Configs are JSON documents with {algorithm, mobility, dataset, exchange,
engine} sections; any command-line flag overrides the corresponding config
value.  Scenario presets 1-3 reproduce the evaluation setups (crowded single
community / sparse single community / three separated communities).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace

from cogsim import dataset as dataset_mod
from cogsim import engine, metrics, mobility
from cogsim.mobility import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def scenario_config(number: int) -> engine.SimConfig:
    """Presets matching the three evaluation scenarios."""
    if number == 1:
        mob = mobility.MobilityConfig(num_nodes=99, grid=1, num_communities=1)
        dcfg = dataset_mod.DatasetConfig(regime="d1")
    elif number == 2:
        mob = mobility.MobilityConfig(num_nodes=50, grid=1, num_communities=1)
        dcfg = dataset_mod.DatasetConfig(regime="d2")
    elif number == 3:
        mob = mobility.MobilityConfig(
            num_nodes=99, grid=6, num_communities=3, travellers_per_community=2
        )
        dcfg = dataset_mod.DatasetConfig(regime="d1")
    else:
        raise ConfigError(f"unknown scenario {number}; choose 1, 2 or 3")
    return engine.SimConfig(mobility=mob, dataset=dcfg)


def add_override_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--scenario", type=int, choices=(1, 2, 3), help="preset scenario")
    parser.add_argument("--algorithm", choices=("ca", "ba"))
    parser.add_argument("--f-min", type=_float_or_inf, dest="f_min")
    parser.add_argument("--w-min", type=float, dest="w_min")
    parser.add_argument("--tag-limit", type=int, dest="tag_limit")
    parser.add_argument("--data-limit", type=int, dest="data_limit")
    parser.add_argument("--theta-rec", type=int, dest="theta_rec")
    parser.add_argument("--duration", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--snapshot-interval", type=float, dest="snapshot_interval")


def _float_or_inf(text: str) -> float:
    return math.inf if text.lower() in ("inf", "infinity") else float(text)


def build_config(args) -> engine.SimConfig:
    """Preset or config file first, then flag overrides on top."""
    if args.scenario is not None:
        cfg = scenario_config(args.scenario)
    else:
        cfg = engine.SimConfig()
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
        cfg = engine.SimConfig.from_json_dict(doc)
        if args.scenario is not None:
            raise ConfigError("pass either --scenario or --config, not both")
    if args.algorithm:
        cfg.algorithm = args.algorithm
    if args.f_min is not None:
        cfg.f_min = args.f_min
    if args.duration is not None:
        cfg.duration = args.duration
        cfg.mobility = replace(cfg.mobility, duration=args.duration)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.snapshot_interval is not None:
        cfg.snapshot_interval = args.snapshot_interval
    ex = {}
    if args.w_min is not None:
        ex["w_min_seconds"] = args.w_min
    if args.tag_limit is not None:
        ex["tag_limit"] = args.tag_limit
    if args.data_limit is not None:
        ex["data_limit"] = args.data_limit
    if args.theta_rec is not None:
        ex["theta_rec"] = args.theta_rec
    if ex:
        cfg.exchange = replace(cfg.exchange, **ex)
    return cfg


def parse_seed_range(text: str) -> list[int]:
    """Seed lists: '1,2,3' or '1..10' (inclusive)."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",") if s]


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cogsim",
        description="Simulate semantic-knowledge and content dissemination "
        "in an opportunistic network.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one simulation run")
    add_override_flags(p_run)
    p_run.add_argument("--out-dir", required=True)
    p_run.add_argument("--dump-snapshots", action="store_true")
    p_run.add_argument("--per-node", action="store_true", help="also write per_node.csv")

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    add_override_flags(p_sweep)
    p_sweep.add_argument("--out-dir", required=True)
    p_sweep.add_argument(
        "--axis", required=True, choices=engine.SWEEP_AXES,
        type=lambda s: s.replace("-", "_"),
    )
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--seeds", default="0", help="'1,2,3' or '1..10'")
    p_sweep.add_argument("--workers", type=int, default=1)

    p_trace = sub.add_parser("gen-trace", help="generate a mobility trace only")
    add_override_flags(p_trace)
    p_trace.add_argument("--out", required=True)
    p_trace.add_argument("--positions-out", help="also dump sampled positions")

    p_data = sub.add_parser("gen-dataset", help="generate a dataset only")
    add_override_flags(p_data)
    p_data.add_argument("--out", required=True)
    p_data.add_argument("--assignment-out", required=True)

    p_an = sub.add_parser("analyze", help="recompute metrics from saved snapshots")
    p_an.add_argument("--run-dir", required=True)
    p_an.add_argument("--out", help="output CSV (default: <run-dir>/metrics_recomputed.csv)")

    p_val = sub.add_parser("validate", help="check config/trace/dataset files")
    add_override_flags(p_val)
    p_val.add_argument("--trace", help="contact-trace file to validate")
    p_val.add_argument("--dataset", help="dataset file to validate")
    p_val.add_argument("--assignment", help="assignment file to validate")
    return parser


def cmd_run(args) -> int:
    cfg = build_config(args)
    cfg.validate()
    result = engine.run(
        cfg, args.out_dir, dump_snapshots=args.dump_snapshots, per_node_csv=args.per_node
    )
    final = result.summary["final_metrics"]
    print(
        f"run complete: kd={final['kd']:.4f} cvg={final['cvg']:.4f} "
        f"f={final['f_measure']:.4f} -> {args.out_dir}"
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = build_config(args)
    cfg.validate()
    values = []
    for chunk in args.values.split(","):
        chunk = chunk.strip()
        values.append(int(chunk) if chunk.isdigit() else _float_or_inf(chunk))
    seeds = parse_seed_range(args.seeds)
    aggregates = engine.sweep(
        cfg, args.axis, values, seeds, out_dir=args.out_dir, workers=args.workers
    )
    for row in aggregates:
        print(
            f"{args.axis}={row['value']}: kd={row['kd']:.4f} cvg={row['cvg']:.4f} "
            f"f={row['f_measure']:.4f} conv_t={row['convergence_time']:.0f}"
        )
    return EXIT_OK


def cmd_gen_trace(args) -> int:
    cfg = build_config(args)
    mob = replace(cfg.mobility, seed=cfg.seed, duration=cfg.duration)
    mob.validate()
    trace = mobility.generate_trace(mob, keep_positions=bool(args.positions_out))
    mobility.save_trace(trace.events, args.out)
    if args.positions_out:
        mobility.save_positions(trace.positions, mob.time_step, args.positions_out)
    print(f"{len(trace.events)} contact events -> {args.out}")
    return EXIT_OK


def cmd_gen_dataset(args) -> int:
    cfg = build_config(args)
    dcfg = replace(cfg.dataset, seed=cfg.seed)
    dcfg.validate()
    communities = mobility.node_communities(
        cfg.mobility.num_nodes, cfg.mobility.num_communities
    )
    ds = dataset_mod.generate_dataset(dcfg, cfg.mobility.num_nodes, communities)
    dataset_mod.save_dataset(ds.items, args.out)
    dataset_mod.save_assignment(ds.assignment, args.assignment_out)
    print(
        f"{len(ds.items)} items -> {args.out}; report: "
        f"{json.dumps(ds.report)}"
    )
    return EXIT_OK


def cmd_analyze(args) -> int:
    records = engine.analyze(args.run_dir)
    out = args.out or f"{args.run_dir.rstrip('/')}/metrics_recomputed.csv"
    metrics.write_metrics_csv(records, out)
    print(f"{len(records)} records -> {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    problems = []
    try:
        cfg = build_config(args)
        cfg.validate()
    except (ConfigError, ValueError, OSError, json.JSONDecodeError) as exc:
        problems.append(f"config: {exc}")
    if args.trace:
        try:
            mobility.load_trace(args.trace)
        except (ValueError, OSError) as exc:
            problems.append(f"trace: {exc}")
    items = None
    if args.dataset:
        try:
            items = dataset_mod.load_dataset(args.dataset)
        except (ValueError, OSError) as exc:
            problems.append(f"dataset: {exc}")
    if args.assignment:
        try:
            assignment = dataset_mod.load_assignment(args.assignment)
            if items is not None:
                missing = {i for ids in assignment.values() for i in ids} - set(items)
                if missing:
                    problems.append(
                        f"assignment: references unknown items {sorted(missing)[:5]}"
                    )
        except (ValueError, OSError) as exc:
            problems.append(f"assignment: {exc}")
    if problems:
        for issue in problems:
            print(issue, file=sys.stderr)
        return EXIT_CONFIG
    print("ok")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "gen-trace": cmd_gen_trace,
    "gen-dataset": cmd_gen_dataset,
    "analyze": cmd_analyze,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # runtime failures
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
