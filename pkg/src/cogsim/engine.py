"""Deterministic simulation loop binding mobility, exchange, and metrics.

Contacts are processed in (end time, node pair) order; both parties are
pruned lazily at contact end before exchanging, and all nodes are pruned at
every snapshot tick before metrics are sampled.  All randomness flows from
the root seed through the labeled streams, so a config reproduces its outputs
byte for byte.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

from cogsim import benchmark, dataset as dataset_mod, exchange, metrics, mobility
from cogsim.mobility import ConfigError
from cogsim.semantic import SemanticNetwork
from cogsim.seeding import STREAM_BENCHMARK, stream

ALGORITHMS = ("ca", "ba")
SWEEP_AXES = ("f_min", "w_min", "tag_limit", "data_limit", "theta_rec")


@dataclass
class SimConfig:
    algorithm: str = "ca"
    mobility: mobility.MobilityConfig = field(default_factory=mobility.MobilityConfig)
    dataset: dataset_mod.DatasetConfig = field(default_factory=dataset_mod.DatasetConfig)
    exchange: exchange.ExchangeParams = field(default_factory=exchange.ExchangeParams)
    trace_path: str | None = None  # use a saved trace instead of generating
    items_path: str | None = None  # use a saved dataset instead of generating
    assignment_path: str | None = None
    f_min: float = 150.0
    snapshot_interval: float = 100.0
    duration: float = 25000.0
    seed: int = 0

    def validate(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}")
        if not self.duration > 0:
            raise ConfigError("duration must be > 0")
        if not self.snapshot_interval > 0:
            raise ConfigError("snapshot_interval must be > 0")
        if not self.f_min > 0:
            raise ConfigError("f_min must be > 0")
        if (self.items_path is None) != (self.assignment_path is None):
            raise ConfigError("items_path and assignment_path go together")
        self.mobility.validate()
        self.dataset.validate()
        self.exchange.validate()

    def to_json_dict(self) -> dict:
        """Sectioned JSON form: {algorithm, mobility, dataset, exchange, engine}."""
        return {
            "algorithm": self.algorithm,
            "mobility": asdict(self.mobility),
            "dataset": _dataset_json(self.dataset),
            "exchange": asdict(self.exchange),
            "engine": {
                "f_min": _json_float(self.f_min),
                "snapshot_interval": self.snapshot_interval,
                "duration": self.duration,
                "seed": self.seed,
                "trace_path": self.trace_path,
                "items_path": self.items_path,
                "assignment_path": self.assignment_path,
            },
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "SimConfig":
        cfg = cls()
        if "algorithm" in doc:
            cfg.algorithm = doc["algorithm"]
        if "mobility" in doc:
            cfg.mobility = mobility.MobilityConfig(**doc["mobility"])
        if "dataset" in doc:
            fields = dict(doc["dataset"])
            if fields.get("tags_per_item_range") is not None:
                fields["tags_per_item_range"] = tuple(fields["tags_per_item_range"])
            cfg.dataset = dataset_mod.DatasetConfig(**fields)
        if "exchange" in doc:
            cfg.exchange = exchange.ExchangeParams(**doc["exchange"])
        eng = doc.get("engine", {})
        if "f_min" in eng:
            cfg.f_min = _parse_float(eng["f_min"])
        for name in ("snapshot_interval", "duration", "seed"):
            if name in eng:
                setattr(cfg, name, eng[name])
        for name in ("trace_path", "items_path", "assignment_path"):
            if eng.get(name):
                setattr(cfg, name, eng[name])
        return cfg


def _dataset_json(dcfg) -> dict:
    out = asdict(dcfg)
    if out.get("tags_per_item_range") is not None:
        out["tags_per_item_range"] = list(out["tags_per_item_range"])
    return out


def _json_float(x: float):
    return "inf" if math.isinf(x) else x


def _parse_float(x) -> float:
    return math.inf if x in ("inf", "Infinity") else float(x)


class NodeState:
    """One simulated node: semantic network plus append-only item store."""

    __slots__ = ("node_id", "network", "items", "community")

    def __init__(self, node_id: int, network: SemanticNetwork, items, community: int = 0):
        self.node_id = node_id
        self.network = network
        self.items = dict(items)
        self.community = community


@dataclass
class SimResult:
    config: SimConfig
    records: list[metrics.MetricsRecord]
    nodes: list[NodeState]
    global_graph: SemanticNetwork
    summary: dict
    trace: mobility.Trace | None = None
    dataset: dataset_mod.Dataset | None = None


def prepare(cfg: SimConfig) -> tuple[mobility.Trace, dataset_mod.Dataset]:
    """Build (or load) the trace and dataset named by the config."""
    cfg.validate()
    if cfg.trace_path:
        events = mobility.load_trace(cfg.trace_path)
        num_nodes = cfg.mobility.num_nodes
        communities = mobility.node_communities(num_nodes, cfg.mobility.num_communities)
        trace = mobility.Trace(
            config=cfg.mobility, events=events, communities=communities, travellers=set()
        )
    else:
        mob = replace(cfg.mobility, seed=cfg.seed, duration=cfg.duration)
        trace = mobility.generate_trace(mob)
    if cfg.items_path:
        items = dataset_mod.load_dataset(cfg.items_path)
        assignment = dataset_mod.load_assignment(cfg.assignment_path)
        ds = dataset_mod.Dataset(items=items, assignment=assignment)
        missing = {i for ids in assignment.values() for i in ids} - set(items)
        if missing:
            raise ConfigError(f"assignment references unknown items: {sorted(missing)[:5]}")
    else:
        dcfg = replace(cfg.dataset, seed=cfg.seed)
        ds = dataset_mod.generate_dataset(
            dcfg, cfg.mobility.num_nodes, trace.communities
        )
    _check_compatibility(cfg, trace, ds)
    return trace, ds


def _check_compatibility(cfg: SimConfig, trace: mobility.Trace, ds: dataset_mod.Dataset):
    num_nodes = cfg.mobility.num_nodes
    for ev in trace.events:
        if ev.node_b >= num_nodes:
            raise ConfigError(f"trace references unknown node {ev.node_b}")
    missing_nodes = set(range(num_nodes)) - set(ds.assignment)
    if missing_nodes:
        raise ConfigError(f"assignment missing nodes: {sorted(missing_nodes)[:5]}")


def snapshot_times(duration: float, interval: float) -> list[float]:
    times = [k * interval for k in range(int(duration // interval) + 1)]
    if times[-1] < duration:
        times.append(duration)
    return times


def run_simulation(
    cfg: SimConfig,
    trace: mobility.Trace,
    ds: dataset_mod.Dataset,
    snapshot_sink: Callable[[float, list[NodeState]], None] | None = None,
) -> SimResult:
    """Execute one run over a prepared trace and dataset."""
    num_nodes = cfg.mobility.num_nodes
    nodes = []
    for node_id in range(num_nodes):
        owned = {i: ds.items[i] for i in ds.assignment[node_id]}
        net = SemanticNetwork.build_initial(owned.values(), 0.0)
        community = trace.communities[node_id] if trace.communities else 0
        nodes.append(NodeState(node_id, net, owned, community))

    gglobal = dataset_mod.global_graph([n.network for n in nodes], 0.0)
    dv_index = metrics.items_per_tag(ds.items.values())
    params = cfg.exchange
    ba_rng = stream(cfg.seed, STREAM_BENCHMARK) if cfg.algorithm == "ba" else None

    events = sorted(trace.events, key=lambda e: (e.end, e.node_a, e.node_b))
    times = snapshot_times(cfg.duration, cfg.snapshot_interval)
    records: list[metrics.MetricsRecord] = []
    ev_i = 0
    for ts in times:
        while ev_i < len(events) and events[ev_i].end <= ts:
            ev = events[ev_i]
            a, b = nodes[ev.node_a], nodes[ev.node_b]
            a.network.prune_forgotten(ev.end, cfg.f_min)
            b.network.prune_forgotten(ev.end, cfg.f_min)
            if cfg.algorithm == "ca":
                exchange.run_contact_ca(a, b, ev, params)
            else:
                benchmark.run_contact_ba(a, b, ev, params, ba_rng)
            ev_i += 1
        for node in nodes:
            node.network.prune_forgotten(ts, cfg.f_min)
        records.append(_make_record(ts, nodes, gglobal, dv_index, params.gamma))
        if snapshot_sink is not None:
            snapshot_sink(ts, nodes)

    summary = build_summary(cfg, records, nodes, gglobal, trace)
    return SimResult(
        config=cfg,
        records=records,
        nodes=nodes,
        global_graph=gglobal,
        summary=summary,
        trace=trace,
        dataset=ds,
    )


def _make_record(ts, nodes, gglobal, dv_index, gamma) -> metrics.MetricsRecord:
    networks = [n.network for n in nodes]
    views = [(n.network, n.items.values()) for n in nodes]
    kd = metrics.knowledge_dissemination(networks, gglobal.vertex_count)
    cvg = metrics.coverage(views, dv_index)
    f = metrics.f_measure(views)
    mew = metrics.mean_edge_weight(networks, ts, gamma)
    return metrics.MetricsRecord(
        time=ts,
        kd=float(kd),
        cvg=float(cvg),
        f_measure=float(f),
        mean_edge_weight=mew,
        cvg_exact=cvg,
    )


def tagged_node(nodes: list[NodeState], travellers: set[int]) -> NodeState:
    """Representative node for structure reports: lowest-id non-traveller."""
    for node in nodes:
        if node.node_id not in travellers:
            return node
    return nodes[0]


def build_summary(cfg, records, nodes, gglobal, trace) -> dict:
    final = records[-1]
    conv_value, conv_time = metrics.coverage_convergence(
        [(r.time, r.cvg_exact if r.cvg_exact is not None else r.cvg) for r in records]
    )
    tagged = tagged_node(nodes, trace.travellers if trace else set())
    tagged_net = tagged.network
    gv, ge = gglobal.vertex_count, gglobal.edge_count
    structure = {
        "tagged_node": tagged.node_id,
        "pct_vertices": 100.0 * tagged_net.vertex_count / gv if gv else 0.0,
        "pct_edges": 100.0 * tagged_net.edge_count / ge if ge else 0.0,
        "diameter": tagged_net.diameter(),
        "global_diameter": gglobal.diameter(),
    }
    if tagged_net.vertex_count and gv:
        cvm = metrics.cvm_two_sample(
            metrics.degree_sample(tagged_net), metrics.degree_sample(gglobal)
        )
        cvm_out = {
            "statistic": cvm.statistic,
            "p_value": cvm.p_value,
            "reject": cvm.reject_at_95,
        }
    else:
        cvm_out = None
    return {
        "config": cfg.to_json_dict(),
        "final_metrics": {
            "time": final.time,
            "kd": final.kd,
            "cvg": final.cvg,
            "f_measure": final.f_measure,
            "mean_edge_weight": final.mean_edge_weight,
        },
        "convergence": {"cvg": float(conv_value), "time": conv_time},
        "structure": structure,
        "cvm": cvm_out,
    }


# -- full runs with file outputs ----------------------------------------------


def run(
    cfg: SimConfig,
    out_dir,
    dump_snapshots: bool = False,
    per_node_csv: bool = False,
) -> SimResult:
    """End-to-end run: prepare inputs, simulate, write the output layout."""
    os.makedirs(out_dir, exist_ok=True)
    trace, ds = prepare(cfg)
    mobility.save_trace(trace.events, os.path.join(out_dir, "trace.txt"))
    dataset_mod.save_dataset(ds.items, os.path.join(out_dir, "dataset.txt"))
    dataset_mod.save_assignment(ds.assignment, os.path.join(out_dir, "assignment.txt"))

    sink = None
    if dump_snapshots:

        def sink(ts: float, nodes: list[NodeState]):
            snap_dir = os.path.join(out_dir, "snapshots", f"{ts:g}")
            os.makedirs(snap_dir, exist_ok=True)
            for node in nodes:
                path = os.path.join(snap_dir, f"{node.node_id}.sn")
                with open(path, "w") as fh:
                    fh.write(node.network.to_snapshot_text(node.node_id, ts))
            dataset_mod.save_assignment(
                {n.node_id: sorted(n.items) for n in nodes},
                os.path.join(snap_dir, "items.txt"),
            )

    result = run_simulation(cfg, trace, ds, snapshot_sink=sink)
    metrics.write_metrics_csv(result.records, os.path.join(out_dir, "metrics.csv"))
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(result.summary, fh, indent=2)
        fh.write("\n")
    if per_node_csv:
        _write_per_node_csv(result, os.path.join(out_dir, "per_node.csv"))
    return result


def _write_per_node_csv(result: SimResult, path):
    # Final-state detail only; the time series lives in metrics.csv.
    with open(path, "w") as fh:
        fh.write("node,community,vertices,edges,items\n")
        for node in result.nodes:
            fh.write(
                f"{node.node_id},{node.community},{node.network.vertex_count},"
                f"{node.network.edge_count},{len(node.items)}\n"
            )


def analyze(run_dir) -> list[metrics.MetricsRecord]:
    """Recompute the metrics series of a completed run from its snapshots."""
    summary_path = os.path.join(run_dir, "summary.json")
    with open(summary_path) as fh:
        summary = json.load(fh)
    gamma = summary["config"]["exchange"]["gamma"]
    items = dataset_mod.load_dataset(os.path.join(run_dir, "dataset.txt"))
    assignment = dataset_mod.load_assignment(os.path.join(run_dir, "assignment.txt"))
    dv_index = metrics.items_per_tag(items.values())

    initial_nets = [
        SemanticNetwork.build_initial([items[i] for i in assignment[n]], 0.0)
        for n in sorted(assignment)
    ]
    gglobal = dataset_mod.global_graph(initial_nets, 0.0)

    snap_root = os.path.join(run_dir, "snapshots")
    if not os.path.isdir(snap_root):
        raise FileNotFoundError(
            f"{run_dir} has no snapshots/ directory (run with snapshot dumping on)"
        )
    snap_dirs = sorted(os.listdir(snap_root), key=float)
    records = []
    for name in snap_dirs:
        ts = float(name)
        snap_dir = os.path.join(snap_root, name)
        owned = dataset_mod.load_assignment(os.path.join(snap_dir, "items.txt"))
        nodes = []
        for fname in sorted(
            (f for f in os.listdir(snap_dir) if f.endswith(".sn")),
            key=lambda f: int(f[:-3]),
        ):
            with open(os.path.join(snap_dir, fname)) as fh:
                node_id, _, net = SemanticNetwork.from_snapshot_text(fh.read())
            nodes.append((node_id, net))
        views = [(net, [items[i] for i in owned[node_id]]) for node_id, net in nodes]
        networks = [net for _, net in nodes]
        kd = metrics.knowledge_dissemination(networks, gglobal.vertex_count)
        cvg = metrics.coverage(views, dv_index)
        f = metrics.f_measure(views)
        mew = metrics.mean_edge_weight(networks, ts, gamma)
        records.append(
            metrics.MetricsRecord(
                time=ts,
                kd=float(kd),
                cvg=float(cvg),
                f_measure=float(f),
                mean_edge_weight=mew,
                cvg_exact=cvg,
            )
        )
    return records


# -- parameter sweeps ----------------------------------------------------------


def apply_axis(cfg: SimConfig, axis: str, value) -> SimConfig:
    if axis == "f_min":
        return replace(cfg, f_min=value)
    if axis in ("w_min", "tag_limit", "data_limit", "theta_rec"):
        fieldname = {"w_min": "w_min_seconds"}.get(axis, axis)
        ex = replace(cfg.exchange, **{fieldname: value})
        return replace(cfg, exchange=ex)
    raise ConfigError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")


def sweep_cell(cfg: SimConfig, axis: str, value, seed: int) -> dict:
    """One (value, seed) cell: run and distill the summary numbers."""
    cell_cfg = replace(apply_axis(cfg, axis, value), seed=seed)
    trace, ds = prepare(cell_cfg)
    result = run_simulation(cell_cfg, trace, ds)
    s = result.summary
    return {
        "axis": axis,
        "value": value,
        "seed": seed,
        "kd": s["final_metrics"]["kd"],
        "cvg": s["final_metrics"]["cvg"],
        "f_measure": s["final_metrics"]["f_measure"],
        "mean_edge_weight": s["final_metrics"]["mean_edge_weight"],
        "convergence_cvg": s["convergence"]["cvg"],
        "convergence_time": s["convergence"]["time"],
    }


def sweep(
    cfg: SimConfig,
    axis: str,
    values: list,
    seeds: list[int],
    out_dir=None,
    workers: int = 1,
) -> list[dict]:
    """Cross product of values and seeds; per-cell rows plus seed-averaged
    aggregates. Cells are independent, so they may run in worker processes."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    cells = [(value, seed) for value in values for seed in seeds]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_worker, [(cfg, axis, v, s) for v, s in cells]))
    else:
        rows = [sweep_cell(cfg, axis, v, s) for v, s in cells]

    aggregates = []
    for value in values:
        group = [r for r in rows if r["value"] == value]
        agg = {"axis": axis, "value": value, "seeds": len(group)}
        for key in ("kd", "cvg", "f_measure", "mean_edge_weight", "convergence_cvg", "convergence_time"):
            agg[key] = sum(r[key] for r in group) / len(group)
        aggregates.append(agg)

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        _write_rows_csv(rows, os.path.join(out_dir, "cells.csv"))
        _write_rows_csv(aggregates, os.path.join(out_dir, "aggregate.csv"))
    return aggregates


def _sweep_worker(args):
    cfg, axis, value, seed = args
    return sweep_cell(cfg, axis, value, seed)


def _write_rows_csv(rows: list[dict], path):
    import csv as _csv

    with open(path, "w", newline="") as fh:
        writer = _csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
