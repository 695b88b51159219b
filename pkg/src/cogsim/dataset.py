"""Synthetic tagged-item datasets and the global knowledge graph.

Two regimes mirror the evaluation data: ``d1`` items carry one of a few main
concepts plus a handful of cluster-local tags (three weakly bridged tag
clusters), ``d2`` items carry many tags from one heavy-tailed vocabulary.
Real data can be substituted through the dataset/assignment text formats.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from cogsim.mobility import ConfigError
from cogsim.semantic import EdgeState, SemanticNetwork, TaggedItem
from cogsim.seeding import STREAM_DATASET, derive_seed

REGIMES = ("d1", "d2")

# d2 items are rank windows snapped to a grid wider than any window, so the
# vocabulary is tiled by nearly disjoint tag cliques; a fraction of items
# swap one window tag for an independently drawn hub tag, and those sparse
# bridges set the global diameter.
_D2_ANCHOR_SNAP = 14
_D2_SHORTCUT_PROB = 0.5


@dataclass
class DatasetConfig:
    regime: str = "d1"
    num_items: int | None = None  # None: num_nodes * items_per_node
    items_per_node: int = 10
    tags_per_item_range: tuple[int, int] | None = None  # regime default if None
    num_main_concepts: int = 3
    tag_pool_sizes: list[int] | None = None  # per-cluster (d1) / global (d2)
    cross_cluster_tag_fraction: float = 0.1
    zipf_exponent: float | None = None  # rank-distribution exponent (1.0 d1, 0.2 d2)
    duplicate_assignment: bool | None = None  # None: off for d1, on for d2
    seed: int = 0

    def resolved_tags_range(self) -> tuple[int, int]:
        if self.tags_per_item_range is not None:
            return tuple(self.tags_per_item_range)
        return (2, 4) if self.regime == "d1" else (10, 15)

    def resolved_pools(self) -> list[int]:
        if self.tag_pool_sizes is not None:
            return list(self.tag_pool_sizes)
        if self.regime == "d1":
            return [92] * self.num_main_concepts
        return [1450]

    def resolved_zipf(self) -> float:
        if self.zipf_exponent is not None:
            return self.zipf_exponent
        return 1.0 if self.regime == "d1" else 0.2

    def resolved_duplicates(self) -> bool:
        if self.duplicate_assignment is not None:
            return self.duplicate_assignment
        return self.regime == "d2"

    def validate(self):
        if self.regime not in REGIMES:
            raise ConfigError(f"regime must be one of {REGIMES}")
        lo, hi = self.resolved_tags_range()
        if hi < lo or lo < 1:
            raise ConfigError("tags_per_item_range must satisfy 1 <= lo <= hi")
        if self.regime == "d1" and lo < 2:
            raise ConfigError("d1 items need >= 2 tags so every item contributes edges")
        if self.items_per_node < 1:
            raise ConfigError("items_per_node must be >= 1")
        if self.regime == "d1" and self.num_main_concepts < 1:
            raise ConfigError("num_main_concepts must be >= 1")
        if not 0.0 <= self.cross_cluster_tag_fraction <= 1.0:
            raise ConfigError("cross_cluster_tag_fraction must be in [0, 1]")
        if self.resolved_zipf() < 0:
            raise ConfigError("zipf_exponent must be >= 0")
        pools = self.resolved_pools()
        if self.regime == "d1":
            if len(pools) != self.num_main_concepts:
                raise ConfigError("need one tag pool size per main concept")
            needed = hi - 1
        else:
            if len(pools) != 1:
                raise ConfigError("d2 uses a single global pool")
            needed = hi
        for size in pools:
            if size < needed:
                raise ConfigError(
                    f"tag pool of {size} too small for items with up to {hi} tags"
                )


@dataclass
class Dataset:
    items: dict[str, TaggedItem]
    assignment: dict[int, list[str]]
    report: dict = field(default_factory=dict)

    def node_items(self, node: int) -> list[TaggedItem]:
        return [self.items[i] for i in self.assignment[node]]


def _rank_probabilities(size: int, exponent: float) -> np.ndarray:
    ranks = np.arange(1, size + 1, dtype=np.float64)
    weights = ranks ** (-exponent)
    return weights / weights.sum()


def _d1_pools(cfg: DatasetConfig) -> tuple[list[list[str]], list[str]]:
    """Per-cluster rank-ordered local pools sharing a common slice of tags.

    Shared tags are spliced into every cluster's pool at evenly spread ranks
    so they are used but never dominate; everything else is exclusive.
    """
    pools = []
    sizes = cfg.resolved_pools()
    shared_count = round(cfg.cross_cluster_tag_fraction * min(sizes))
    shared = [f"shared{j:03d}" for j in range(shared_count)]
    for cluster, size in enumerate(sizes):
        exclusive = [f"c{cluster}t{j:03d}" for j in range(size - shared_count)]
        pool = list(exclusive)
        if shared_count:
            stride = max(1, size // shared_count)
            for j, tag in enumerate(shared):
                pool.insert(min(len(pool), (j + 1) * stride - 1), tag)
        pools.append(pool)
    return pools, shared


def _item_cluster(node: int, item_index: int, communities: list[int], num_clusters: int) -> int:
    """Concept cluster for one of a node's items.

    With several communities each community maps to a concept, so a node's
    whole collection comes from its community's cluster (travellers are then
    the only bridges).  In a single community the collection cycles through
    the clusters instead: every node knows a slice of each concept, which is
    what makes any contact start from some shared interest.
    """
    if max(communities, default=0) > 0:
        return communities[node] % num_clusters
    return (node + item_index) % num_clusters


def generate_dataset(
    cfg: DatasetConfig, num_nodes: int, communities: list[int] | None = None
) -> Dataset:
    """Generate items plus the per-node assignment for one scenario."""
    cfg.validate()
    if communities is None:
        communities = [0] * num_nodes
    if len(communities) != num_nodes:
        raise ConfigError("communities list must have one entry per node")
    rng = np.random.default_rng(derive_seed(cfg.seed, STREAM_DATASET))
    lo, hi = cfg.resolved_tags_range()

    items: dict[str, TaggedItem] = {}
    assignment: dict[int, list[str]] = {}

    if cfg.regime == "d1":
        pools, shared = _d1_pools(cfg)
        probs = [_rank_probabilities(len(pool), cfg.resolved_zipf()) for pool in pools]

        def cluster_of(node: int, item_index: int) -> int:
            return _item_cluster(node, item_index, communities, cfg.num_main_concepts)

        def make_item(item_id: str, cluster: int) -> TaggedItem:
            # Local tags come from a window of adjacent ranks around a
            # zipf-drawn anchor: related tags co-occur, keeping the number of
            # distinct tag pairs low while still touching the whole pool.
            pool = pools[cluster]
            k = int(rng.integers(lo, hi + 1))
            anchor = int(rng.choice(len(pool), p=probs[cluster]))
            locals_ = [(anchor + off) % len(pool) for off in range(k - 1)]
            tags = frozenset([f"main{cluster}"] + [pool[i] for i in locals_])
            return TaggedItem(id=item_id, tags=tags)

        if cfg.resolved_duplicates():
            total = cfg.num_items or num_nodes * cfg.items_per_node
            per_cluster = {}
            for idx in range(total):
                cluster = idx % cfg.num_main_concepts
                item = make_item(f"i{idx:05d}", cluster)
                items[item.id] = item
                per_cluster.setdefault(cluster, []).append(item.id)
            for node in range(num_nodes):
                wanted: dict[int, int] = {}
                for j in range(cfg.items_per_node):
                    c = cluster_of(node, j)
                    wanted[c] = wanted.get(c, 0) + 1
                owned = []
                for c in sorted(wanted):
                    pool = per_cluster.get(c, [])
                    take = min(wanted[c], len(pool))
                    chosen = rng.choice(len(pool), size=take, replace=False)
                    owned.extend(pool[int(i)] for i in chosen)
                assignment[node] = sorted(owned)
        else:
            idx = 0
            for node in range(num_nodes):
                owned = []
                for j in range(cfg.items_per_node):
                    item = make_item(f"i{idx:05d}", cluster_of(node, j))
                    items[item.id] = item
                    owned.append(item.id)
                    idx += 1
                assignment[node] = owned
    else:
        pool_size = cfg.resolved_pools()[0]
        vocab = [f"t{j:05d}" for j in range(pool_size)]
        probs = _rank_probabilities(pool_size, cfg.resolved_zipf())
        total = cfg.num_items or num_nodes * cfg.items_per_node

        for idx in range(total):
            # Tags form a rank window snapped to a grid wider than any
            # window, tiling the vocabulary with nearly disjoint cliques;
            # bridged items swap one window tag for an independent draw whose
            # long-range edges set the global diameter.
            k = int(rng.integers(lo, hi + 1))
            bridged = rng.random() < _D2_SHORTCUT_PROB
            window = k - 1 if bridged else k
            anchor = int(rng.choice(pool_size, p=probs)) // _D2_ANCHOR_SNAP * _D2_ANCHOR_SNAP
            chosen = {(anchor + off) % pool_size for off in range(window)}
            while len(chosen) < k:
                chosen.add(int(rng.choice(pool_size, p=probs)))
            items[f"i{idx:05d}"] = TaggedItem(
                id=f"i{idx:05d}", tags=frozenset(vocab[i] for i in chosen)
            )
        ids = sorted(items)
        if cfg.resolved_duplicates():
            for node in range(num_nodes):
                take = min(cfg.items_per_node, len(ids))
                chosen = rng.choice(len(ids), size=take, replace=False)
                assignment[node] = sorted(ids[int(i)] for i in chosen)
        else:
            if total < num_nodes * cfg.items_per_node:
                raise ConfigError("not enough items for duplicate-free assignment")
            pos = 0
            for node in range(num_nodes):
                assignment[node] = ids[pos : pos + cfg.items_per_node]
                pos += cfg.items_per_node

    report = _dataset_report(cfg, items, assignment, num_nodes)
    return Dataset(items=items, assignment=assignment, report=report)


def _dataset_report(cfg, items, assignment, num_nodes) -> dict:
    """Achieved global-graph statistics, plus cluster-bridging checks for d1."""
    networks = [
        SemanticNetwork.build_initial([items[i] for i in assignment[n]], 0.0)
        for n in range(num_nodes)
    ]
    g = global_graph(networks, 0.0)
    report = {
        "global_vertices": g.vertex_count,
        "global_edges": g.edge_count,
        "global_diameter": g.diameter(),
    }
    if cfg.regime == "d1":
        home = {}
        for v in g.vertices:
            if v.startswith("shared"):
                home[v] = None
            elif v.startswith("main"):
                home[v] = int(v[4:])
            else:
                home[v] = int(v[1 : v.index("t")])
        cross_homed = 0
        bridges = 0
        for a, b, _ in g.edges():
            ha, hb = home[a], home[b]
            if ha is None or hb is None:
                bridges += 1
            elif ha != hb:
                cross_homed += 1
        shared_used = sum(1 for v in g.vertices if v.startswith("shared"))
        shared_total = round(cfg.cross_cluster_tag_fraction * min(cfg.resolved_pools()))
        if cross_homed:
            raise AssertionError(
                "d1 generator produced a direct edge between exclusive tags "
                f"of different clusters ({cross_homed})"
            )
        report.update(
            {
                "inter_cluster_edges": cross_homed,
                "bridge_edges": bridges,
                "shared_tags_used": shared_used,
                "shared_tags_available": shared_total,
            }
        )
    return report


def global_graph(networks, t0: float = 0.0) -> SemanticNetwork:
    """Label-wise union of all nodes' networks with edge states reset to t0."""
    g = SemanticNetwork()
    for net in networks:
        for v in net.vertices:
            g.add_vertex(v)
        for a, b, _ in net.edges():
            if not g.has_edge(a, b):
                g._insert_edge(a, b, EdgeState(t0, 1))
    return g


def save_dataset(items: dict[str, TaggedItem], path):
    with open(path, "w") as fh:
        fh.write("# dataset: item_id tag tag ...\n")
        for item_id in sorted(items):
            tags = " ".join(sorted(items[item_id].tags))
            fh.write(f"{item_id} {tags}\n")


def load_dataset(path) -> dict[str, TaggedItem]:
    items: dict[str, TaggedItem] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) < 2:
                raise ValueError(f"{path}: line {lineno}: item without tags")
            item = TaggedItem.from_raw(parts[0], parts[1:])
            if item.id in items:
                raise ValueError(f"{path}: line {lineno}: duplicate item id {item.id}")
            items[item.id] = item
    return items


def save_assignment(assignment: dict[int, list[str]], path):
    with open(path, "w") as fh:
        fh.write("# assignment: node_id item_id item_id ...\n")
        for node in sorted(assignment):
            fh.write(f"{node} {' '.join(assignment[node])}\n")


def load_assignment(path) -> dict[int, list[str]]:
    assignment: dict[int, list[str]] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                node = int(parts[0])
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: bad node id") from None
            if node in assignment:
                raise ValueError(f"{path}: line {lineno}: duplicate node {node}")
            assignment[node] = parts[1:]
    return assignment
