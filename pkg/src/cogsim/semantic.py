"""Per-node associative semantic networks with exponential forgetting.

A node's memory is an undirected weighted graph over tag labels.  Edge weight
is never stored: it is the closed form ``exp(-(gamma / popularity) * (now -
last_activation))``, so every edge only carries its last activation time and
a popularity counter.  Forgetting removes an edge once its weight falls to the
forget threshold, which reduces algebraically to ``elapsed >= popularity *
f_min`` and is evaluated in that exact form.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator

_WS_RE = re.compile(r"\s")


def normalize_tag(label: str) -> str:
    """Case-fold and trim a raw tag label. Raises ValueError if nothing is left."""
    tag = label.strip().casefold()
    if not tag:
        raise ValueError(f"tag label is empty after normalization: {label!r}")
    return tag


@dataclass(frozen=True)
class TaggedItem:
    """A content item: opaque id plus an immutable set of normalized tags."""

    id: str
    tags: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.tags:
            raise ValueError(f"item {self.id!r} has no tags")

    @classmethod
    def from_raw(cls, item_id: str, raw_tags: Iterable[str]) -> "TaggedItem":
        return cls(id=str(item_id), tags=frozenset(normalize_tag(t) for t in raw_tags))


class EdgeState:
    """Activation state of one edge: last use time and usage count."""

    __slots__ = ("last_activation", "popularity")

    def __init__(self, last_activation: float, popularity: int = 1):
        self.last_activation = last_activation
        self.popularity = popularity

    def weight(self, now: float, gamma: float) -> float:
        """Retention weight exp(-(gamma / popularity) * elapsed), in (0, 1]."""
        return math.exp(-(gamma / self.popularity) * (now - self.last_activation))

    def expired(self, now: float, f_min: float) -> bool:
        """Forget-threshold test in its exact algebraic form (ties drop)."""
        return now - self.last_activation >= self.popularity * f_min

    def deadline(self, f_min: float) -> float:
        return self.last_activation + self.popularity * f_min

    def __repr__(self):
        return f"EdgeState(last_activation={self.last_activation}, popularity={self.popularity})"


class SemanticNetwork:
    """Dynamic undirected weighted tag graph owned by one simulated node.

    Adjacency maps each vertex to its neighbors; both directions of an edge
    share a single EdgeState. Vertices without edges are legal only between
    construction and the first prune.
    """

    __slots__ = ("_adj", "_edge_count", "_prune_floor", "_prune_floor_fmin")

    def __init__(self):
        self._adj: dict[str, dict[str, EdgeState]] = {}
        self._edge_count = 0
        # Lower bound on the earliest possible edge drop time; lets prune
        # calls return without scanning when nothing can have expired yet.
        self._prune_floor = -math.inf
        self._prune_floor_fmin = None

    # -- construction -------------------------------------------------------

    @classmethod
    def build_initial(cls, items: Iterable[TaggedItem], t0: float) -> "SemanticNetwork":
        """Union of per-item tag cliques; same-label vertices merge.

        Every edge starts with popularity 1 and last activation t0, so its
        weight at t0 is exactly 1.
        """
        items = list(items)
        if not items:
            raise ValueError("cannot build a semantic network from an empty item set")
        net = cls()
        for item in items:
            tags = sorted(item.tags)
            for tag in tags:
                net.add_vertex(tag)
            for a, b in combinations(tags, 2):
                if not net.has_edge(a, b):
                    net._insert_edge(a, b, EdgeState(t0, 1))
        return net

    # -- basic queries ------------------------------------------------------

    @property
    def vertices(self) -> Iterable[str]:
        return self._adj.keys()

    def vertex_set(self) -> set[str]:
        return set(self._adj)

    @property
    def vertex_count(self) -> int:
        return len(self._adj)

    @property
    def edge_count(self) -> int:
        return self._edge_count

    def __contains__(self, label: str) -> bool:
        return label in self._adj

    def degree(self, label: str) -> int:
        return len(self._adj[label])

    def neighbors(self, label: str) -> dict[str, EdgeState]:
        """Neighbor -> shared EdgeState map for one vertex (do not mutate keys)."""
        return self._adj[label]

    def has_edge(self, a: str, b: str) -> bool:
        inner = self._adj.get(a)
        return inner is not None and b in inner

    def edge_state(self, a: str, b: str) -> EdgeState:
        try:
            return self._adj[a][b]
        except KeyError:
            raise KeyError(f"no edge between {a!r} and {b!r}") from None

    def edges(self) -> Iterator[tuple[str, str, EdgeState]]:
        """Each edge once, endpoints in sorted order."""
        for a, inner in self._adj.items():
            for b, state in inner.items():
                if a < b:
                    yield a, b, state

    # -- mutation -----------------------------------------------------------

    def add_vertex(self, label: str):
        if label not in self._adj:
            self._adj[label] = {}

    def _insert_edge(self, a: str, b: str, state: EdgeState):
        if a == b:
            raise ValueError(f"self-loop on {a!r}")
        self._adj[a][b] = state
        self._adj[b][a] = state
        self._edge_count += 1
        if self._prune_floor_fmin is not None:
            self._prune_floor = min(self._prune_floor, state.deadline(self._prune_floor_fmin))

    def edge_weight(self, a: str, b: str, now: float, gamma: float) -> float:
        return self.edge_state(a, b).weight(now, gamma)

    def activate_edge(self, a: str, b: str, now: float):
        """Reset the edge's weight to 1 (fresh use) and count the use."""
        state = self.edge_state(a, b)
        state.last_activation = now
        state.popularity += 1

    def prune_forgotten(self, now: float, f_min: float) -> int:
        """Drop every edge with elapsed >= popularity * f_min, then every
        vertex left without edges. Returns the number of edges removed."""
        if f_min <= 0:
            raise ValueError("f_min must be positive")
        if self._prune_floor_fmin == f_min and now < self._prune_floor:
            return 0
        dead = []
        floor = math.inf
        for a, b, state in self.edges():
            if now - state.last_activation >= state.popularity * f_min:
                dead.append((a, b))
            else:
                d = state.deadline(f_min)
                if d < floor:
                    floor = d
        for a, b in dead:
            del self._adj[a][b]
            del self._adj[b][a]
        self._edge_count -= len(dead)
        for label in [v for v, inner in self._adj.items() if not inner]:
            del self._adj[label]
        self._prune_floor = floor
        self._prune_floor_fmin = f_min
        return len(dead)

    def merge_contributed(self, contrib, now: float):
        """Absorb a contributed network: add what is missing, then activate
        every received edge at ``now`` (new edges land with popularity 2:
        created at 1, plus the activation for the exchange itself)."""
        for label in contrib.vertices:
            self.add_vertex(label)
        for a, b in contrib.edges:
            if not self.has_edge(a, b):
                self._insert_edge(a, b, EdgeState(now, 1))
            self.activate_edge(a, b, now)

    # -- analysis ------------------------------------------------------------

    def degree_histogram(self) -> dict[int, int]:
        return dict(Counter(len(inner) for inner in self._adj.values()))

    def connected_components(self) -> list[set[str]]:
        seen: set[str] = set()
        comps = []
        for start in self._adj:
            if start in seen:
                continue
            comp = {start}
            frontier = [start]
            while frontier:
                v = frontier.pop()
                for u in self._adj[v]:
                    if u not in comp:
                        comp.add(u)
                        frontier.append(u)
            seen |= comp
            comps.append(comp)
        return comps

    def diameter(self) -> int | None:
        """Hop-count diameter of the largest connected component (None if empty)."""
        comps = self.connected_components()
        if not comps:
            return None
        largest = max(comps, key=len)
        best = 0
        for source in largest:
            dist = {source: 0}
            frontier = [source]
            d = 0
            while frontier:
                d += 1
                nxt = []
                for v in frontier:
                    for u in self._adj[v]:
                        if u not in dist:
                            dist[u] = d
                            nxt.append(u)
                frontier = nxt
            ecc = max(dist.values())
            if ecc > best:
                best = ecc
        return best

    def snapshot_stats(self, now: float, gamma: float) -> dict:
        """Size, mean weight at ``now``, degree histogram, and hop diameter."""
        if not self._adj:
            return {
                "vertex_count": 0,
                "edge_count": 0,
                "mean_edge_weight": 0.0,
                "degree_histogram": {},
                "diameter": None,
            }
        weights = [state.weight(now, gamma) for _, _, state in self.edges()]
        mean_w = math.fsum(weights) / len(weights) if weights else 0.0
        return {
            "vertex_count": self.vertex_count,
            "edge_count": self._edge_count,
            "mean_edge_weight": mean_w,
            "degree_histogram": self.degree_histogram(),
            "diameter": self.diameter(),
        }

    # -- serialization -------------------------------------------------------

    def to_snapshot_text(self, node_id: int, time: float) -> str:
        lines = [f"SN {node_id} {time!r}"]
        for label in sorted(self._adj):
            lines.append(f"V {quote_label(label)}")
        for a, b, state in sorted(self.edges()):
            lines.append(
                f"E {quote_label(a)} {quote_label(b)} "
                f"{state.last_activation!r} {state.popularity}"
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_snapshot_text(cls, text: str) -> tuple[int, float, "SemanticNetwork"]:
        net = cls()
        node_id = None
        time = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            fields = split_fields(line, lineno)
            kind = fields[0]
            if kind == "SN":
                if len(fields) != 3:
                    raise ValueError(f"line {lineno}: malformed SN header")
                node_id = int(fields[1])
                time = float(fields[2])
            elif kind == "V":
                if len(fields) != 2:
                    raise ValueError(f"line {lineno}: malformed V line")
                net.add_vertex(fields[1])
            elif kind == "E":
                if len(fields) != 5:
                    raise ValueError(f"line {lineno}: malformed E line")
                _, a, b, last, pop = fields
                net.add_vertex(a)
                net.add_vertex(b)
                net._insert_edge(a, b, EdgeState(float(last), int(pop)))
            else:
                raise ValueError(f"line {lineno}: unknown record {kind!r}")
        if node_id is None or time is None:
            raise ValueError("snapshot text has no SN header")
        return node_id, time, net


def quote_label(label: str) -> str:
    """Quote labels containing whitespace or quotes; plain labels pass through."""
    if _WS_RE.search(label) or '"' in label or "\\" in label:
        escaped = label.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    return label


def split_fields(line: str, lineno: int = 0) -> list[str]:
    """Split a snapshot line into fields, honoring double quotes and backslashes."""
    fields = []
    i = 0
    n = len(line)
    while i < n:
        while i < n and line[i].isspace():
            i += 1
        if i >= n:
            break
        if line[i] == '"':
            i += 1
            buf = []
            while i < n:
                ch = line[i]
                if ch == "\\":
                    if i + 1 >= n:
                        raise ValueError(f"line {lineno}: dangling escape")
                    buf.append(line[i + 1])
                    i += 2
                elif ch == '"':
                    i += 1
                    break
                else:
                    buf.append(ch)
                    i += 1
            else:
                raise ValueError(f"line {lineno}: unterminated quote")
            fields.append("".join(buf))
        else:
            j = i
            while j < n and not line[j].isspace():
                j += 1
            fields.append(line[i:j])
            i = j
    return fields
