"""Cognitive per-contact exchange: concept selection and item tallying.

On each contact a donor explores its own semantic network starting from the
concepts both parties share (key vertices).  Edges must be recognized (seen
often enough) to be eligible, and traversal follows descending retrieval
weight, a fluency proxy combining retention weight, distance from the key,
and contact duration.  The selected subgraph (the contributed network) is
merged by the recipient and then drives item transfer: candidate items are
ranked by how many of their tags appear in the contributed network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from cogsim.semantic import SemanticNetwork, TaggedItem


@dataclass
class ExchangeParams:
    """Knobs of the exchange pipeline (both cognitive and benchmark)."""

    tag_limit: int = 25
    data_limit: int = 10
    theta_rec: int = 2
    w_min_seconds: float = 35.0
    tau: float = 0.1
    gamma: float = 0.01

    def validate(self):
        if self.tag_limit < 1:
            raise ValueError("tag_limit must be >= 1")
        if self.data_limit < 0:
            raise ValueError("data_limit must be >= 0")
        if self.theta_rec < 1:
            raise ValueError("theta_rec must be >= 1")
        if not self.w_min_seconds > 0:
            raise ValueError("w_min_seconds must be > 0")
        if not self.tau > 0:
            raise ValueError("tau must be > 0")
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")


class ContributedNetwork:
    """Subgraph selected for transfer: ordered vertices, canonical edge pairs."""

    __slots__ = ("vertices", "_vset", "edges")

    def __init__(self):
        self.vertices: list[str] = []
        self._vset: set[str] = set()
        self.edges: set[tuple[str, str]] = set()

    def __len__(self):
        return len(self.vertices)

    def has_vertex(self, label: str) -> bool:
        return label in self._vset

    def add_vertex(self, label: str):
        if label not in self._vset:
            self._vset.add(label)
            self.vertices.append(label)

    def has_edge(self, a: str, b: str) -> bool:
        return (a, b) in self.edges if a < b else (b, a) in self.edges

    def add_edge(self, a: str, b: str) -> bool:
        """Add edge (endpoints must already be vertices). True if new."""
        key = (a, b) if a < b else (b, a)
        if key[0] not in self._vset or key[1] not in self._vset:
            raise ValueError(f"edge {key} has an endpoint outside the contributed network")
        if key in self.edges:
            return False
        self.edges.add(key)
        return True

    def to_text(self) -> str:
        """Debug dump in the snapshot text format, header CN."""
        from cogsim.semantic import quote_label

        lines = ["CN"]
        for label in self.vertices:
            lines.append(f"V {quote_label(label)}")
        for a, b in sorted(self.edges):
            lines.append(f"E {quote_label(a)} {quote_label(b)}")
        return "\n".join(lines) + "\n"


def key_vertices(donor: SemanticNetwork, recipient: SemanticNetwork) -> set[str]:
    """Concepts known to both parties; empty means the contact carries nothing."""
    return donor.vertex_set() & recipient.vertex_set()


def boost_key_popularity(donor: SemanticNetwork, keys: Iterable[str]):
    """Bump the popularity of every edge incident to a key vertex.

    An edge between two keys is bumped twice, once per endpoint, mirroring the
    per-key loop of the selection algorithm.
    """
    for key in keys:
        for state in donor.neighbors(key).values():
            state.popularity += 1


def key_relevance(donor: SemanticNetwork, key: str, now: float, gamma: float) -> float:
    """Sum of retention weights of the edges incident to a key (0 if isolated)."""
    exp = math.exp
    return math.fsum(
        exp(-(gamma / s.popularity) * (now - s.last_activation))
        for s in donor.neighbors(key).values()
    )


def saturation(contact_duration: float, tau: float) -> float:
    """Duration factor 1 - exp(-tau * D): 0 for instant contacts, -> 1 for long ones."""
    return 1.0 - math.exp(-tau * contact_duration)


def retrieval_weight(
    state, hops_from_key: int, contact_duration: float, now: float, params: ExchangeParams
) -> float:
    """Fluency score of an edge: retention * saturation / distance from key."""
    if hops_from_key < 1:
        raise ValueError("hops_from_key must be >= 1")
    return (
        state.weight(now, params.gamma)
        * saturation(contact_duration, params.tau)
        / hops_from_key
    )


def omega_min(params: ExchangeParams) -> float:
    """Traversal threshold: retrieval weight of the reference edge.

    Reference case: popularity-1 edge at distance 1 from a key, last used
    ``w_min_seconds`` ago, in a 2-second contact.  Raising w_min_seconds lowers
    the threshold, letting staler edges into exchanges.
    """
    return math.exp(-params.gamma * params.w_min_seconds) * saturation(2.0, params.tau)


def compute_contributed_network(
    donor: SemanticNetwork,
    recipient: SemanticNetwork,
    contact_start: float,
    contact_end: float,
    params: ExchangeParams,
) -> ContributedNetwork:
    """Select the donor subgraph to hand over during one contact.

    Keys get their incident popularities boosted first, then each key is
    expanded depth-first in descending relevance order.  From a vertex, only
    recognized edges (popularity >= theta_rec) with retrieval weight >= the
    omega_min threshold are followed, best first; traversed edges are
    activated in the donor network.  A vertex is expanded at most once, and an
    edge is taken only if its far endpoint fits under tag_limit.
    """
    if contact_end < contact_start:
        raise ValueError("contact_end must be >= contact_start")
    now = contact_end
    duration = contact_end - contact_start
    contrib = ContributedNetwork()
    keys = key_vertices(donor, recipient)
    if not keys:
        return contrib

    boost_key_popularity(donor, keys)
    # Descending relevance, ties by ascending label.
    gamma = params.gamma
    ranked = sorted(keys, key=lambda k: (-key_relevance(donor, k, now, gamma), k))
    threshold = omega_min(params)
    sat = saturation(duration, params.tau)
    tag_limit = params.tag_limit
    theta_rec = params.theta_rec
    expanded: set[str] = set()
    vertices = contrib.vertices
    exp = math.exp

    def visit(vertex: str, hops: int):
        if vertex in expanded or len(vertices) >= tag_limit:
            return
        contrib.add_vertex(vertex)
        expanded.add(vertex)
        scored = []
        for neighbor, state in donor.neighbors(vertex).items():
            if state.popularity < theta_rec:
                continue
            w = exp(-(gamma / state.popularity) * (now - state.last_activation)) * sat / hops
            scored.append((-w, neighbor))
        scored.sort()
        for neg_w, neighbor in scored:
            if -neg_w < threshold:
                break
            if contrib.has_edge(vertex, neighbor):
                continue
            if not contrib.has_vertex(neighbor) and len(vertices) >= tag_limit:
                continue
            contrib.add_vertex(neighbor)
            contrib.add_edge(vertex, neighbor)
            donor.activate_edge(vertex, neighbor, now)
            visit(neighbor, hops + 1)

    for key in ranked:
        visit(key, 1)
    return contrib


def rank_by_tally(tallies: dict[str, int]) -> list[str]:
    """Ids with positive tallies, best tally first, ties by ascending id."""
    return sorted(
        (item_id for item_id, count in tallies.items() if count > 0),
        key=lambda item_id: (-tallies[item_id], item_id),
    )


def tally_select(
    sender_items: Iterable[TaggedItem],
    receiver_item_ids: set[str],
    contrib: ContributedNetwork,
    data_limit: int,
) -> list[TaggedItem]:
    """Pick up to data_limit items the receiver lacks, ranked by how many of
    their tags fall inside the contributed network (zero-match items stay)."""
    vbar = contrib._vset
    candidates = {}
    tallies = {}
    for item in sender_items:
        if item.id in receiver_item_ids:
            continue
        count = len(item.tags & vbar)
        if count:
            candidates[item.id] = item
            tallies[item.id] = count
    order = rank_by_tally(tallies)
    return [candidates[item_id] for item_id in order[:data_limit]]


def run_contact_ca(a, b, contact, params: ExchangeParams):
    """Run the full bidirectional cognitive exchange at contact end.

    ``a`` and ``b`` are node states (id, network, items dict).  The lower id
    acts as donor first; the second direction sees the effects of the first.
    Items are copied, never removed from the sender.
    """
    first, second = (a, b) if a.node_id < b.node_id else (b, a)
    for donor, recipient in ((first, second), (second, first)):
        contrib = compute_contributed_network(
            donor.network, recipient.network, contact.start, contact.end, params
        )
        recipient.network.merge_contributed(contrib, contact.end)
        moved = tally_select(
            donor.items.values(), set(recipient.items), contrib, params.data_limit
        )
        for item in moved:
            recipient.items[item.id] = item
