"""Non-cognitive baseline: random-walk concept selection, uniform item picks.

Shares every data structure with the cognitive pipeline but replaces its
selection rules: the contributed network grows by a random walk over the
donor graph (each incident edge taken with probability 1/degree), and items
are sampled uniformly among those sharing at least one tag with the
contributed network.  Traversed edges are still activated so both approaches
face the same forgetting process.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from cogsim.exchange import ContributedNetwork, ExchangeParams, key_vertices
from cogsim.semantic import SemanticNetwork, TaggedItem


def walk_step(donor: SemanticNetwork, vertex: str, rng: np.random.Generator) -> str:
    """One random-walk step: a uniformly chosen neighbor (probability 1/degree)."""
    neighbors = sorted(donor.neighbors(vertex))
    return neighbors[int(rng.integers(len(neighbors)))]


def compute_contributed_network_ba(
    donor: SemanticNetwork,
    recipient: SemanticNetwork,
    params: ExchangeParams,
    rng: np.random.Generator,
    now: float,
) -> ContributedNetwork:
    """Random-walk contributed network.

    The walk starts at a uniformly chosen key vertex and repeatedly steps to a
    uniform incident edge.  Visited vertices are never re-added; stepping back
    onto one is allowed, but a vertex whose whole neighborhood is visited is a
    dead end and restarts the walk from an unused key.  Stops at tag_limit
    vertices or when no fresh key remains after a dead end.
    """
    contrib = ContributedNetwork()
    keys = sorted(key_vertices(donor, recipient))
    if not keys:
        return contrib
    fresh = keys
    current = None
    while len(contrib) < params.tag_limit:
        if current is None:
            fresh = [k for k in fresh if not contrib.has_vertex(k)]
            if not fresh:
                break
            current = fresh.pop(int(rng.integers(len(fresh))))
            contrib.add_vertex(current)
            continue
        neighborhood = donor.neighbors(current)
        if not neighborhood or all(contrib.has_vertex(u) for u in neighborhood):
            current = None  # dead end
            continue
        nxt = walk_step(donor, current, rng)
        contrib.add_vertex(nxt)
        if contrib.add_edge(current, nxt):
            donor.activate_edge(current, nxt, now)
        current = nxt
    return contrib


def random_select(
    sender_items: Iterable[TaggedItem],
    receiver_item_ids: set[str],
    contrib: ContributedNetwork,
    data_limit: int,
    rng: np.random.Generator,
) -> list[TaggedItem]:
    """Uniform sample (no replacement) of items the receiver lacks that share
    at least one tag with the contributed network."""
    vbar = contrib._vset
    candidates = sorted(
        (
            item
            for item in sender_items
            if item.id not in receiver_item_ids and item.tags & vbar
        ),
        key=lambda item: item.id,
    )
    k = min(data_limit, len(candidates))
    if k == 0:
        return []
    chosen = rng.choice(len(candidates), size=k, replace=False)
    return [candidates[int(i)] for i in chosen]


def run_contact_ba(a, b, contact, params: ExchangeParams, rng: np.random.Generator):
    """Bidirectional benchmark exchange at contact end (lower id donates first)."""
    first, second = (a, b) if a.node_id < b.node_id else (b, a)
    for donor, recipient in ((first, second), (second, first)):
        contrib = compute_contributed_network_ba(
            donor.network, recipient.network, params, rng, contact.end
        )
        recipient.network.merge_contributed(contrib, contact.end)
        moved = random_select(
            donor.items.values(), set(recipient.items), contrib, params.data_limit, rng
        )
        for item in moved:
            recipient.items[item.id] = item
