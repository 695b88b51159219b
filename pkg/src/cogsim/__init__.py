"""Simulator of semantic-knowledge and content dissemination in opportunistic networks.

Mobile nodes carry associative semantic networks (weighted tag graphs with
exponential forgetting) and sets of tagged content items.  On contact, pairs
of nodes exchange a bounded subgraph of concepts and a bounded batch of items,
either through the cognitive pipeline (fluency-guided graph exploration plus
tally-based item ranking) or through a random-walk benchmark.
"""

__version__ = "0.1.0"

from cogsim.semantic import SemanticNetwork, TaggedItem, EdgeState, normalize_tag
from cogsim.exchange import ExchangeParams, ContributedNetwork

__all__ = [
    "SemanticNetwork",
    "TaggedItem",
    "EdgeState",
    "normalize_tag",
    "ExchangeParams",
    "ContributedNetwork",
]
