"""Labeled derivation of per-subsystem random streams from one root seed.

Every source of randomness in a run (mobility, dataset, benchmark walk) draws
from its own generator, seeded by hashing ``"<root>:<label>"`` with SHA-256.
The scheme is plain enough to be reproduced in any language, so a root seed
fully determines a run everywhere.
"""

from __future__ import annotations

import hashlib

import numpy as np

STREAM_MOBILITY = "mobility"
STREAM_DATASET = "dataset"
STREAM_BENCHMARK = "ba-walk"


def derive_seed(root_seed: int, label: str) -> int:
    """Derive a 63-bit child seed for the named stream."""
    digest = hashlib.sha256(f"{root_seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def stream(root_seed: int, label: str) -> np.random.Generator:
    """Seeded generator for the named stream."""
    return np.random.default_rng(derive_seed(root_seed, label))
