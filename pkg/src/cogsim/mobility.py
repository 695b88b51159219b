"""Community-based synthetic mobility and contact-trace handling.

Nodes live in communities pinned to grid cells.  Everyone roams waypoint to
waypoint inside the home cell at a uniform random speed; travellers sometimes
aim their next waypoint at a foreign community's cell and come straight back
on the following leg.  Positions are sampled every ``time_step`` seconds and
pairwise contact intervals are extracted by the kernels module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from cogsim import _kernels
from cogsim.seeding import STREAM_MOBILITY, derive_seed


class ConfigError(ValueError):
    """A configuration value violates an invariant."""


@dataclass
class MobilityConfig:
    area_width: float = 1000.0
    area_height: float = 1000.0
    grid: int = 1
    num_nodes: int = 99
    num_communities: int = 1
    travellers_per_community: int = 0
    speed_min: float = 1.0
    speed_max: float = 1.86
    tx_range: float = 20.0
    time_step: float = 1.0
    duration: float = 25000.0
    travel_probability: float = 0.1
    seed: int = 0

    def validate(self):
        if self.num_nodes < 1:
            raise ConfigError("num_nodes must be >= 1")
        if self.grid < 1:
            raise ConfigError("grid must be >= 1")
        if self.num_communities < 1:
            raise ConfigError("num_communities must be >= 1")
        if self.num_communities > self.grid * self.grid:
            raise ConfigError("num_communities exceeds grid cells")
        if self.num_communities > 1 and self.num_communities > len(
            _spread_cells(self.grid)
        ):
            raise ConfigError(
                "num_communities exceeds the number of mutually non-adjacent cells"
            )
        if not 0 < self.speed_min <= self.speed_max:
            raise ConfigError("need 0 < speed_min <= speed_max")
        if not self.tx_range > 0:
            raise ConfigError("tx_range must be > 0")
        if not self.time_step > 0:
            raise ConfigError("time_step must be > 0")
        if not self.duration > 0:
            raise ConfigError("duration must be > 0")
        if not 0.0 <= self.travel_probability <= 1.0:
            raise ConfigError("travel_probability must be in [0, 1]")
        if self.area_width <= 0 or self.area_height <= 0:
            raise ConfigError("area dimensions must be > 0")


@dataclass(frozen=True, order=True)
class ContactEvent:
    node_a: int
    node_b: int
    start: float
    end: float

    def __post_init__(self):
        if self.node_a >= self.node_b:
            raise ValueError("need node_a < node_b")
        if not self.end > self.start:
            raise ValueError("need end > start")

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass
class Trace:
    config: MobilityConfig
    events: list[ContactEvent]
    communities: list[int]
    travellers: set[int]
    positions: np.ndarray | None = field(default=None, repr=False)


def node_communities(num_nodes: int, num_communities: int) -> list[int]:
    """Round-robin node -> community assignment."""
    return [i % num_communities for i in range(num_nodes)]


def traveller_ids(communities: list[int], per_community: int) -> set[int]:
    """The first ``per_community`` node ids of each community travel."""
    chosen: set[int] = set()
    counts: dict[int, int] = {}
    for node, comm in enumerate(communities):
        if counts.get(comm, 0) < per_community:
            chosen.add(node)
            counts[comm] = counts.get(comm, 0) + 1
    return chosen


def _spread_cells(grid: int) -> list[tuple[int, int]]:
    """Cells on the even sublattice: pairwise non-adjacent, no shared corners."""
    return [(r, c) for r in range(0, grid, 2) for c in range(0, grid, 2)]


def sample_speed(rng: np.random.Generator, cfg: MobilityConfig) -> float:
    """Per-leg speed draw, uniform over the configured range."""
    return rng.uniform(cfg.speed_min, cfg.speed_max)


def generate_trace(cfg: MobilityConfig, keep_positions: bool = False) -> Trace:
    """Simulate waypoint motion and extract the contact-event list.

    Fully determined by the config (the seed feeds the mobility stream of the
    labeled-derivation scheme).
    """
    cfg.validate()
    rng = np.random.default_rng(derive_seed(cfg.seed, STREAM_MOBILITY))

    candidates = _spread_cells(cfg.grid) if cfg.num_communities > 1 else [(0, 0)]
    picks = rng.choice(len(candidates), size=cfg.num_communities, replace=False)
    cells = [candidates[int(i)] for i in picks]

    communities = node_communities(cfg.num_nodes, cfg.num_communities)
    travellers = traveller_ids(communities, cfg.travellers_per_community)

    cw = cfg.area_width / cfg.grid
    ch = cfg.area_height / cfg.grid
    steps = int(round(cfg.duration / cfg.time_step))
    positions = np.empty((steps + 1, cfg.num_nodes, 2), dtype=np.float64)

    def sample_point(cell: tuple[int, int]) -> np.ndarray:
        r, c = cell
        x = (c + rng.random()) * cw
        y = (r + rng.random()) * ch
        return np.array([x, y])

    for node in range(cfg.num_nodes):
        home = cells[communities[node]]
        is_traveller = node in travellers
        pos = sample_point(home)
        positions[0, node] = pos
        away = False
        t = 0
        while t < steps:
            # Pick the next waypoint: travellers abroad always head home;
            # travellers at home sometimes pick a foreign community.
            if away:
                target_cell = home
                away = False
            elif (
                is_traveller
                and cfg.num_communities > 1
                and rng.random() < cfg.travel_probability
            ):
                others = [i for i in range(cfg.num_communities) if i != communities[node]]
                target_cell = cells[others[int(rng.integers(len(others)))]]
                away = True
            else:
                target_cell = home
            waypoint = sample_point(target_cell)
            speed = sample_speed(rng, cfg)
            step_len = speed * cfg.time_step
            delta = waypoint - pos
            dist = math.hypot(delta[0], delta[1])
            arrive = max(1, math.ceil(dist / step_len)) if dist > 0 else 1
            n = min(arrive, steps - t)
            intermediates = n - 1 if n == arrive else n
            if intermediates >= 1:
                unit = delta / dist
                js = np.arange(1, intermediates + 1, dtype=np.float64)
                positions[t + 1 : t + intermediates + 1, node] = (
                    pos + unit[None, :] * (js * step_len)[:, None]
                )
            if n == arrive:
                positions[t + n, node] = waypoint
            pos = positions[t + n, node].copy()
            t += n

    raw = _kernels.extract_contacts(positions, cfg.tx_range, cfg.time_step, cfg.duration)
    events = [
        ContactEvent(int(a), int(b), float(s), float(e)) for a, b, s, e in raw
    ]
    return Trace(
        config=cfg,
        events=events,
        communities=communities,
        travellers=travellers,
        positions=positions if keep_positions else None,
    )


def save_trace(events: Iterable[ContactEvent], path):
    with open(path, "w") as fh:
        fh.write("# contact trace: node_a node_b start_s end_s\n")
        for ev in sorted(events, key=lambda e: (e.start, e.node_a, e.node_b)):
            fh.write(f"{ev.node_a} {ev.node_b} {ev.start!r} {ev.end!r}\n")


def load_trace(path) -> list[ContactEvent]:
    """Parse, validate, and time-sort a contact-trace file."""
    events = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"{path}: line {lineno}: expected 4 fields, got {len(parts)}")
            try:
                a, b = int(parts[0]), int(parts[1])
                start, end = float(parts[2]), float(parts[3])
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: malformed values") from None
            try:
                events.append(ContactEvent(a, b, start, end))
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    events.sort(key=lambda e: (e.start, e.node_a, e.node_b))
    by_pair: dict[tuple[int, int], float] = {}
    for ev in events:
        prev_end = by_pair.get((ev.node_a, ev.node_b))
        if prev_end is not None and ev.start < prev_end:
            raise ValueError(
                f"{path}: overlapping events for pair ({ev.node_a}, {ev.node_b}) at {ev.start}"
            )
        by_pair[(ev.node_a, ev.node_b)] = ev.end
    return events


def save_positions(positions: np.ndarray, time_step: float, path):
    """Optional debug dump: one `t node x y` line per sample."""
    with open(path, "w") as fh:
        for t in range(positions.shape[0]):
            now = t * time_step
            for node in range(positions.shape[1]):
                x, y = positions[t, node]
                fh.write(f"{now!r} {node} {x!r} {y!r}\n")
