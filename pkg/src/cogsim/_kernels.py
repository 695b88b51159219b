"""Contact extraction kernels: the one hot numeric loop of the simulator.

Scanning every node pair at every sampled step dominates trace-generation
time, so the scan is JIT-compiled with numba when available.  A vectorized
pure-numpy fallback is selected automatically when numba is missing, or
explicitly by setting ``COGSIM_NUMBA=0`` in the environment.  Both paths
produce bit-identical event lists; ``benchmarks/bench_contacts.py`` compares
their throughput.
"""

from __future__ import annotations

import os

import numpy as np


def numba_requested() -> bool:
    return os.environ.get("COGSIM_NUMBA", "1").strip().lower() not in (
        "0",
        "false",
        "no",
        "off",
    )


try:
    if numba_requested():
        from numba import njit

        HAVE_NUMBA = True
    else:
        HAVE_NUMBA = False
except ImportError:
    HAVE_NUMBA = False


def _extract_contacts_scan(positions, tx_range_sq, time_step, duration):
    """Stateful scan over (steps+1, nodes, 2) positions.

    Returns an (m, 4) float array of (a, b, start, end) rows: a contact opens
    at the first in-range sample and closes at the first sample beyond range,
    or at ``duration`` if still open at the last sample.
    """
    steps = positions.shape[0]
    n = positions.shape[1]
    cap = 256
    out = np.empty((cap, 4), dtype=np.float64)
    m = 0
    open_start = np.full((n, n), -1.0)
    for t in range(steps):
        now = t * time_step
        for i in range(n):
            xi = positions[t, i, 0]
            yi = positions[t, i, 1]
            for j in range(i + 1, n):
                dx = positions[t, j, 0] - xi
                dy = positions[t, j, 1] - yi
                inside = dx * dx + dy * dy <= tx_range_sq
                started = open_start[i, j] >= 0.0
                if inside and not started:
                    open_start[i, j] = now
                elif not inside and started:
                    if m == cap:
                        cap *= 2
                        grown = np.empty((cap, 4), dtype=np.float64)
                        grown[:m] = out
                        out = grown
                    out[m, 0] = i
                    out[m, 1] = j
                    out[m, 2] = open_start[i, j]
                    out[m, 3] = now
                    m += 1
                    open_start[i, j] = -1.0
    for i in range(n):
        for j in range(i + 1, n):
            if open_start[i, j] >= 0.0:
                if m == cap:
                    cap *= 2
                    grown = np.empty((cap, 4), dtype=np.float64)
                    grown[:m] = out
                    out = grown
                out[m, 0] = i
                out[m, 1] = j
                out[m, 2] = open_start[i, j]
                out[m, 3] = duration
                m += 1
    return out[:m]


if HAVE_NUMBA:
    _extract_contacts_numba = njit(cache=True)(_extract_contacts_scan)


def extract_contacts_numpy(positions, tx_range, time_step, duration, chunk_steps=None):
    """Vectorized fallback: per-chunk pair masks plus transition bookkeeping."""
    steps, n, _ = positions.shape
    ia, ib = np.triu_indices(n, k=1)
    npairs = ia.size
    tx2 = tx_range * tx_range
    open_start = np.full(npairs, -1.0)
    rows = []
    chunk = chunk_steps or max(1, int(4_000_000 // max(npairs, 1)))
    prev = np.zeros(npairs, dtype=bool)
    for lo in range(0, steps, chunk):
        hi = min(lo + chunk, steps)
        dx = positions[lo:hi, ia, 0] - positions[lo:hi, ib, 0]
        dy = positions[lo:hi, ia, 1] - positions[lo:hi, ib, 1]
        inrange = dx * dx + dy * dy <= tx2
        ext = np.vstack([prev[None, :], inrange])
        starts = inrange & ~ext[:-1]
        ends = ~inrange & ext[:-1]
        ts, ps = np.nonzero(starts)
        te, pe = np.nonzero(ends)
        events = sorted(
            [(int(t) + lo, int(p), True) for t, p in zip(ts, ps)]
            + [(int(t) + lo, int(p), False) for t, p in zip(te, pe)]
        )
        for t, p, is_start in events:
            if is_start:
                open_start[p] = t * time_step
            else:
                rows.append((float(ia[p]), float(ib[p]), open_start[p], t * time_step))
                open_start[p] = -1.0
        prev = inrange[-1]
    for p in np.nonzero(open_start >= 0.0)[0]:
        rows.append((float(ia[p]), float(ib[p]), open_start[p], float(duration)))
    if not rows:
        return np.empty((0, 4), dtype=np.float64)
    return np.asarray(rows, dtype=np.float64)


def extract_contacts(positions, tx_range, time_step, duration):
    """Find all contact intervals; rows sorted by (start, a, b).

    ``positions`` is a (steps+1, nodes, 2) float array of sampled coordinates.
    """
    positions = np.ascontiguousarray(positions, dtype=np.float64)
    if HAVE_NUMBA:
        raw = _extract_contacts_numba(
            positions, float(tx_range) * float(tx_range), float(time_step), float(duration)
        )
    else:
        raw = extract_contacts_numpy(positions, float(tx_range), float(time_step), float(duration))
    if raw.shape[0] == 0:
        return raw
    raw = raw[raw[:, 3] > raw[:, 2]]  # drop zero-length openings at the last sample
    order = np.lexsort((raw[:, 1], raw[:, 0], raw[:, 2]))
    return raw[order]
