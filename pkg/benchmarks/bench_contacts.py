#!/usr/bin/env python3
"""Benchmark the contact-extraction kernel: numba JIT vs pure-numpy fallback.

Generates a realistic waypoint trace, then times both extraction paths on the
same position array and checks they agree. Run directly:

    python benchmarks/bench_contacts.py [--nodes 50] [--steps 25000]
"""

import argparse
import time

import numpy as np

from cogsim import _kernels
from cogsim.mobility import MobilityConfig, generate_trace


def time_call(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, default=50)
    parser.add_argument("--steps", type=int, default=25000)
    parser.add_argument("--area", type=float, default=600.0)
    args = parser.parse_args()

    cfg = MobilityConfig(
        num_nodes=args.nodes,
        area_width=args.area,
        area_height=args.area,
        duration=float(args.steps),
        seed=0,
    )
    print(f"generating positions: {args.nodes} nodes x {args.steps} steps ...")
    trace = generate_trace(cfg, keep_positions=True)
    pos = np.ascontiguousarray(trace.positions)
    duration = float(args.steps)
    pairs = args.nodes * (args.nodes - 1) // 2
    checks = pairs * (args.steps + 1)

    t_np, out_np = time_call(_kernels.extract_contacts_numpy, pos, cfg.tx_range, 1.0, duration)
    print(f"numpy fallback : {t_np:8.3f} s   ({checks/t_np/1e6:7.1f} M pair-checks/s)")

    if _kernels.HAVE_NUMBA:
        tx2 = cfg.tx_range * cfg.tx_range
        _kernels._extract_contacts_numba(pos[:10], tx2, 1.0, 10.0)  # compile
        t_nb, out_nb = time_call(_kernels._extract_contacts_numba, pos, tx2, 1.0, duration)
        print(f"numba njit     : {t_nb:8.3f} s   ({checks/t_nb/1e6:7.1f} M pair-checks/s)")
        print(f"speedup        : {t_np/t_nb:8.1f} x")
        key = lambda r: (r[2], r[0], r[1])
        same = sorted(map(tuple, out_nb), key=key) == sorted(map(tuple, out_np), key=key)
        print(f"paths agree    : {same} ({len(out_np)} contact events)")
    else:
        print("numba unavailable or disabled (COGSIM_NUMBA=0); numpy path only")


if __name__ == "__main__":
    main()
