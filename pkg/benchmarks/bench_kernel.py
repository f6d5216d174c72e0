"""Compare the compiled grid kernel with the pure-Python fallback.

Usage:
    python benchmarks/bench_kernel.py [--repeat N] [--flows 100,300,500]

Both backends are run on the same plans and seeds; the script checks that
their vehicle records are identical before reporting timings.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from fairway.grid import HAVE_EXTENSION, DemandSpec, SignalPlan, build_network, run

PLANS = [SignalPlan(g, t) for g in (5, 20, 40) for t in (5, 20, 40)]


def time_backend(backend: str, network, flows, repeat: int) -> tuple[float, list]:
    samples, results = [], []
    for _ in range(repeat):
        results = []
        start = time.perf_counter()
        for flow in flows:
            for plan in PLANS:
                results.append(run(network, plan, DemandSpec(flow, seed=1), backend=backend))
        samples.append(time.perf_counter() - start)
    return statistics.median(samples), results


def same(a, b) -> bool:
    ra, rb = a.vehicle_records, b.vehicle_records
    return all(np.array_equal(getattr(ra, f), getattr(rb, f), equal_nan=True)
               for f in ("entry_time_s", "exit_time_s", "delay_s", "completed"))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--flows", default="100,300,500")
    args = parser.parse_args()
    flows = [float(f) for f in args.flows.split(",")]
    network = build_network()
    n_runs = len(flows) * len(PLANS)

    py_t, py_res = time_backend("python", network, flows, args.repeat)
    print(f"python  {py_t:8.3f} s for {n_runs} runs ({1e3 * py_t / n_runs:.1f} ms/run)")
    if not HAVE_EXTENSION:
        print("cython  extension not built; run `pip install -e . --no-build-isolation`")
        return
    cy_t, cy_res = time_backend("cython", network, flows, args.repeat)
    print(f"cython  {cy_t:8.3f} s for {n_runs} runs ({1e3 * cy_t / n_runs:.1f} ms/run)")
    print(f"speedup {py_t / cy_t:8.1f}x")
    identical = all(same(a, b) for a, b in zip(py_res, cy_res))
    print(f"results identical: {identical}")
    if not identical:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
