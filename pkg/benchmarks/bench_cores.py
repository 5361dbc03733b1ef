"""Time the pure-Python core against the compiled one.

Runs the same seeded simulations on each backend and reports wall
time per run plus the speedup.  Workloads:

  fairness   two miners (aggregate + atomic), the grid cell shape
  efficiency n equal atomic miners, the throughput sweep shape

Usage: python3 benchmarks/bench_cores.py [--turns 200] [--repeats 5]
"""

import argparse
import math
import time

from dagledger import MinerSpec, SimParams, run, trial_metrics
from dagledger.kernels import available_backends


def fairness_params(turns, seed):
    return SimParams(
        miners=(
            MinerSpec(0, 0.7, 0.05, "non-atomic-aggregate"),
            MinerSpec(1, 0.3, 0.5),
        ),
        k=1,
        eta=6,
        lam=6,
        horizon=turns,
        seed=seed,
    )


def efficiency_params(turns, seed, k):
    return SimParams(
        miners=tuple(MinerSpec(i, 0.25, 0.2) for i in range(4)),
        k=k,
        eta=6,
        lam=6,
        horizon=turns,
        seed=seed,
    )


def time_backend(params_list, backend, repeats):
    best = math.inf
    metrics = None
    for _ in range(repeats):
        start = time.perf_counter()
        for params in params_list:
            state = run(params, backend=backend)
        elapsed = (time.perf_counter() - start) / len(params_list)
        best = min(best, elapsed)
        metrics = trial_metrics(state)
    return best, metrics


def main():
    parser = argparse.ArgumentParser(description="compare simulation core backends")
    parser.add_argument("--turns", type=int, default=200)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--runs", type=int, default=5, help="seeds per timing loop")
    args = parser.parse_args()

    backends = available_backends()
    if "compiled" not in backends:
        print("compiled core not built; only timing the python core")

    workloads = {
        "fairness k=1": [fairness_params(args.turns, s) for s in range(args.runs)],
        "efficiency k=2": [efficiency_params(args.turns, s, 2) for s in range(args.runs)],
        "efficiency k=inf": [
            efficiency_params(args.turns, s, math.inf) for s in range(args.runs)
        ],
    }

    for name, params_list in workloads.items():
        row = {}
        check = {}
        for backend in backends:
            best, metrics = time_backend(params_list, backend, args.repeats)
            row[backend] = best
            check[backend] = metrics
        line = f"{name:18s}"
        for backend in backends:
            line += f"  {backend}: {row[backend] * 1e3:8.2f} ms/run"
        if "compiled" in row and "python" in row:
            line += f"  speedup: {row['python'] / row['compiled']:5.1f}x"
            if check["python"] != check["compiled"]:
                line += "  METRICS DISAGREE"
        print(line)


if __name__ == "__main__":
    main()
