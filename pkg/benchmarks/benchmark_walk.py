"""Compare the compiled and pure-Python walk kernels.

Runs the same killed-walk workload through both implementations,
checks that the outputs agree bit for bit, and reports throughput.

    python benchmarks/benchmark_walk.py --paths 200000 --repeat 3
"""

import argparse
import time

import numpy as np

from specdom.complexes import assemble_laplacian
from specdom.fixtures import p5_mixed
from specdom.stochastic import walk_tables
from specdom import walkcore


def run(kernel, tables, start, paths, seed, horizon):
    t0 = time.perf_counter()
    taus, exits = walkcore.run_paths(
        tables.indptr,
        tables.codes,
        tables.cum,
        tables.rates,
        start,
        paths,
        seed,
        horizon=horizon,
        force=kernel,
    )
    return time.perf_counter() - t0, taus, exits


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--paths", type=int, default=200000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--horizon", type=float, default=50.0)
    args = parser.parse_args()

    op = assemble_laplacian(p5_mixed())
    tables = walk_tables(op)
    kernels = ["pure"]
    if walkcore.HAVE_COMPILED:
        kernels.append("compiled")
    else:
        print("compiled kernel not available, benchmarking pure only")

    results = {}
    for kernel in kernels:
        best = np.inf
        for _ in range(args.repeat):
            dt, taus, exits = run(
                kernel, tables, 0, args.paths, args.seed, args.horizon
            )
            best = min(best, dt)
        results[kernel] = (best, taus, exits)
        print(f"{kernel:>9}: {best:.3f} s  ({args.paths / best:,.0f} paths/s)")

    if len(results) == 2:
        (tp, xp), (tc, xc) = (
            results["pure"][1:],
            results["compiled"][1:],
        )
        same = np.array_equal(tp, tc) and np.array_equal(xp, xc)
        print(f"bit-identical outputs: {same}")
        print(f"speedup: {results['pure'][0] / results['compiled'][0]:.1f}x")
        if not same:
            raise SystemExit("kernel mismatch")


if __name__ == "__main__":
    main()
