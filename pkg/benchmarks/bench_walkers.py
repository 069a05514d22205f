"""Compare the compiled walker kernel with the numpy fallback.

Runs the direct harmonic-measure estimator on a shipped system with each
available backend, checks that both return the same hit counts, and prints
walkers per second.

    python3 benchmarks/bench_walkers.py --walkers 2000 10000 --depth 8 --assign 4
"""
from __future__ import annotations

import argparse
import time
from importlib import resources

import numpy as np

from nacifs.conformal import load_system
from nacifs.harmonic import available_backends
from nacifs.harmonic.estimate import WalkerConfig, estimate_direct


def bench(system, walkers, depth, assign, backend, repeats):
    best, est = np.inf, None
    for _ in range(repeats):
        t0 = time.perf_counter()
        est = estimate_direct(system, 0, depth, assign, WalkerConfig(walkers=walkers, seed=1), backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, est


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--system", default="quadratic_two_branch", help="name of a shipped system")
    p.add_argument("--walkers", type=int, nargs="+", default=[2000, 10000])
    p.add_argument("--depth", type=int, default=8, help="disk approximation depth")
    p.add_argument("--assign", type=int, default=4)
    p.add_argument("--repeats", type=int, default=3)
    args = p.parse_args(argv)

    system = load_system(resources.files("nacifs") / "data" / f"{args.system}.json")
    backends = available_backends()
    print(f"system={args.system} depth={args.depth} assign={args.assign} backends={backends}")
    print(f"{'walkers':>8} {'backend':>9} {'seconds':>9} {'walkers/s':>11} {'speedup':>8} identical")
    for n in args.walkers:
        results = {b: bench(system, n, args.depth, args.assign, b, args.repeats) for b in backends}
        ref = results["python"][0]
        counts = [r[1].counts for r in results.values()]
        same = all(np.array_equal(counts[0], c) for c in counts[1:])
        for b, (sec, _) in results.items():
            print(f"{n:>8} {b:>9} {sec:>9.3f} {n / sec:>11.0f} {ref / sec:>7.1f}x {same}")


if __name__ == "__main__":
    main()
