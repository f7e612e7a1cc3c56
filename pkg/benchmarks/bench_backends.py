"""Time the compiled core against the numpy fallback on the two hot kernels.

    python3 benchmarks/bench_backends.py [--repeat 5] [--sizes 200 1000 5000]
"""
import argparse
import timeit

import numpy as np

from wlforge import _pycore
from wlforge.gnn.layers import lex_rank
from wlforge.graph import random_graph

try:
    from wlforge import _core
except ImportError:
    _core = None


def refine_round(core, g, colors):
    return core.refine_ids(colors, colors, [g.csr], {})


def neighbour_sum(core, g, rank, F):
    indptr, indices = g.csr
    return core.sorted_sum(indptr, indices, rank, F)


def bench(label, fn, repeat):
    best = min(timeit.repeat(fn, number=1, repeat=repeat))
    return label, best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 1000, 5000])
    ap.add_argument("--width", type=int, default=32)
    args = ap.parse_args()
    if _core is None:
        print("compiled core not built; only the fallback is timed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'n':>7}{'python ms':>12}{'compiled ms':>13}{'speedup':>9}")
    for n in args.sizes:
        g = random_graph(n, min(1.0, 8.0 / n), rng, 3)
        colors = np.asarray(g.labels, dtype=np.int64)
        F = rng.normal(size=(n, args.width))
        rank = lex_rank(F)
        cases = {
            "refine_ids": lambda core: refine_round(core, g, colors),
            "sorted_sum": lambda core: neighbour_sum(core, g, rank, F),
        }
        for name, fn in cases.items():
            _, py = bench("python", lambda: fn(_pycore), args.repeat)
            if _core is None:
                print(f"{name:<14}{n:>7}{py * 1e3:>12.2f}{'-':>13}{'-':>9}")
                continue
            _, c = bench("compiled", lambda: fn(_core), args.repeat)
            print(f"{name:<14}{n:>7}{py * 1e3:>12.2f}{c * 1e3:>13.2f}{py / c:>8.1f}x")


if __name__ == "__main__":
    main()
