"""Time the numba and pure-numpy kernel backends against each other.

    python3 benchmarks/bench_kernels.py --sizes 1000 10000 100000 --repeat 5

Also times one end-to-end quasipotency witness per backend.
"""
import argparse
import statistics
import time

import numpy as np

from potency import _kernels
from potency.graph import base_graph_direct_product, undirected_csr
from potency.groups import FiniteGroup
from potency.witness import quasipotency_witness
from potency.words import FactorSystem, word


def _time(fn, repeat):
    fn()  # warm-up (jit compile on first numba call)
    runs = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        runs.append(time.perf_counter() - t0)
    return statistics.median(runs)


def _cases(size, rng):
    perm = rng.permutation(size).astype(np.int64)
    # a degree-4 random graph for the BFS kernel
    nbrs = np.stack([rng.permutation(size) for _ in range(2)])
    src = np.concatenate([np.arange(size)] * 2)
    dst = nbrs.reshape(-1)
    indptr, indices = _csr(size, src, dst)
    sources = np.arange(min(size, 64), dtype=np.int64)
    steps = np.stack([rng.permutation(size) for _ in range(6)]).astype(np.int64)
    factors = np.array([0, 1, 0, 1, 0, 1], dtype=np.int64)
    bclass = np.arange(size, dtype=np.int64)
    orbit, _ = _kernels.orbit_labels(perm)
    return {
        "orbit_labels": lambda: _kernels.orbit_labels(perm),
        "bfs_distances": lambda: _kernels.bfs_distances(indptr, indices, sources, 8),
        "walk_tally": lambda: _kernels.walk_tally(steps, factors, bclass, orbit),
    }


def _csr(n, src, dst):
    from scipy.sparse import csr_matrix

    rows = np.concatenate([src, dst])
    cols = np.concatenate([dst, src])
    adj = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    return adj.indptr.astype(np.int64), adj.indices.astype(np.int64)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1_000, 10_000, 100_000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if _kernels.HAS_NUMBA else [])
    print(f"{'kernel':<16}{'size':>9}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for size in args.sizes:
        rng = np.random.default_rng(args.seed)
        cases = _cases(size, rng)
        for name, fn in cases.items():
            times = []
            for b in backends:
                prev = _kernels.set_backend(b)
                times.append(_time(fn, args.repeat))
                _kernels.set_backend(prev)
            speed = times[0] / times[-1] if len(times) > 1 else 1.0
            print(f"{name:<16}{size:>9}" + "".join(f"{t * 1e3:>10.3f}ms" for t in times) + f"{speed:>9.2f}x")

    fs = FactorSystem([FiniteGroup.cyclic(2), FiniteGroup.cyclic(3)])
    u = word((0, 1), (1, 1))
    for b in backends:
        prev = _kernels.set_backend(b)
        t = _time(lambda: quasipotency_witness(fs, u, 8), args.repeat)
        _kernels.set_backend(prev)
        print(f"quasipotency_witness n=8 [{b}]: {t * 1e3:.2f} ms")


if __name__ == "__main__":
    main()
