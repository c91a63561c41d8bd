"""Benchmark the numba centrality kernel against the pure-python fallback.

Usage: python3 benchmarks/bench_centrality.py [--sizes 100,300,1000] [--repeats 3]
"""

import argparse
import time

import numpy as np

from forumflux._kernels import HAVE_NUMBA, centrality_csr


def random_csr(rng, n, avg_degree=8):
    adj = [set() for _ in range(n)]
    m = n * avg_degree // 2
    for _ in range(m):
        a, b = rng.integers(0, n, size=2)
        if a != b:
            adj[a].add(b)
            adj[b].add(a)
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices = []
    for i, nbrs in enumerate(adj):
        ordered = sorted(nbrs)
        indices.extend(ordered)
        indptr[i + 1] = indptr[i] + len(ordered)
    return indptr, np.asarray(indices, dtype=np.int64)


def bench(indptr, indices, backend, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        centrality_csr(indptr, indices, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="100,300,1000")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(args.seed)

    if HAVE_NUMBA:
        # warm up the JIT so compile time is not billed to the first row
        centrality_csr(*random_csr(rng, 10), backend="numba")
    else:
        print("numba not available; reporting the numpy backend only")

    print(f"{'n':>6} {'numpy (s)':>12} {'numba (s)':>12} {'speedup':>9}")
    for n in sizes:
        indptr, indices = random_csr(rng, n)
        t_py = bench(indptr, indices, "numpy", args.repeats)
        if HAVE_NUMBA:
            t_nb = bench(indptr, indices, "numba", args.repeats)
            clo_py, bet_py = centrality_csr(indptr, indices, backend="numpy")
            clo_nb, bet_nb = centrality_csr(indptr, indices, backend="numba")
            assert np.array_equal(clo_py, clo_nb) and np.array_equal(bet_py, bet_nb)
            print(f"{n:>6} {t_py:>12.4f} {t_nb:>12.4f} {t_py / t_nb:>8.1f}x")
        else:
            print(f"{n:>6} {t_py:>12.4f} {'-':>12} {'-':>9}")


if __name__ == "__main__":
    main()
