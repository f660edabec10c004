"""Hot inner loops, each with a numba and a pure-numpy implementation.

The numba path is used when numba imports and ``POTENCY_DISABLE_NUMBA`` is
unset (or "0").  Both paths must return identical arrays; the test suite runs
them against each other and ``benchmarks/bench_kernels.py`` times them.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

_DISABLED = os.environ.get("POTENCY_DISABLE_NUMBA", "0") not in ("", "0")

BACKEND = "numba" if HAS_NUMBA and not _DISABLED else "numpy"


def set_backend(name: str) -> str:
    """Switch kernel backend at runtime; returns the previous one."""
    global BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba is not importable")
    prev, BACKEND = BACKEND, name
    return prev


# ---------------------------------------------------------------------------
# cycle decomposition


def _orbit_labels_numpy(perm):
    n = perm.shape[0]
    rep = np.arange(n, dtype=np.int64)
    jump = perm.astype(np.int64, copy=True)
    # pointer doubling: after j rounds rep[v] = min over 2**j successors of v
    span = 1
    while span < n:
        rep = np.minimum(rep, rep[jump])
        jump = jump[jump]
        span *= 2
    sizes = np.bincount(rep, minlength=n)
    return rep, sizes[rep]


def _orbit_labels_loop(perm):
    n = perm.shape[0]
    rep = np.full(n, -1, dtype=np.int64)
    size = np.zeros(n, dtype=np.int64)
    for start in range(n):
        if rep[start] >= 0:
            continue
        length = 0
        v = start
        while rep[v] < 0:
            rep[v] = start
            length += 1
            v = perm[v]
        v = start
        for _ in range(length):
            size[v] = length
            v = perm[v]
    return rep, size


# ---------------------------------------------------------------------------
# breadth-first distances on a CSR graph, truncated at max_depth


def _bfs_numpy(indptr, indices, sources, max_depth):
    n = indptr.shape[0] - 1
    s = sources.shape[0]
    dist = np.full((s, n), -1, dtype=np.int64)
    rows = np.arange(s)
    dist[rows, sources] = 0
    frontier = np.zeros((s, n), dtype=bool)
    frontier[rows, sources] = True
    deg = np.diff(indptr)
    owner = np.repeat(np.arange(n), deg)
    for depth in range(1, max_depth + 1):
        # expand every frontier vertex along its CSR row
        hit = frontier[:, owner]
        nxt = np.zeros((s, n), dtype=bool)
        r, e = np.nonzero(hit)
        nxt[r, indices[e]] = True
        nxt &= dist < 0
        if not nxt.any():
            break
        dist[nxt] = depth
        frontier = nxt
    return dist


def _bfs_loop(indptr, indices, sources, max_depth):
    n = indptr.shape[0] - 1
    s = sources.shape[0]
    dist = np.full((s, n), -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for row in range(s):
        src = sources[row]
        dist[row, src] = 0
        head = 0
        tail = 1
        queue[0] = src
        while head < tail:
            v = queue[head]
            head += 1
            d = dist[row, v]
            if d >= max_depth:
                continue
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if dist[row, w] < 0:
                    dist[row, w] = d + 1
                    queue[tail] = w
                    tail += 1
    return dist


# ---------------------------------------------------------------------------
# walk every vertex along a letter sequence, tallying boundary crossings


def _aggregate(o, c, k, sgn):
    if len(o) == 0:
        z = np.zeros(0, np.int64)
        return z.reshape(0, 3), z, z
    # pack (orbit, class, factor) into one int64 so unique runs on a flat array
    nv = int(max(o.max(), c.max())) + 1
    nf = int(k.max()) + 1
    if nv * nv * nf >= 2**62:
        raise OverflowError("graph too large to pack crossing keys into int64")
    packed = (o * nv + c) * nf + k
    uniq, inv = np.unique(packed, return_inverse=True)
    inv = inv.reshape(-1)
    plus = np.bincount(inv, weights=(sgn > 0), minlength=len(uniq)).astype(np.int64)
    minus = np.bincount(inv, weights=(sgn < 0), minlength=len(uniq)).astype(np.int64)
    keys = np.stack([uniq // nf // nv, uniq // nf % nv, uniq % nf], axis=1)
    return keys, plus, minus


def _walk_records_numpy(steps, factors, bclass, orbit):
    n = steps.shape[1]
    cur = np.arange(n, dtype=np.int64)
    o, c, k, sgn = [], [], [], []
    for j in range(steps.shape[0]):
        nxt = steps[j][cur]
        f = factors[j]
        if f >= 0:
            o += [orbit, orbit]
            c += [bclass[nxt], bclass[cur]]
            k.append(np.full(2 * n, f, dtype=np.int64))
            sgn += [np.ones(n, np.int64), -np.ones(n, np.int64)]
        cur = nxt
    if not o:
        z = np.zeros(0, np.int64)
        return z, z, z, z
    return np.concatenate(o), np.concatenate(c), np.concatenate(k), np.concatenate(sgn)


def _walk_records_loop(steps, factors, bclass, orbit):
    n = steps.shape[1]
    nsteps = steps.shape[0]
    counted = 0
    for j in range(nsteps):
        if factors[j] >= 0:
            counted += 1
    size = 2 * n * counted
    o = np.empty(size, dtype=np.int64)
    c = np.empty(size, dtype=np.int64)
    k = np.empty(size, dtype=np.int64)
    sgn = np.empty(size, dtype=np.int64)
    cur = np.arange(n)
    pos = 0
    for j in range(nsteps):
        f = factors[j]
        for v in range(n):
            nxt = steps[j, cur[v]]
            if f >= 0:
                o[pos] = orbit[v]
                c[pos] = bclass[nxt]
                k[pos] = f
                sgn[pos] = 1
                o[pos + 1] = orbit[v]
                c[pos + 1] = bclass[cur[v]]
                k[pos + 1] = f
                sgn[pos + 1] = -1
                pos += 2
            cur[v] = nxt
    return o, c, k, sgn


if HAS_NUMBA:
    _orbit_labels_jit = njit(cache=True)(_orbit_labels_loop)
    _bfs_jit = njit(cache=True)(_bfs_loop)
    _walk_records_jit = njit(cache=True)(_walk_records_loop)

def orbit_labels(perm):
    """Cycle decomposition of a permutation array.

    Returns ``(rep, size)``: ``rep[v]`` is the least vertex on v's cycle and
    ``size[v]`` that cycle's length.
    """
    perm = np.ascontiguousarray(perm, dtype=np.int64)
    if BACKEND == "numba":
        rep, size = _orbit_labels_jit(perm)
        # the loop labels by first-visited start, which is the cycle minimum
        return rep, size
    return _orbit_labels_numpy(perm)


def bfs_distances(indptr, indices, sources, max_depth):
    """Distances from each source, -1 where unreachable within ``max_depth``."""
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    sources = np.ascontiguousarray(sources, dtype=np.int64)
    if BACKEND == "numba":
        return _bfs_jit(indptr, indices, sources, int(max_depth))
    return _bfs_numpy(indptr, indices, sources, int(max_depth))


def walk_tally(steps, factors, bclass, orbit):
    """Crossing tallies of every orbit's closed walk.

    ``steps`` is an (L, V) array: row j moves a walker across the j-th edge
    of the word.  ``factors[j]`` is the factor of that edge, or -1 when the
    edge is not counted.  Returns ``(keys, plus, minus)`` where each key row
    is (orbit, class, factor), sorted lexicographically; ``plus`` counts
    edges entering the class and ``minus`` edges leaving it.
    """
    steps = np.ascontiguousarray(steps, dtype=np.int64)
    factors = np.ascontiguousarray(factors, dtype=np.int64)
    bclass = np.ascontiguousarray(bclass, dtype=np.int64)
    orbit = np.ascontiguousarray(orbit, dtype=np.int64)
    if BACKEND == "numba":
        recs = _walk_records_jit(steps, factors, bclass, orbit)
    else:
        recs = _walk_records_numpy(steps, factors, bclass, orbit)
    return _aggregate(*recs)
