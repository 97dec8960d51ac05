"""Compiled inner loops: a splitmix64 stream, walk kernels and Wilson's algorithm.

Each kernel takes a 64-bit seed word (see :func:`percolab._rng.word_seed`), so
its output is a function of the arguments alone.
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True, nogil=True)
def _next(state):
    state[0] += _GOLDEN
    z = state[0]
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def _below(state, n):
    """Uniform integer in ``[0, n)``."""
    u = np.float64(_next(state) >> _S11) * _INV53
    k = np.int64(u * n)
    return k if k < n else n - 1


@njit(cache=True, nogil=True)
def _new_state(seed_word):
    s = np.empty(1, dtype=np.uint64)
    s[0] = np.uint64(seed_word)
    return s


@njit(cache=True, nogil=True)
def walk_graph(indptr, indices, eids, edge_on, boundary, start, steps, delayed, seed_word):
    """Simple or delayed walk on the occupied edges of a CSR graph.

    Simple: uniform over occupied incident edges.  Delayed: candidate uniform
    over the vertex itself and all host neighbours, moving only along an
    occupied edge.  Stops at the first boundary vertex; returns
    ``(path, length)`` with ``path[:length]`` valid.
    """
    state = _new_state(seed_word)
    path = np.empty(steps + 1, dtype=np.int64)
    path[0] = start
    v = start
    n = 1
    if boundary[v]:
        return path, n
    for _ in range(steps):
        lo = indptr[v]
        hi = indptr[v + 1]
        if delayed:
            k = _below(state, hi - lo + 1)
            if k < hi - lo and edge_on[eids[lo + k]]:
                v = indices[lo + k]
        else:
            cnt = 0
            for j in range(lo, hi):
                if edge_on[eids[j]]:
                    cnt += 1
            if cnt == 0:
                return path, -1
            k = _below(state, cnt)
            for j in range(lo, hi):
                if edge_on[eids[j]]:
                    if k == 0:
                        v = indices[j]
                        break
                    k -= 1
        path[n] = v
        n += 1
        if boundary[v]:
            break
    return path, n


@njit(cache=True, nogil=True)
def walk_induced(indptr, indices, eids, edge_on, boundary, in_star, start, steps, budget,
                 seed_word):
    """Delayed walk observed on ``in_star``.

    Returns ``(states, times, count, status)``; ``status`` is 0 when all
    ``steps`` returns happened, 1 if an excursion exceeded ``budget``, 2 on
    absorption at the boundary.
    """
    state = _new_state(seed_word)
    states = np.empty(steps + 1, dtype=np.int64)
    times = np.empty(steps + 1, dtype=np.int64)
    states[0] = start
    times[0] = 0
    v = start
    t = 0
    count = 1
    for _ in range(steps):
        excursion = 0
        while True:
            lo = indptr[v]
            hi = indptr[v + 1]
            k = _below(state, hi - lo + 1)
            if k < hi - lo and edge_on[eids[lo + k]]:
                v = indices[lo + k]
            t += 1
            excursion += 1
            if boundary[v]:
                return states, times, count, 2
            if in_star[v]:
                break
            if excursion >= budget:
                return states, times, count, 1
        states[count] = v
        times[count] = t
        count += 1
    return states, times, count, 0


@njit(cache=True, nogil=True)
def walk_tree_moves(degree, steps, delayed, seed_word):
    """Walk on the infinite ``degree``-regular tree, as raw moves and distances.

    ``moves[t]`` is the uniform draw behind step ``t``: from the root it picks
    child ``moves[t]``; elsewhere ``0`` goes up and ``k >= 1`` to child
    ``k - 1``.  In delayed mode the extra value ``degree`` means "stay".
    """
    state = _new_state(seed_word)
    moves = np.empty(steps, dtype=np.int16)
    dist = np.empty(steps + 1, dtype=np.int64)
    dist[0] = 0
    d = 0
    width = degree + 1 if delayed else degree
    for t in range(steps):
        k = _below(state, width)
        moves[t] = k
        if k < degree:
            if d == 0 or k != 0:
                d += 1
            else:
                d -= 1
        dist[t + 1] = d
    return moves, dist


@njit(cache=True, nogil=True)
def wilson(indptr, targets, order, root, seed_word):
    """Wilson's algorithm on a multigraph in CSR form.

    ``targets[j]`` is the far end of half-edge ``j``; parallel half-edges are
    allowed.  Walks start from the vertices in ``order``.  Returns
    ``next_half[v]``, the half-edge from ``v`` toward the root (``-1`` at the
    root).
    """
    n = len(indptr) - 1
    state = _new_state(seed_word)
    in_tree = np.zeros(n, dtype=np.bool_)
    nxt = np.full(n, -1, dtype=np.int64)
    in_tree[root] = True
    for s in order:
        u = s
        while not in_tree[u]:
            lo = indptr[u]
            j = lo + _below(state, indptr[u + 1] - lo)
            nxt[u] = j
            u = targets[j]
        u = s
        while not in_tree[u]:
            in_tree[u] = True
            u = targets[nxt[u]]
    return nxt
