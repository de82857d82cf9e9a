"""Compiled batch kernels for the samplers.

Each kernel advances a single SplitMix64 stream across a whole batch of
samples, repeating the reference step arithmetic from walks.py operation
for operation, so pure and compiled runs of the same batch seed produce
bit-identical samples. Kernels release the GIL, which lets batches run
in parallel threads.

numba is optional: when it is missing (or LEPART_PURE is set in the
environment) AVAILABLE is False and callers fall back to the reference
sampler.
"""

from __future__ import annotations

import os

import numpy as np

try:
    if os.environ.get("LEPART_PURE"):
        raise ImportError("pure mode requested")
    from numba import njit

    AVAILABLE = True
except ImportError:
    AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True, nogil=True, inline="always")
def _uniform(state):
    state = state + _GOLDEN
    z = state
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)) * _INV53, state


@njit(cache=True, nogil=True)
def wilson_batch_graph(cumw, strength, last, q, seed, parents, roots):
    """Sample rooted forests on a dense graph; fill parents and roots rows."""
    n_samples = parents.shape[0]
    n = strength.shape[0]
    state = np.uint64(seed)
    path = np.empty(n, dtype=np.int64)
    posv = np.full(n, -1, dtype=np.int64)
    in_forest = np.zeros(n, dtype=np.bool_)
    for s in range(n_samples):
        for v in range(n):
            in_forest[v] = False
        for v0 in range(n):
            if in_forest[v0]:
                continue
            path[0] = v0
            posv[v0] = 0
            plen = 1
            hit = -1
            while True:
                x = path[plen - 1]
                u, state = _uniform(state)
                t = u * (q + strength[x])
                if t < q:
                    break
                j = np.searchsorted(cumw[x], t - q, side="right")
                if j > last[x]:
                    j = last[x]
                y = j
                if in_forest[y]:
                    hit = y
                    break
                p = posv[y]
                if p >= 0:
                    for i in range(p + 1, plen):
                        posv[path[i]] = -1
                    plen = p + 1
                else:
                    posv[y] = plen
                    path[plen] = y
                    plen += 1
            for i in range(plen - 1):
                parents[s, path[i]] = path[i + 1]
            if hit < 0:
                parents[s, path[plen - 1]] = -1
                r = path[plen - 1]
            else:
                parents[s, path[plen - 1]] = hit
                r = roots[s, hit]
            for i in range(plen):
                v = path[i]
                in_forest[v] = True
                roots[s, v] = r
                posv[v] = -1


@njit(cache=True, nogil=True)
def wilson_batch_complete(n, w, q, seed, parents, roots):
    """Forest sampler on the complete graph with uniform weight w."""
    n_samples = parents.shape[0]
    s_tot = (n - 1) * w
    state = np.uint64(seed)
    path = np.empty(n, dtype=np.int64)
    posv = np.full(n, -1, dtype=np.int64)
    in_forest = np.zeros(n, dtype=np.bool_)
    for s in range(n_samples):
        for v in range(n):
            in_forest[v] = False
        for v0 in range(n):
            if in_forest[v0]:
                continue
            path[0] = v0
            posv[v0] = 0
            plen = 1
            hit = -1
            while True:
                x = path[plen - 1]
                u, state = _uniform(state)
                t = u * (q + s_tot)
                if t < q:
                    break
                j = int((t - q) / w)
                if j > n - 2:
                    j = n - 2
                y = j if j < x else j + 1
                if in_forest[y]:
                    hit = y
                    break
                p = posv[y]
                if p >= 0:
                    for i in range(p + 1, plen):
                        posv[path[i]] = -1
                    plen = p + 1
                else:
                    posv[y] = plen
                    path[plen] = y
                    plen += 1
            for i in range(plen - 1):
                parents[s, path[i]] = path[i + 1]
            if hit < 0:
                parents[s, path[plen - 1]] = -1
                r = path[plen - 1]
            else:
                parents[s, path[plen - 1]] = hit
                r = roots[s, hit]
            for i in range(plen):
                v = path[i]
                in_forest[v] = True
                roots[s, v] = r
                posv[v] = -1


@njit(cache=True, nogil=True)
def wilson_batch_two_community(ncomm, w1, w2, q, seed, parents, roots):
    """Forest sampler on two fully connected communities of ncomm vertices."""
    n_samples = parents.shape[0]
    n = 2 * ncomm
    inside = (ncomm - 1) * w1
    s_tot = inside + ncomm * w2
    state = np.uint64(seed)
    path = np.empty(n, dtype=np.int64)
    posv = np.full(n, -1, dtype=np.int64)
    in_forest = np.zeros(n, dtype=np.bool_)
    for s in range(n_samples):
        for v in range(n):
            in_forest[v] = False
        for v0 in range(n):
            if in_forest[v0]:
                continue
            path[0] = v0
            posv[v0] = 0
            plen = 1
            hit = -1
            while True:
                x = path[plen - 1]
                u, state = _uniform(state)
                t = u * (q + s_tot)
                if t < q:
                    break
                v = t - q
                if v < inside:
                    j = int(v / w1)
                    if j > ncomm - 2:
                        j = ncomm - 2
                    xl = x if x < ncomm else x - ncomm
                    y = j if j < xl else j + 1
                    if x >= ncomm:
                        y = y + ncomm
                else:
                    j = int((v - inside) / w2)
                    if j > ncomm - 1:
                        j = ncomm - 1
                    y = ncomm + j if x < ncomm else j
                if in_forest[y]:
                    hit = y
                    break
                p = posv[y]
                if p >= 0:
                    for i in range(p + 1, plen):
                        posv[path[i]] = -1
                    plen = p + 1
                else:
                    posv[y] = plen
                    path[plen] = y
                    plen += 1
            for i in range(plen - 1):
                parents[s, path[i]] = path[i + 1]
            if hit < 0:
                parents[s, path[plen - 1]] = -1
                r = path[plen - 1]
            else:
                parents[s, path[plen - 1]] = hit
                r = roots[s, hit]
            for i in range(plen):
                v = path[i]
                in_forest[v] = True
                roots[s, v] = r
                posv[v] = -1


@njit(cache=True, nogil=True)
def le_walk_batch_graph(cumw, strength, last, q, seed, start, lengths, codes, encode):
    """Loop-erased walks from `start` run until killed.

    Fills per-sample path lengths and, when `encode` is set, an integer
    code of the surviving path (digits vertex+1, base n+1, most
    significant first). Codes require (n+1)^n to fit in 64 bits.
    """
    n_samples = lengths.shape[0]
    n = strength.shape[0]
    state = np.uint64(seed)
    path = np.empty(n, dtype=np.int64)
    posv = np.full(n, -1, dtype=np.int64)
    for s in range(n_samples):
        path[0] = start
        posv[start] = 0
        plen = 1
        while True:
            x = path[plen - 1]
            u, state = _uniform(state)
            t = u * (q + strength[x])
            if t < q:
                break
            j = np.searchsorted(cumw[x], t - q, side="right")
            if j > last[x]:
                j = last[x]
            y = j
            p = posv[y]
            if p >= 0:
                for i in range(p + 1, plen):
                    posv[path[i]] = -1
                plen = p + 1
            else:
                posv[y] = plen
                path[plen] = y
                plen += 1
        lengths[s] = plen
        code = 0
        if encode:
            for i in range(plen):
                code = code * (n + 1) + path[i] + 1
        codes[s] = code
        for i in range(plen):
            posv[path[i]] = -1


@njit(cache=True, nogil=True)
def split_batch_graph(cumw, strength, last, q, seed, n_samples, x0, y0):
    """Success count of the two-walk separation estimator.

    Per sample: run a loop-erased walk from x0 until killed; a sample
    whose surviving path contains y0 fails outright, otherwise a plain
    killed walk from y0 succeeds if it dies before reaching the path.
    """
    n = strength.shape[0]
    state = np.uint64(seed)
    path = np.empty(n, dtype=np.int64)
    posv = np.full(n, -1, dtype=np.int64)
    successes = 0
    for s in range(n_samples):
        path[0] = x0
        posv[x0] = 0
        plen = 1
        while True:
            x = path[plen - 1]
            u, state = _uniform(state)
            t = u * (q + strength[x])
            if t < q:
                break
            j = np.searchsorted(cumw[x], t - q, side="right")
            if j > last[x]:
                j = last[x]
            y = j
            p = posv[y]
            if p >= 0:
                for i in range(p + 1, plen):
                    posv[path[i]] = -1
                plen = p + 1
            else:
                posv[y] = plen
                path[plen] = y
                plen += 1
        if posv[y0] < 0:
            cur = y0
            while True:
                u, state = _uniform(state)
                t = u * (q + strength[cur])
                if t < q:
                    successes += 1
                    break
                j = np.searchsorted(cumw[cur], t - q, side="right")
                if j > last[cur]:
                    j = last[cur]
                cur = j
                if posv[cur] >= 0:
                    break
        for i in range(plen):
            posv[path[i]] = -1
    return successes
