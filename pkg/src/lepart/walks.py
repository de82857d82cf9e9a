"""Killed random walks, loop erasure, and the forest sampler.

This is the reference implementation. Each walk step consumes exactly one
uniform draw: with u the draw and t = u * (q + strength(x)), the walker
dies when t < q and otherwise moves to the neighbor picked by binary
search in the cumulative weight row at t - q. The compiled batch kernels
repeat these operations verbatim so both paths emit identical samples
from identical seeds.

The forest sampler runs loop-erased walks from each unvisited vertex in
scan order, freezing every finished path. Killed walks root their tree
at the final vertex; walks that reach frozen territory attach to it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forests import ROOT, Partition, RootedForest, forest_to_partition
from .graphs import CompleteModel, TwoCommunityModel, WeightedGraph
from .rng import SplitMix64


@dataclass(frozen=True)
class LePath:
    """A finished loop-erased trajectory.

    `vertices` is the self-avoiding path that survives erasure. `hit` is
    the frozen vertex the walk stepped into, or None when the walker was
    killed on its last step.
    """

    vertices: tuple
    hit: int | None

    @property
    def killed(self) -> bool:
        return self.hit is None

    def __len__(self) -> int:
        return len(self.vertices)


def killed_step(graph: WeightedGraph, q: float, x: int, rng: SplitMix64):
    """One step of the killed walk from x; None means the walker died."""
    u = rng.uniform()
    t = u * (q + graph.strength[x])
    if t < q:
        return None
    j = int(np.searchsorted(graph.cumweights[x], t - q, side="right"))
    last = int(graph.last_neighbor[x])
    if j > last:
        j = last
    return j


def _graph_stepper(graph: WeightedGraph, q: float):
    cumw = graph.cumweights
    strength = graph.strength
    last = graph.last_neighbor

    def step(x, rng):
        t = rng.uniform() * (q + strength[x])
        if t < q:
            return -1
        j = int(np.searchsorted(cumw[x], t - q, side="right"))
        if j > last[x]:
            j = int(last[x])
        return j

    return step


def _complete_stepper(model: CompleteModel, q: float):
    n, w = model.N, model.w
    s = (n - 1) * w

    def step(x, rng):
        t = rng.uniform() * (q + s)
        if t < q:
            return -1
        j = int((t - q) / w)
        if j > n - 2:
            j = n - 2
        return j if j < x else j + 1

    return step


def _two_community_stepper(model: TwoCommunityModel, q: float):
    n, w1, w2 = model.N, model.w1, model.w2
    inside = (n - 1) * w1
    s = inside + n * w2

    def step(x, rng):
        t = rng.uniform() * (q + s)
        if t < q:
            return -1
        v = t - q
        if v < inside:
            j = int(v / w1)
            if j > n - 2:
                j = n - 2
            xl = x if x < n else x - n
            y = j if j < xl else j + 1
            return y if x < n else y + n
        j = int((v - inside) / w2)
        if j > n - 1:
            j = n - 1
        return n + j if x < n else j

    return step


def make_stepper(target, q: float):
    """Single-step transition function for a graph or a closed-form model.

    Returns step(x, rng) -> next vertex, or -1 when the walker is killed.
    Model steppers sample by direct inversion instead of a binary search
    but are distribution-identical to stepping on the expanded graph.
    """
    if q <= 0.0:
        raise ValueError("q must be positive")
    if isinstance(target, WeightedGraph):
        return _graph_stepper(target, q)
    if isinstance(target, CompleteModel):
        return _complete_stepper(target, q)
    if isinstance(target, TwoCommunityModel):
        return _two_community_stepper(target, q)
    raise TypeError(f"cannot sample walks on {type(target).__name__}")


def _n_vertices(target) -> int:
    return target.n_vertices


def loop_erased_walk(
    target, q: float, start: int, frozen, rng: SplitMix64, step=None
) -> LePath:
    """Run a killed walk from `start` and erase loops as they close.

    `frozen` is a boolean mask; stepping into a frozen vertex ends the
    walk. The walk also ends when the walker dies, which on a killed walk
    happens almost surely if it never reaches frozen territory.
    """
    n = _n_vertices(target)
    if not (0 <= start < n):
        raise ValueError(f"start vertex {start} out of range")
    if frozen is None:
        frozen = np.zeros(n, dtype=bool)
    if frozen[start]:
        raise ValueError("walk cannot start on a frozen vertex")
    if step is None:
        step = make_stepper(target, q)

    path = [start]
    pos = {start: 0}
    while True:
        y = step(path[-1], rng)
        if y < 0:
            return LePath(vertices=tuple(path), hit=None)
        if frozen[y]:
            return LePath(vertices=tuple(path), hit=y)
        at = pos.get(y)
        if at is None:
            pos[y] = len(path)
            path.append(y)
        else:
            for v in path[at + 1 :]:
                del pos[v]
            del path[at + 1 :]
            assert path[-1] == y and len(pos) == len(path)


def wilson_forest(target, q: float, seed: int, scan_order=None) -> RootedForest:
    """Sample a rooted spanning forest by successive loop-erased walks.

    Vertices are scanned in `scan_order` (ascending by default). Each
    unvisited vertex starts a loop-erased walk against the frozen set;
    the surviving path is added to the forest, rooted where the walker
    died or attached where it hit the forest.
    """
    n = _n_vertices(target)
    step = make_stepper(target, q)
    rng = SplitMix64(seed)
    if scan_order is None:
        scan_order = range(n)
    in_forest = np.zeros(n, dtype=bool)
    parent = [ROOT] * n
    done = 0
    for v in scan_order:
        if in_forest[v]:
            continue
        walk = loop_erased_walk(target, q, v, in_forest, rng, step=step)
        verts = walk.vertices
        for i in range(len(verts) - 1):
            parent[verts[i]] = verts[i + 1]
        parent[verts[-1]] = ROOT if walk.hit is None else walk.hit
        for u in verts:
            in_forest[u] = True
        done += len(verts)
    if done != n:
        raise RuntimeError("scan order did not cover every vertex")
    return RootedForest(parent=tuple(parent))


def sample_partition(target, q: float, seed: int) -> Partition:
    """Partition induced by one sampled forest."""
    return forest_to_partition(wilson_forest(target, q, seed))
