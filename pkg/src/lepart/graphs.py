"""Weighted graphs, Laplacian determinants, and mean-field models.

Graphs are finite, undirected, with positive edge weights, stored as a
dense symmetric matrix. Vertex strength is the row sum of weights and is
derived from the cumulative-weight rows so that samplers and exact code
agree bit for bit on the same numbers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .forests import ROOT, RootedForest

MAX_DET_SIZE = 2048
MAX_ENUM_SIZE = 12


class WeightedGraph:
    """Dense symmetric weight matrix with sampling support arrays.

    `cumweights[x]` is the inclusive prefix sum of row x, `strength[x]`
    its final entry, and `last_neighbor[x]` the largest index with a
    positive weight (-1 for isolated vertices). Arrays are frozen after
    construction so instances can be shared across threads.
    """

    def __init__(self, weights):
        w = np.array(weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weight matrix must be square")
        n = w.shape[0]
        if n < 1:
            raise ValueError("graph needs at least one vertex")
        if not np.array_equal(w, w.T):
            raise ValueError("weight matrix must be symmetric")
        if np.any(np.diag(w) != 0.0):
            raise ValueError("self-loops are not allowed")
        if np.any(w < 0.0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        self.n_vertices = n
        self.weights = w
        self.cumweights = np.cumsum(w, axis=1)
        self.strength = self.cumweights[:, -1].copy()
        last = np.full(n, -1, dtype=np.int64)
        for x in range(n):
            nz = np.nonzero(w[x])[0]
            if nz.size:
                last[x] = nz[-1]
        self.last_neighbor = last
        for arr in (self.weights, self.cumweights, self.strength, self.last_neighbor):
            arr.setflags(write=False)

    @classmethod
    def from_edges(cls, n: int, edges) -> "WeightedGraph":
        """Build from (u, v, w) triples; repeated pairs are an error."""
        w = np.zeros((n, n))
        seen = set()
        for u, v, wt in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for {n} vertices")
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if wt <= 0.0:
                raise ValueError(f"edge ({u},{v}) must have positive weight")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge ({u},{v})")
            seen.add(key)
            w[u, v] = wt
            w[v, u] = wt
        return cls(w)

    def edges(self):
        """Positive-weight edges as (u, v, w) with u < v."""
        out = []
        for u in range(self.n_vertices):
            for v in range(u + 1, self.n_vertices):
                if self.weights[u, v] > 0.0:
                    out.append((u, v, float(self.weights[u, v])))
        return out


def complete_graph(n: int, w: float = 1.0) -> WeightedGraph:
    m = np.full((n, n), float(w))
    np.fill_diagonal(m, 0.0)
    return WeightedGraph(m)


def path_graph(n: int, w: float = 1.0) -> WeightedGraph:
    m = np.zeros((n, n))
    for v in range(n - 1):
        m[v, v + 1] = m[v + 1, v] = w
    return WeightedGraph(m)


def star_graph(n: int, w: float = 1.0) -> WeightedGraph:
    m = np.zeros((n, n))
    m[0, 1:] = w
    m[1:, 0] = w
    return WeightedGraph(m)


def read_graph_file(path) -> WeightedGraph:
    """Parse the text format: header "N M", then M lines "u v w"."""
    with open(path, "r", encoding="utf-8") as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise ValueError("graph file needs an 'N M' header")
    n, m = int(tokens[0]), int(tokens[1])
    body = tokens[2:]
    if len(body) != 3 * m:
        raise ValueError(f"expected {3 * m} edge tokens, found {len(body)}")
    edges = [
        (int(body[3 * i]), int(body[3 * i + 1]), float(body[3 * i + 2]))
        for i in range(m)
    ]
    return WeightedGraph.from_edges(n, edges)


def write_graph_file(graph: WeightedGraph, path) -> None:
    edges = graph.edges()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{graph.n_vertices} {len(edges)}\n")
        for u, v, w in edges:
            fh.write(f"{u} {v} {w!r}\n")


def build_laplacian(graph: WeightedGraph) -> np.ndarray:
    """Combinatorial Laplacian: strength on the diagonal, minus weights off it."""
    lap = -graph.weights.copy()
    np.fill_diagonal(lap, graph.strength)
    return lap


def _logdet_shifted(laplacian: np.ndarray, q: float, keep=None) -> float:
    """log det of (q I + L) restricted to the rows/columns in `keep`.

    Uses a dense LU factorization with partial pivoting. The matrix is
    positive definite for q > 0, so the determinant is positive and the
    log form avoids overflow for large graphs.
    """
    if keep is not None:
        keep = np.asarray(keep, dtype=np.int64)
        if keep.size == 0:
            return 0.0
        sub = laplacian[np.ix_(keep, keep)].copy()
    else:
        sub = laplacian.copy()
    sub[np.diag_indices_from(sub)] += q
    lu, piv = scipy.linalg.lu_factor(sub, check_finite=False)
    diag = np.diag(lu)
    sign = 1.0 if np.count_nonzero(piv != np.arange(len(piv))) % 2 == 0 else -1.0
    if np.count_nonzero(diag < 0.0) % 2:
        sign = -sign
    if np.any(diag == 0.0) or sign <= 0.0:
        raise ArithmeticError("shifted Laplacian determinant is not positive")
    return float(np.sum(np.log(np.abs(diag))))


def forest_polynomial(graph: WeightedGraph, q: float) -> float:
    """det(q I + L), the weighted count of rooted forests with a q per root."""
    if q <= 0.0:
        raise ValueError("q must be positive")
    if graph.n_vertices > MAX_DET_SIZE:
        raise ValueError(f"determinant limited to {MAX_DET_SIZE} vertices")
    return float(np.exp(_logdet_shifted(build_laplacian(graph), q)))


def enumerate_rooted_forests(graph: WeightedGraph):
    """All rooted spanning forests as (forest, weight, n_trees) triples.

    Walks the edge subsets recursively, discarding any subset that closes
    a cycle, then emits one forest per choice of root in each tree.
    Exponential in the edge count; guarded to small graphs.
    """
    n = graph.n_vertices
    if n > MAX_ENUM_SIZE:
        raise ValueError(f"enumeration limited to {MAX_ENUM_SIZE} vertices")
    edge_list = graph.edges()
    out = []

    def find(comp, v):
        while comp[v] != v:
            v = comp[v]
        return v

    def recurse(i, comp, chosen):
        if i == len(edge_list):
            members: dict[int, list[int]] = {}
            for v in range(n):
                members.setdefault(find(comp, v), []).append(v)
            trees = list(members.values())
            weight = 1.0
            adj: list[list[int]] = [[] for _ in range(n)]
            for u, v, w in chosen:
                weight *= w
                adj[u].append(v)
                adj[v].append(u)
            for roots in itertools.product(*trees):
                parent = [ROOT] * n
                for r in roots:
                    stack = [r]
                    seen = {r}
                    while stack:
                        a = stack.pop()
                        for b in adj[a]:
                            if b not in seen:
                                seen.add(b)
                                parent[b] = a
                                stack.append(b)
                out.append(
                    (RootedForest(parent=tuple(parent)), weight, len(trees))
                )
            return
        u, v, w = edge_list[i]
        ru, rv = find(comp, u), find(comp, v)
        if ru != rv:
            nxt = list(comp)
            nxt[ru] = rv
            recurse(i + 1, nxt, chosen + [(u, v, w)])
        recurse(i + 1, comp, chosen)

    recurse(0, list(range(n)), [])
    return out


def enumerated_forest_law(graph: WeightedGraph, q: float):
    """Exact sampling law over rooted forests: q^(#trees) w(F) / Z.

    Returns (law, partition_function) where law maps parent tuples to
    probabilities and the partition function is the enumerated sum, for
    cross-checking against forest_polynomial.
    """
    if q <= 0.0:
        raise ValueError("q must be positive")
    law = {}
    total = 0.0
    for forest, weight, m in enumerate_rooted_forests(graph):
        mass = (q ** m) * weight
        law[forest.parent] = law.get(forest.parent, 0.0) + mass
        total += mass
    for key in law:
        law[key] /= total
    return law, total


@dataclass(frozen=True)
class CompleteModel:
    """Complete graph on N vertices with uniform edge weight w."""

    N: int
    w: float = 1.0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if self.w <= 0.0:
            raise ValueError("w must be positive")

    @property
    def n_vertices(self) -> int:
        return self.N

    def expand(self) -> WeightedGraph:
        return complete_graph(self.N, self.w)


@dataclass(frozen=True)
class TwoCommunityModel:
    """Two communities of N vertices each, fully connected.

    Vertices 0..N-1 form community 0 and N..2N-1 community 1. Edges
    inside a community have weight w1, edges across have weight w2.
    """

    N: int
    w1: float
    w2: float

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if self.w1 <= 0.0 or self.w2 <= 0.0:
            raise ValueError("w1 and w2 must be positive")

    @property
    def n_vertices(self) -> int:
        return 2 * self.N

    def community(self, v: int) -> int:
        return 0 if v < self.N else 1

    def expand(self) -> WeightedGraph:
        n = self.N
        m = np.full((2 * n, 2 * n), self.w2)
        m[:n, :n] = self.w1
        m[n:, n:] = self.w1
        np.fill_diagonal(m, 0.0)
        return WeightedGraph(m)


def mean_field_spectrum(model) -> np.ndarray:
    """Laplacian eigenvalues of a model graph, ascending, with multiplicity."""
    if isinstance(model, CompleteModel):
        lam = np.full(model.N, model.N * model.w)
        lam[0] = 0.0
        return lam
    if isinstance(model, TwoCommunityModel):
        n, w1, w2 = model.N, model.w1, model.w2
        lam = np.full(2 * n, n * (w1 + w2))
        lam[0] = 0.0
        lam[1] = 2 * n * w2
        return np.sort(lam)
    raise TypeError(f"no closed-form spectrum for {type(model).__name__}")


def block_count_law(q: float, spectrum: np.ndarray) -> np.ndarray:
    """Success probabilities q/(q+lambda) of the tree-count Bernoulli sum.

    The zero eigenvalue contributes probability exactly one, so the
    number of trees is always at least one.
    """
    if q <= 0.0:
        raise ValueError("q must be positive")
    lam = np.asarray(spectrum, dtype=np.float64)
    if np.any(lam < 0.0):
        raise ValueError("Laplacian eigenvalues must be nonnegative")
    probs = q / (q + lam)
    probs[lam == 0.0] = 1.0
    return probs


def block_count_pmf(probs: np.ndarray) -> np.ndarray:
    """Distribution of a sum of independent Bernoulli variables.

    Entry k is the probability of exactly k successes, k = 0..len(probs).
    """
    pmf = np.zeros(len(probs) + 1)
    pmf[0] = 1.0
    for j, p in enumerate(np.asarray(probs, dtype=np.float64)):
        pmf[1 : j + 2] = pmf[1 : j + 2] * (1.0 - p) + pmf[: j + 1] * p
        pmf[0] *= 1.0 - p
    return pmf
