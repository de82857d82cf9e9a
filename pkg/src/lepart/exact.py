"""Closed-form laws of killed loop-erased walks and separation potentials.

The central quantity is the separation potential U_q(x, y): under the
forest measure q^(#trees) w(F) / det(qI + L), the probability that x
and y land in different trees. Running the sampler from x first and y
second shows it equals the sum over loop-erased traces gamma from x of
P(trace = gamma) times the probability that an independent killed walk
from y dies before reaching gamma; traces covering y contribute zero.

Closed forms are provided for the uniform complete graph, its scaling
limit, and the two-community graph; small graphs get an exhaustive
dual-route evaluation used as the test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special

from .graphs import (
    WeightedGraph,
    _logdet_shifted,
    build_laplacian,
    enumerate_rooted_forests,
)

MAX_TERMS = 1 << 22


@dataclass(frozen=True)
class PotentialResult:
    """A separation potential value with the method that produced it."""

    value: float
    method: str
    stderr: float | None = None
    meta: dict | None = None

    def __post_init__(self):
        if self.method not in ("exact", "enumeration", "monte-carlo"):
            raise ValueError(f"unknown method {self.method!r}")
        if (self.stderr is not None) != (self.method == "monte-carlo"):
            raise ValueError("stderr is required exactly for monte-carlo results")


def u_complete_exact(N: int, w: float, q: float) -> PotentialResult:
    """Separation potential between two vertices of the uniform complete graph.

    Accumulates the trace-length expansion term by term; with
    p = q/(q + Nw) the h-th term is p (1-p)^(h-1) prod_{k=2..h} (1 - k/N).
    """
    if N < 2:
        raise ValueError("need at least two vertices")
    if w <= 0.0 or q <= 0.0:
        raise ValueError("w and q must be positive")
    p = q / (q + N * w)
    term = p
    total = p
    for h in range(2, N):
        term *= (1.0 - p) * (1.0 - h / N)
        total += term
    return PotentialResult(value=total, method="exact")


def u_complete_limit(z: float) -> float:
    """Large-N limit of the complete-graph potential at q = z sqrt(N) w.

    Equals sqrt(2 pi) z e^(z^2/2) P(Z > z) for a standard Gaussian Z,
    evaluated in the overflow-free scaled-complement form. Increases from
    0 to 1 as z runs over (0, inf).
    """
    if z <= 0.0:
        raise ValueError("z must be positive")
    return float(z * math.sqrt(math.pi / 2.0) * scipy.special.erfcx(z / math.sqrt(2.0)))


def lerw_length_ccdf(N: int, w: float, q: float, h: int) -> float:
    """P(the loop-erased trace on the complete graph has at least h vertices).

    Uses the self-loop uniformized chain: with p = q/(q + Nw) the tail is
    (1-p)^(h-1) prod_{i=1..h-1} (1 - i/N); identically zero for h > N.
    """
    if N < 1 or h < 1:
        raise ValueError("N and h must be at least 1")
    if w <= 0.0 or q <= 0.0:
        raise ValueError("w and q must be positive")
    p = q / (q + N * w)
    out = 1.0
    for i in range(1, h):
        out *= (1.0 - p) * (1.0 - i / N)
    return out


@dataclass(frozen=True)
class LocalTimeTable:
    """Home-community visit counts of the two-state jump chain.

    rows[n-1][k-1] is the probability that a chain started in its home
    community has spent k of its first n steps at home, when each step
    stays in the current community with probability p_stay.
    """

    p_stay: float
    rows: tuple

    def row(self, n: int) -> np.ndarray:
        return self.rows[n - 1]


def local_time_table(p_stay: float, n_max: int) -> LocalTimeTable:
    """Tabulate home-visit distributions for chain lengths 1..n_max."""
    if not 0.0 <= p_stay <= 1.0:
        raise ValueError("p_stay must be a probability")
    if not 1 <= n_max <= 4096:
        raise ValueError("n_max must be between 1 and 4096")
    rows = []
    home = np.zeros(n_max + 1)
    away = np.zeros(n_max + 1)
    home[1] = 1.0
    for n in range(1, n_max + 1):
        rows.append((home + away)[1 : n + 1].copy())
        if n == n_max:
            break
        new_home = np.zeros(n_max + 1)
        new_home[1:] = p_stay * home[:-1] + (1.0 - p_stay) * away[:-1]
        away = (1.0 - p_stay) * home + p_stay * away
        home = new_home
    return LocalTimeTable(p_stay=p_stay, rows=tuple(rows))


def _validate_two_community(N, w1, w2, q):
    if N < 1:
        raise ValueError("community size must be at least 1")
    if w1 <= 0.0 or w2 <= 0.0 or q <= 0.0:
        raise ValueError("w1, w2, and q must be positive")


def lumped_eigenvalues(n, k, N, w1, w2):
    """Eigenvalue pair of the two-state rate matrix for a trace with
    k home and n-k away vertices.

    Both are nonpositive; the small one is recovered from the
    determinant to avoid cancellation. Listed small-magnitude first.
    """
    _validate_two_community(N, w1, w2, 1.0)
    if not 0 <= k <= n:
        raise ValueError("k must lie between 0 and n")
    if k > N or n - k > N:
        raise ValueError("trace does not fit in the communities")
    trace = n * w1 + 2.0 * N * w2
    disc = (w1 * (2 * k - n)) ** 2 + 4.0 * (N - k) * (N - (n - k)) * w2 * w2
    det = (w1 + w2) * (k * (n - k) * (w1 - w2) + n * N * w2)
    big = 0.5 * (trace + math.sqrt(disc))
    small = det / big if big > 0.0 else 0.0
    return -small, -big


def theta(n, k, N, w1, w2, q):
    """Determinant correction of one trace class relative to the bulk rate.

    Ratio of det(qI + B) for the lumped two-state matrix B to the
    two smallest shifted eigenvalues q (q + 2 N w2).
    """
    if q <= 0.0:
        raise ValueError("q must be positive")
    lam1, lam2 = lumped_eigenvalues(n, k, N, w1, w2)
    return ((q - lam1) * (q - lam2)) / (q * (q + 2.0 * N * w2))


def p_dagger(n, k, N, w1, w2, q, star):
    """Probability that the walk from the probe vertex dies before the trace.

    The probe sits in the same community as the trace start for
    star="in" and in the other community for star="out"; it sees
    k_star = n-k resp. k vertices of the trace at weight w1.
    """
    if q <= 0.0:
        raise ValueError("q must be positive")
    k_star = _k_star(n, k, star)
    lam1, lam2 = lumped_eigenvalues(n, k, N, w1, w2)
    c = (q - lam1) * (q - lam2)
    return q * (q + k_star * (w1 - w2) + 2.0 * N * w2) / c


def _k_star(n, k, star):
    if star == "out":
        return k
    if star == "in":
        return n - k
    raise ValueError("star must be 'in' or 'out'")


def _avoidance_tables(N: int, n_max: int):
    """Cumulative products of (1 - j/N) used by the trace-count weights.

    g[m] runs j over 1..m, h2[m] over 2..m, g0[m] over 0..m-1. All
    values lie in [0, 1] and hit exactly zero once a community is
    exhausted, which truncates the sums at their combinatorial range.
    """
    g = np.ones(n_max + 1)
    h2 = np.ones(n_max + 1)
    g0 = np.ones(n_max + 1)
    for m in range(1, n_max + 1):
        g[m] = g[m - 1] * (1.0 - m / N)
        h2[m] = h2[m - 1] * ((1.0 - m / N) if m >= 2 else 1.0)
        g0[m] = g0[m - 1] * (1.0 - (m - 1) / N)
    return g, h2, g0


def entropy_factor(N: int, n: int, k: int, star: str) -> float:
    """Probability weight of traces with k home and n-k away vertices
    that also avoid the probe vertex.

    star="out": both halves avoid nothing extra at home, so the weight
    is g(k-1) g(n-k). star="in": the home half must dodge the probe,
    giving h2(k) g0(n-k).
    """
    if not 1 <= k <= n:
        return 0.0
    g, h2, g0 = _avoidance_tables(N, n)
    if star == "out":
        return float(g[k - 1] * g[n - k])
    if star == "in":
        return float(h2[k] * g0[n - k])
    raise ValueError("star must be 'in' or 'out'")


def entropy_factor_variant(N: int, n: int, k: int, star: str) -> float:
    """A superficially similar closed form for the same weights.

    Retained for comparison only: it does not reproduce the enumeration
    oracle for all (n, k), while entropy_factor does. The evaluator
    never uses it.
    """
    if not 1 <= k <= n:
        return 0.0

    def falling(a, m):
        out = 1.0
        for j in range(m):
            out *= a - j
        return out

    base = float(N) ** (1 - n) * falling(N - 2, k - 1) * falling(N - 1, n - k)
    if star == "out":
        return base * (N - 1) * (N - n + k - 1)
    if star == "in":
        return base * N * (N - k - 1)
    raise ValueError("star must be 'in' or 'out'")


def u_two_community_exact(
    N: int, w1: float, w2: float, q: float, star: str, tail_tol: float = 1e-12
) -> PotentialResult:
    """Separation potential on two fully connected communities of size N.

    star="in" pairs two vertices of the same community, star="out" one
    vertex of each. Sums over the trace length n, the home-visit count
    k, and the closed-form trace weights; the killing time is geometric
    with ratio q/(q + N(w1+w2)), so the sum is truncated once the
    remaining tail is provably below tail_tol.
    """
    _validate_two_community(N, w1, w2, q)
    if star not in ("in", "out"):
        raise ValueError("star must be 'in' or 'out'")
    if N == 1 and star == "in":
        raise ValueError("a size-1 community has no second vertex to pair")

    alpha = N * (w1 + w2)
    xi = q / (q + alpha)
    cross = q + 2.0 * N * w2
    # Bound every per-term factor beyond the geometric one by max(1, M).
    bound = max(1.0, (q + 2.0 * N * w1) / cross)
    n_cap = 2 * N - 1
    if xi < 1.0:
        need = math.log(tail_tol / bound) / math.log1p(-xi)
        n_max = min(n_cap, max(1, math.ceil(need)))
    else:
        n_max = 1
    if n_max > MAX_TERMS:
        raise ValueError("series too long; raise tail_tol")

    g, h2, g0 = _avoidance_tables(N, n_max)
    delta = w1 - w2
    p_stay = w1 / (w1 + w2)

    total = 0.0
    geom = xi
    home = np.zeros(n_max + 1)
    away = np.zeros(n_max + 1)
    home[1] = 1.0
    for n in range(1, n_max + 1):
        k = np.arange(1, n + 1)
        row = (home + away)[1 : n + 1]
        if star == "out":
            weights = g[k - 1] * g[n - k]
            k_star = k
        else:
            weights = h2[k] * g0[n - k]
            k_star = n - k
        kill_factor = (cross + k_star * delta) / cross
        total += geom * float(np.dot(row, weights * kill_factor))
        if n == n_max:
            break
        new_home = np.zeros(n_max + 1)
        new_home[1:] = p_stay * home[:-1] + (1.0 - p_stay) * away[:-1]
        away = (1.0 - p_stay) * home + p_stay * away
        home = new_home
        geom *= 1.0 - xi
    tail = (1.0 - xi) ** n_max * bound if n_max < n_cap else 0.0
    return PotentialResult(
        value=total,
        method="exact",
        meta={"terms": n_max, "tail_bound": tail},
    )


def marchal_le_prob(graph: WeightedGraph, q: float, path) -> float:
    """Exact probability that the killed loop-erased walk from path[0]
    dies with precisely this trace.

    Product of the edge weights along the trace, one kill factor q, and
    the determinant ratio det restricted to the unvisited vertices over
    the full det(qI + L); evaluated in log space.
    """
    if q <= 0.0:
        raise ValueError("q must be positive")
    verts = list(path)
    n = graph.n_vertices
    if not verts:
        raise ValueError("trace must contain its starting vertex")
    if len(set(verts)) != len(verts):
        raise ValueError("trace must be self-avoiding")
    if not all(0 <= v < n for v in verts):
        raise ValueError("trace vertex out of range")
    log_num = math.log(q)
    for a, b in zip(verts, verts[1:]):
        wab = graph.weights[a, b]
        if wab <= 0.0:
            raise ValueError(f"trace uses missing edge ({a},{b})")
        log_num += math.log(wab)
    lap = build_laplacian(graph)
    keep = np.array(sorted(set(range(n)) - set(verts)), dtype=np.int64)
    log_num += _logdet_shifted(lap, q, keep=keep)
    return float(math.exp(log_num - _logdet_shifted(lap, q)))


def survival_prob(graph: WeightedGraph, q: float, trace, y: int) -> float:
    """Probability that a killed walk from y dies before reaching the trace.

    Solves (qI + L) u = q 1 restricted to the unvisited vertices; the
    empty trace gives exactly 1 since the walk is killed almost surely.
    """
    if q <= 0.0:
        raise ValueError("q must be positive")
    trace = set(trace)
    if y in trace:
        raise ValueError("probe vertex lies on the trace")
    if not (0 <= y < graph.n_vertices):
        raise ValueError("probe vertex out of range")
    if not trace:
        return 1.0
    keep = sorted(set(range(graph.n_vertices)) - trace)
    lap = build_laplacian(graph)
    sub = lap[np.ix_(keep, keep)].copy()
    sub[np.diag_indices_from(sub)] += q
    u = np.linalg.solve(sub, np.full(len(keep), q))
    return float(u[keep.index(y)])


def _simple_paths_from(graph: WeightedGraph, x: int):
    """Every self-avoiding positive-weight path starting at x, as lists."""
    n = graph.n_vertices
    path = [x]
    on_path = [False] * n
    on_path[x] = True

    def rec():
        yield list(path)
        tail = path[-1]
        for y in range(n):
            if not on_path[y] and graph.weights[tail, y] > 0.0:
                path.append(y)
                on_path[y] = True
                yield from rec()
                on_path[y] = False
                path.pop()

    yield from rec()


def u_enumeration(graph: WeightedGraph, q: float, x: int, y: int) -> PotentialResult:
    """Exhaustive separation potential on a small graph, cross-checked two ways.

    Route one sums the forest measure over forests where x and y sit in
    different trees. Route two sums, over every trace from x avoiding y,
    the trace law times the probability that the probe walk from y dies
    before reaching it. The routes must agree to 1e-9.
    """
    n = graph.n_vertices
    if q <= 0.0:
        raise ValueError("q must be positive")
    if x == y or not (0 <= x < n) or not (0 <= y < n):
        raise ValueError("need two distinct vertices in range")

    split_mass = 0.0
    z_enum = 0.0
    for forest, weight, m in enumerate_rooted_forests(graph):
        mass = (q ** m) * weight
        z_enum += mass
        root = forest.root_of()
        if root[x] != root[y]:
            split_mass += mass
    route_forest = split_mass / z_enum

    route_trace = 0.0
    for trace in _simple_paths_from(graph, x):
        if y in trace:
            continue
        route_trace += marchal_le_prob(graph, q, trace) * survival_prob(
            graph, q, trace, y
        )

    if abs(route_forest - route_trace) > 1e-9:
        raise ArithmeticError(
            f"enumeration routes disagree: {route_forest!r} vs {route_trace!r}"
        )
    return PotentialResult(
        value=route_forest,
        method="enumeration",
        meta={"route_forest": route_forest, "route_trace": route_trace},
    )
