"""Batched Monte Carlo estimators over sampled forests and walks.

Work is split into fixed-size batches; batch i runs on its own stream
seeded (base_seed + i) mod 2^64 and results are merged in batch order,
so an estimate depends only on the configuration, never on thread
scheduling. Batches use the compiled kernels when numba is available
and the reference sampler otherwise; for a given target type both emit
identical samples.

Models are sampled natively at any size. Only the split estimator
expands a model to its dense graph, so it is limited to moderate model
sizes; the forest estimator is not.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.stats

from . import _kernels
from .graphs import (
    CompleteModel,
    TwoCommunityModel,
    WeightedGraph,
    block_count_law,
    block_count_pmf,
    build_laplacian,
    mean_field_spectrum,
)
from .rng import SplitMix64, batch_seed
from .walks import loop_erased_walk, make_stepper

MAX_EXPAND = 4096

# Largest plain graph whose Laplacian is worth diagonalizing for the
# exact tree-count law; model spectra are closed-form at any size.
MAX_DENSE_EIG = 2048


@dataclass(frozen=True)
class McConfig:
    """Sample count, base seed, batch layout, and thread budget."""

    n_samples: int
    base_seed: int = 0
    batch_size: int = 65536
    max_concurrency: int = 1

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if not 1 <= self.batch_size <= self.n_samples:
            raise ValueError("batch_size must be in 1..n_samples")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be positive")

    @classmethod
    def for_run(cls, n_samples, base_seed=0, max_concurrency=1, batch_size=65536):
        """Config with the batch size clamped to the sample count."""
        return cls(
            n_samples=n_samples,
            base_seed=base_seed,
            batch_size=min(batch_size, n_samples),
            max_concurrency=max_concurrency,
        )

    def batches(self):
        """(index, seed, size) for every batch, in order."""
        out = []
        remaining = self.n_samples
        index = 0
        while remaining > 0:
            size = min(self.batch_size, remaining)
            out.append((index, batch_seed(self.base_seed, index), size))
            remaining -= size
            index += 1
        return out


@dataclass(frozen=True)
class McEstimate:
    """Mean, binomial standard error, and sample count of one estimate."""

    mean: float
    stderr: float
    n: int


def _map_batches(cfg: McConfig, job):
    batches = cfg.batches()
    if cfg.max_concurrency == 1 or len(batches) == 1:
        return [job(b) for b in batches]
    with ThreadPoolExecutor(max_workers=cfg.max_concurrency) as pool:
        return list(pool.map(job, batches))


def _as_graph(target) -> WeightedGraph:
    if isinstance(target, WeightedGraph):
        return target
    if target.n_vertices > MAX_EXPAND:
        raise ValueError(f"separation estimators expand models up to {MAX_EXPAND} vertices")
    return target.expand()


def _pure_wilson_batch(target, q, seed, parents, roots):
    rng = SplitMix64(seed)
    step = make_stepper(target, q)
    n = target.n_vertices
    for s in range(parents.shape[0]):
        in_forest = np.zeros(n, dtype=bool)
        for v0 in range(n):
            if in_forest[v0]:
                continue
            walk = loop_erased_walk(target, q, v0, in_forest, rng, step=step)
            verts = walk.vertices
            for i in range(len(verts) - 1):
                parents[s, verts[i]] = verts[i + 1]
            if walk.hit is None:
                parents[s, verts[-1]] = -1
                r = verts[-1]
            else:
                parents[s, verts[-1]] = walk.hit
                r = roots[s, walk.hit]
            for u in verts:
                in_forest[u] = True
                roots[s, u] = r


def sample_forest_batch(target, q, seed, n_samples):
    """Forests for one batch: (parents, roots) arrays of shape (n_samples, n).

    Dispatches to the compiled kernel matching the target type, or to
    the reference sampler when kernels are unavailable.
    """
    n = target.n_vertices
    parents = np.empty((n_samples, n), dtype=np.int64)
    roots = np.empty((n_samples, n), dtype=np.int64)
    if not _kernels.AVAILABLE:
        _pure_wilson_batch(target, q, seed, parents, roots)
    elif isinstance(target, CompleteModel):
        _kernels.wilson_batch_complete(target.N, target.w, q, seed, parents, roots)
    elif isinstance(target, TwoCommunityModel):
        _kernels.wilson_batch_two_community(
            target.N, target.w1, target.w2, q, seed, parents, roots
        )
    elif isinstance(target, WeightedGraph):
        _kernels.wilson_batch_graph(
            target.cumweights, target.strength, target.last_neighbor,
            q, seed, parents, roots,
        )
    else:
        raise TypeError(f"cannot sample forests on {type(target).__name__}")
    return parents, roots


def _pure_le_walk_batch(graph, q, seed, start, lengths, codes, encode):
    rng = SplitMix64(seed)
    step = make_stepper(graph, q)
    n = graph.n_vertices
    frozen = np.zeros(n, dtype=bool)
    for s in range(lengths.shape[0]):
        walk = loop_erased_walk(graph, q, start, frozen, rng, step=step)
        lengths[s] = len(walk.vertices)
        code = 0
        if encode:
            for v in walk.vertices:
                code = code * (n + 1) + v + 1
        codes[s] = code


def le_walk_batch(graph: WeightedGraph, q, seed, n_samples, start, encode=False):
    """Loop-erased walks until killed: per-sample (lengths, path codes).

    Codes pack the surviving path digits in base n+1 and need
    (n+1)^n < 2^63, so they are only available on small graphs.
    """
    n = graph.n_vertices
    if encode and (n + 1) ** n >= 1 << 63:
        raise ValueError("path codes overflow on graphs this large")
    lengths = np.empty(n_samples, dtype=np.int64)
    codes = np.empty(n_samples, dtype=np.int64)
    if _kernels.AVAILABLE:
        _kernels.le_walk_batch_graph(
            graph.cumweights, graph.strength, graph.last_neighbor,
            q, seed, start, lengths, codes, encode,
        )
    else:
        _pure_le_walk_batch(graph, q, seed, start, lengths, codes, encode)
    return lengths, codes


def _pure_split_batch(graph, q, seed, n_samples, x, y):
    rng = SplitMix64(seed)
    step = make_stepper(graph, q)
    n = graph.n_vertices
    frozen = np.zeros(n, dtype=bool)
    successes = 0
    for _ in range(n_samples):
        walk = loop_erased_walk(graph, q, x, frozen, rng, step=step)
        trace = set(walk.vertices)
        if y in trace:
            continue
        cur = y
        while True:
            nxt = step(cur, rng)
            if nxt < 0:
                successes += 1
                break
            cur = nxt
            if cur in trace:
                break
    return successes


def estimate_potential(target, q, x, y, cfg: McConfig, method="forest") -> McEstimate:
    """Monte Carlo separation potential between vertices x and y.

    method="forest" samples whole forests and counts samples where x
    and y land in different trees; it runs natively on models. The
    method="split" variant runs the trace walk from x and the probe walk
    from y directly, succeeding when the probe dies before reaching the
    trace; it expands models to dense graphs first. Both are unbiased
    for the same quantity.
    """
    n = target.n_vertices
    if x == y or not (0 <= x < n) or not (0 <= y < n):
        raise ValueError("need two distinct vertices in range")
    if q <= 0.0:
        raise ValueError("q must be positive")

    if method == "forest":

        def job(batch):
            _, seed, size = batch
            _, roots = sample_forest_batch(target, q, seed, size)
            return int(np.count_nonzero(roots[:, x] != roots[:, y]))

    elif method == "split":
        graph = _as_graph(target)

        def job(batch):
            _, seed, size = batch
            if _kernels.AVAILABLE:
                return int(
                    _kernels.split_batch_graph(
                        graph.cumweights, graph.strength, graph.last_neighbor,
                        q, seed, size, x, y,
                    )
                )
            return _pure_split_batch(graph, q, seed, size, x, y)

    else:
        raise ValueError("method must be 'forest' or 'split'")

    successes = sum(_map_batches(cfg, job))
    p_hat = successes / cfg.n_samples
    stderr = float(np.sqrt(p_hat * (1.0 - p_hat) / cfg.n_samples))
    return McEstimate(mean=p_hat, stderr=stderr, n=cfg.n_samples)


@dataclass(frozen=True)
class BlockLawResult:
    """Sampled tree-count distribution, with the exact law alongside.

    The number of trees is a sum of independent Bernoulli variables
    with success probabilities q / (q + lambda) over the Laplacian
    eigenvalues. When that law is computable for the target, the exact
    moments, the standardized mean difference, and a pooled Pearson
    chi-square fit of the histogram are filled in; otherwise those
    fields stay None.
    """

    histogram: np.ndarray
    n: int
    mean: float
    variance: float
    stderr: float
    exact_mean: float | None = None
    exact_variance: float | None = None
    z_mean: float | None = None
    chi2_stat: float | None = None
    chi2_dof: int | None = None
    chi2_pvalue: float | None = None


def _exact_block_probs(target, q):
    if isinstance(target, (CompleteModel, TwoCommunityModel)):
        spectrum = mean_field_spectrum(target)
    elif isinstance(target, WeightedGraph) and target.n_vertices <= MAX_DENSE_EIG:
        spectrum = np.linalg.eigvalsh(build_laplacian(target))
        spectrum = np.clip(spectrum, 0.0, None)
    else:
        return None
    return block_count_law(q, spectrum)


def _pooled_chi_square(hist, pmf):
    """Pearson fit statistic with adjacent cells pooled to expectation 5."""
    total = float(hist.sum())
    expected = np.asarray(pmf, dtype=np.float64) * total
    obs_cells, exp_cells = [], []
    obs_acc = exp_acc = 0.0
    for obs, exp in zip(hist, expected):
        obs_acc += obs
        exp_acc += exp
        if exp_acc >= 5.0:
            obs_cells.append(obs_acc)
            exp_cells.append(exp_acc)
            obs_acc = exp_acc = 0.0
    if exp_cells:
        obs_cells[-1] += obs_acc
        exp_cells[-1] += exp_acc
    else:
        obs_cells.append(obs_acc)
        exp_cells.append(max(exp_acc, 1e-300))
    obs = np.asarray(obs_cells)
    exp = np.asarray(exp_cells)
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = max(len(exp) - 1, 1)
    pvalue = float(scipy.stats.chi2.sf(stat, dof))
    return stat, dof, pvalue


def estimate_block_law(target, q, cfg: McConfig) -> BlockLawResult:
    """Distribution of the number of trees in sampled forests.

    For model targets, and for plain graphs small enough to
    diagonalize, the result also carries the comparison against the
    exact Bernoulli-sum law.
    """
    if q <= 0.0:
        raise ValueError("q must be positive")
    n = target.n_vertices

    def job(batch):
        _, seed, size = batch
        parents, _ = sample_forest_batch(target, q, seed, size)
        counts = np.count_nonzero(parents == -1, axis=1)
        return np.bincount(counts, minlength=n + 1)

    hist = np.zeros(n + 1, dtype=np.int64)
    for part in _map_batches(cfg, job):
        hist += part
    total = int(hist.sum())
    values = np.arange(n + 1, dtype=np.float64)
    mean = float(np.dot(hist, values) / total)
    variance = float(np.dot(hist, (values - mean) ** 2) / total)
    stderr = float(np.sqrt(variance / total))
    probs = _exact_block_probs(target, q)
    if probs is None:
        return BlockLawResult(
            histogram=hist, n=total, mean=mean, variance=variance, stderr=stderr
        )
    exact_mean = float(probs.sum())
    exact_variance = float(np.sum(probs * (1.0 - probs)))
    if exact_variance > 0.0:
        z_mean = float((mean - exact_mean) / np.sqrt(exact_variance / total))
    else:
        z_mean = 0.0
    stat, dof, pvalue = _pooled_chi_square(hist, block_count_pmf(probs))
    return BlockLawResult(
        histogram=hist,
        n=total,
        mean=mean,
        variance=variance,
        stderr=stderr,
        exact_mean=exact_mean,
        exact_variance=exact_variance,
        z_mean=z_mean,
        chi2_stat=stat,
        chi2_dof=dof,
        chi2_pvalue=pvalue,
    )


@dataclass(frozen=True)
class StructureSample:
    """Per-sample block structure of a two-community target.

    Sizes are vertex counts; purity is the majority-community fraction
    of a block (1.0 for a pure block, about 0.5 for a mixed one).
    Sizes and purities of missing blocks are 0, so a one-block sample
    has second = third = 0.
    """

    n_blocks: np.ndarray
    largest: np.ndarray
    second: np.ndarray
    third: np.ndarray
    purity_largest: np.ndarray
    purity_second: np.ndarray


def sample_structure(model: TwoCommunityModel, q, cfg: McConfig) -> StructureSample:
    """Block counts, top three block sizes, and top-two community purity."""
    if q <= 0.0:
        raise ValueError("q must be positive")
    if model.N < 2:
        raise ValueError("structure sampling needs communities of at least 2")
    ncomm = model.N
    n = model.n_vertices

    def job(batch):
        _, seed, size = batch
        _, roots = sample_forest_batch(model, q, seed, size)
        out = np.empty((size, 6))
        for i in range(size):
            sizes = np.bincount(roots[i], minlength=n)
            home = np.bincount(roots[i, :ncomm], minlength=n)
            order = np.argsort(sizes)
            big, second, third = order[-1], order[-2], order[-3]
            pur_big = max(home[big], sizes[big] - home[big]) / sizes[big]
            if sizes[second] > 0:
                pur_sec = max(home[second], sizes[second] - home[second]) / sizes[second]
            else:
                pur_sec = 0.0
            out[i] = (
                np.count_nonzero(sizes),
                sizes[big],
                sizes[second],
                sizes[third],
                pur_big,
                pur_sec,
            )
        return out

    rows = np.concatenate(_map_batches(cfg, job), axis=0)
    return StructureSample(
        n_blocks=rows[:, 0].astype(np.int64),
        largest=rows[:, 1].astype(np.int64),
        second=rows[:, 2].astype(np.int64),
        third=rows[:, 3].astype(np.int64),
        purity_largest=rows[:, 4],
        purity_second=rows[:, 5],
    )


@dataclass(frozen=True)
class StructureReport:
    """Aggregated partition shape over sampled forests.

    Frequencies are fractions of samples. A block is macroscopic when
    it holds at least eps of all vertices and giant when it holds at
    least 1 - eps of them; a pure pair means the two largest blocks
    each reach purity_threshold.
    """

    n: int
    mean_blocks: float
    freq_giant: float
    freq_two_macroscopic: float
    freq_no_macroscopic: float
    freq_pure_pair: float
    eps: float
    purity_threshold: float


def community_structure_report(
    model: TwoCommunityModel,
    q,
    cfg: McConfig,
    eps: float = 0.1,
    purity_threshold: float = 0.9,
) -> StructureReport:
    """Frequency summary of the sampled partition shapes.

    freq_two_macroscopic requires exactly two macroscopic blocks, so
    the second-largest clears eps of the vertices while the third
    stays below it.
    """
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must be in (0, 0.5)")
    sample = sample_structure(model, q, cfg)
    n_vertices = model.n_vertices
    macro = eps * n_vertices
    giant = (1.0 - eps) * n_vertices
    two_macro = (sample.second >= macro) & (sample.third < macro)
    pure_pair = (sample.purity_largest >= purity_threshold) & (
        sample.purity_second >= purity_threshold
    )
    return StructureReport(
        n=len(sample.n_blocks),
        mean_blocks=float(sample.n_blocks.mean()),
        freq_giant=float(np.mean(sample.largest >= giant)),
        freq_two_macroscopic=float(np.mean(two_macro)),
        freq_no_macroscopic=float(np.mean(sample.largest < macro)),
        freq_pure_pair=float(np.mean(pure_pair)),
        eps=eps,
        purity_threshold=purity_threshold,
    )
