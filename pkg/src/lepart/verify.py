"""Self-check battery behind the verify command and the acceptance tests.

Checks are grouped into three suites. The oracle suite replays sampled
forests, killed loop-erased paths, and tree counts against enumeration
on small graphs; the formulas suite pins the closed-form potentials to
enumeration, quadrature, and sampling; the phase suite evaluates the
pinned regime points and partition-shape frequencies on the large-N
ladder. Every check reports its measured value, its bound, and a pass
flag, so callers can render reports or assert on the outcome.

All sampling here runs on pinned seeds; reruns produce identical
numbers by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.integrate

from .exact import (
    marchal_le_prob,
    u_complete_exact,
    u_complete_limit,
    u_enumeration,
    u_two_community_exact,
)
from .graphs import (
    CompleteModel,
    TwoCommunityModel,
    WeightedGraph,
    block_count_law,
    block_count_pmf,
    complete_graph,
    enumerated_forest_law,
    forest_polynomial,
    mean_field_spectrum,
    path_graph,
    read_graph_file,
    star_graph,
)
from .montecarlo import (
    McConfig,
    community_structure_report,
    estimate_block_law,
    estimate_potential,
    le_walk_batch,
    sample_forest_batch,
)
from .phase import classify_regime, phase_point

SUITES = ("oracle", "formulas", "phase")

FOREST_LAW_SAMPLES = 10**6
FOREST_LAW_TV = 0.005
PATH_LAW_SAMPLES = 3 * 10**5
BLOCK_LAW_SAMPLES = 2 * 10**4
POTENTIAL_SAMPLES = 10**5
STRUCTURE_SAMPLES = 10**3

SEED_FOREST_LAW = 101
SEED_PATH_LAW = 202
SEED_BLOCK_LAW = 303
SEED_POTENTIAL = 404
SEED_STRUCTURE = 505

# One pinned (alpha, beta) point per regime exercised by the ladder
# checks, exponents exact so boundary regimes classify right.
POINT_B = (Fraction(3, 10), Fraction(9, 10))
POINT_D = (Fraction(1, 5), Fraction(1, 5))
POINT_F = (Fraction(4, 5), Fraction(1, 2))
POINT_E = (Fraction(1, 2), Fraction(1, 5))

LADDER = (100, 400, 1600)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one verification check."""

    name: str
    passed: bool
    measured: str
    expected: str

    def as_dict(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "measured": self.measured,
            "expected": self.expected,
        }


def _check(name, passed, measured, expected) -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), measured=measured, expected=expected)


def _forest_codes(parents: np.ndarray, n: int) -> np.ndarray:
    """Pack parent vectors into integers; entries -1..n-1 shift to 1..n+1."""
    powers = (n + 2) ** np.arange(n, dtype=np.int64)
    return (parents + 2) @ powers


def _sampled_forest_tv(graph: WeightedGraph, q: float, cfg: McConfig) -> float:
    """Total variation between sampled forest frequencies and the law."""
    n = graph.n_vertices
    law, _ = enumerated_forest_law(graph, q)
    probs = {}
    for parent, mass in law.items():
        code = int(_forest_codes(np.array(parent, dtype=np.int64), n))
        probs[code] = mass
    counts = {}
    for _, seed, size in cfg.batches():
        parents, _ = sample_forest_batch(graph, q, seed, size)
        codes, reps = np.unique(_forest_codes(parents, n), return_counts=True)
        for code, rep in zip(codes.tolist(), reps.tolist()):
            counts[code] = counts.get(code, 0) + rep
    tv = 0.0
    for code in probs.keys() | counts.keys():
        tv += abs(counts.get(code, 0) / cfg.n_samples - probs.get(code, 0.0))
    return 0.5 * tv


def _forest_law_battery(extra_graphs=()):
    """(label, graph or error) pairs checked by the sampling oracle."""
    battery = [
        ("K3", complete_graph(3)),
        ("K4", complete_graph(4)),
        ("path4", path_graph(4)),
        ("star4", star_graph(4)),
        ("K4(w1=1,w2=0.5)", TwoCommunityModel(2, 1.0, 0.5).expand()),
    ]
    for label, path in extra_graphs:
        try:
            battery.append((label, read_graph_file(path)))
        except (OSError, ValueError) as exc:
            battery.append((label, exc))
    return battery


def _simple_paths_from(graph: WeightedGraph, start: int):
    """All self-avoiding vertex paths from start, in DFS order."""
    n = graph.n_vertices
    path = [start]
    seen = {start}

    def walk():
        yield tuple(path)
        tail = path[-1]
        for v in range(n):
            if graph.weights[tail, v] > 0.0 and v not in seen:
                path.append(v)
                seen.add(v)
                yield from walk()
                seen.discard(v)
                path.pop()

    yield from walk()


def criterion_forest_law(extra_graphs=()):
    """Sampled forest frequencies and Z(q) against enumeration."""
    results = []
    for gi, (label, item) in enumerate(_forest_law_battery(extra_graphs)):
        if isinstance(item, Exception):
            results.append(
                _check(f"forest-law {label}", False, f"error: {item}", "readable graph")
            )
            continue
        graph = item
        for qi, q in enumerate((0.5, 1.0, 2.0)):
            law, z_enum = enumerated_forest_law(graph, q)
            z_det = forest_polynomial(graph, q)
            rel = abs(z_enum - z_det) / z_det
            results.append(
                _check(
                    f"Z({label}, q={q}) enumeration vs determinant",
                    rel <= 1e-9,
                    f"rel err {rel:.3e}",
                    "<= 1e-9",
                )
            )
            cfg = McConfig.for_run(
                FOREST_LAW_SAMPLES, base_seed=SEED_FOREST_LAW + 100 * gi + qi
            )
            tv = _sampled_forest_tv(graph, q, cfg)
            results.append(
                _check(
                    f"forest law {label} q={q} ({cfg.n_samples} samples)",
                    tv <= FOREST_LAW_TV,
                    f"TV {tv:.5f}",
                    f"<= {FOREST_LAW_TV}",
                )
            )
    return results


def criterion_path_law():
    """Killed loop-erased path law on the triangle: mass and frequencies."""
    results = []
    graph = complete_graph(3)
    paths = list(_simple_paths_from(graph, 0))
    for q in (0.5, 1.0, 2.0):
        probs = [marchal_le_prob(graph, q, p) for p in paths]
        total = sum(probs)
        results.append(
            _check(
                f"path-law mass K3 q={q}",
                abs(total - 1.0) <= 1e-9,
                f"sum {total:.12f}",
                "1 +- 1e-9",
            )
        )
    q = 1.0
    probs = {p: marchal_le_prob(graph, q, p) for p in paths}
    cfg = McConfig.for_run(PATH_LAW_SAMPLES, base_seed=SEED_PATH_LAW)
    hist = {}
    for _, seed, size in cfg.batches():
        _, codes = le_walk_batch(graph, q, seed, size, start=0, encode=True)
        vals, reps = np.unique(codes, return_counts=True)
        for v, r in zip(vals.tolist(), reps.tolist()):
            hist[v] = hist.get(v, 0) + r
    for path, prob in sorted(probs.items()):
        code = 0
        for v in path:
            code = code * 4 + v + 1
        freq = hist.get(code, 0) / cfg.n_samples
        bound = 4.0 * math.sqrt(prob * (1.0 - prob) / cfg.n_samples)
        results.append(
            _check(
                f"path {'-'.join(map(str, path))} frequency (q=1)",
                abs(freq - prob) <= bound,
                f"|{freq:.5f} - {prob:.5f}| = {abs(freq - prob):.5f}",
                f"<= 4 sigma = {bound:.5f}",
            )
        )
    return results


def criterion_block_law():
    """Tree-count law: sampled means and the exact small-graph pmf."""
    results = []
    targets = [
        ("K50 q=5", CompleteModel(50, 1.0), 5.0),
        ("two-community N=50 w2=0.1 q=3", TwoCommunityModel(50, 1.0, 0.1), 3.0),
    ]
    for i, (label, target, q) in enumerate(targets):
        cfg = McConfig.for_run(BLOCK_LAW_SAMPLES, base_seed=SEED_BLOCK_LAW + i)
        res = estimate_block_law(target, q, cfg)
        results.append(
            _check(
                f"block-count mean {label}",
                abs(res.z_mean) <= 3.0,
                f"mean {res.mean:.4f} vs {res.exact_mean:.4f} (z={res.z_mean:+.2f})",
                "|z| <= 3",
            )
        )
    graph = complete_graph(3)
    for q in (0.5, 1.0, 2.0):
        law, _ = enumerated_forest_law(graph, q)
        masses = np.zeros(4)
        for parent, mass in law.items():
            masses[parent.count(-1)] += mass
        pmf = block_count_pmf(block_count_law(q, mean_field_spectrum(CompleteModel(3))))
        diff = float(np.max(np.abs(masses - pmf)))
        results.append(
            _check(
                f"block-count pmf K3 q={q} spectrum vs enumeration",
                diff <= 1e-9,
                f"max abs diff {diff:.3e}",
                "<= 1e-9",
            )
        )
    return results


def criterion_complete_formula():
    """Complete-graph potential: enumeration oracle and sampling check."""
    results = []
    for n in (2, 3, 4):
        for q in (0.5, 1.0, 2.0):
            exact = u_complete_exact(n, 1.0, q).value
            enum = u_enumeration(complete_graph(n), q, 0, 1).value
            diff = abs(exact - enum)
            results.append(
                _check(
                    f"u_complete K{n} q={q} vs enumeration",
                    diff <= 1e-9,
                    f"|{exact:.10f} - {enum:.10f}| = {diff:.3e}",
                    "<= 1e-9",
                )
            )
    model = CompleteModel(50, 1.0)
    for i, q in enumerate((1.0, 5.0, math.sqrt(50.0))):
        exact = u_complete_exact(50, 1.0, q).value
        cfg = McConfig.for_run(POTENTIAL_SAMPLES, base_seed=SEED_POTENTIAL + i)
        est = estimate_potential(model, q, 0, 1, cfg, method="forest")
        z = (est.mean - exact) / est.stderr
        results.append(
            _check(
                f"u_complete K50 q={q:.4f} vs sampling ({cfg.n_samples} samples)",
                abs(z) <= 3.0,
                f"mc {est.mean:.5f} vs exact {exact:.5f} (z={z:+.2f})",
                "|z| <= 3",
            )
        )
    return results


def criterion_scaling_limit():
    """Complete-graph potential at q = sqrt(N) against its N -> oo limit."""
    results = []
    integral, _ = scipy.integrate.quad(lambda s: math.exp(-s - 0.5 * s * s), 0.0, np.inf)
    closed = u_complete_limit(1.0)
    results.append(
        _check(
            "limit constant quadrature vs closed form",
            abs(integral - closed) <= 1e-9,
            f"|{integral:.10f} - {closed:.10f}| = {abs(integral - closed):.3e}",
            "<= 1e-9",
        )
    )
    gaps = []
    for n in (100, 1000, 10000):
        u = u_complete_exact(n, 1.0, math.sqrt(n)).value
        gaps.append(abs(u - integral))
    results.append(
        _check(
            "limit gap decreases over N=100,1000,10000",
            gaps[0] > gaps[1] > gaps[2],
            "gaps " + ", ".join(f"{g:.5f}" for g in gaps),
            "strictly decreasing",
        )
    )
    results.append(
        _check(
            "limit gap at N=10000",
            gaps[2] <= 0.02,
            f"{gaps[2]:.5f}",
            "<= 0.02",
        )
    )
    return results


def criterion_two_community_formula():
    """Two-community potential: enumeration, collapse, and sampling checks."""
    results = []
    for w1, w2, q in ((1.0, 0.25, 0.8), (2.0, 0.5, 1.7)):
        graph = TwoCommunityModel(2, w1, w2).expand()
        for star, y in (("in", 1), ("out", 2)):
            exact = u_two_community_exact(2, w1, w2, q, star).value
            enum = u_enumeration(graph, q, 0, y).value
            diff = abs(exact - enum)
            results.append(
                _check(
                    f"u_two_community N=2 w1={w1} w2={w2} q={q} {star} vs enumeration",
                    diff <= 1e-9,
                    f"diff {diff:.3e}",
                    "<= 1e-9",
                )
            )
    for n, w, q in ((5, 1.0, 1.0), (25, 0.5, 2.0), (50, 1.0, 3.0)):
        whole = u_complete_exact(2 * n, w, q).value
        for star in ("in", "out"):
            collapsed = u_two_community_exact(n, w, w, q, star).value
            diff = abs(collapsed - whole)
            results.append(
                _check(
                    f"collapse w1=w2={w} N={n} q={q} {star} vs complete 2N",
                    diff <= 1e-8,
                    f"diff {diff:.3e}",
                    "<= 1e-8",
                )
            )
    model = TwoCommunityModel(30, 1.0, 0.05)
    q = 3.0
    exact = u_two_community_exact(30, 1.0, 0.05, q, "out").value
    cfg = McConfig.for_run(POTENTIAL_SAMPLES, base_seed=SEED_POTENTIAL + 7)
    forest = estimate_potential(model, q, 0, 30, cfg, method="forest")
    split = estimate_potential(model, q, 0, 30, cfg, method="split")
    z_f = (forest.mean - exact) / forest.stderr
    z_s = (split.mean - exact) / split.stderr
    z_pair = (forest.mean - split.mean) / math.hypot(forest.stderr, split.stderr)
    results.append(
        _check(
            "u_two_community N=30 out, forest estimator vs exact",
            abs(z_f) <= 3.0,
            f"mc {forest.mean:.5f} vs exact {exact:.5f} (z={z_f:+.2f})",
            "|z| <= 3",
        )
    )
    results.append(
        _check(
            "u_two_community N=30 out, split estimator vs exact",
            abs(z_s) <= 3.0,
            f"mc {split.mean:.5f} vs exact {exact:.5f} (z={z_s:+.2f})",
            "|z| <= 3",
        )
    )
    results.append(
        _check(
            "u_two_community N=30 out, estimators vs each other",
            abs(z_pair) <= 3.0,
            f"forest {forest.mean:.5f} vs split {split.mean:.5f} (z={z_pair:+.2f})",
            "|z| <= 3",
        )
    )
    return results


def _ladder(point):
    alpha, beta = point
    return [phase_point(alpha, beta, n) for n in LADDER]


def criterion_phase_trends():
    """Potential trends at the pinned regime points over the N ladder."""
    results = []

    rows = _ladder(POINT_B)
    outs = [r.u_out for r in rows]
    ins = [r.u_in for r in rows]
    results.append(
        _check(
            "regime b (3/10, 9/10): u_out strictly increasing",
            outs[0] < outs[1] < outs[2],
            "u_out " + ", ".join(f"{v:.4f}" for v in outs),
            "strictly increasing over N=100,400,1600",
        )
    )
    results.append(
        _check(
            "regime b: u_out at N=1600",
            outs[2] >= 0.9,
            f"{outs[2]:.4f}",
            ">= 0.9",
        )
    )
    results.append(
        _check(
            "regime b: u_in strictly decreasing",
            ins[0] > ins[1] > ins[2],
            "u_in " + ", ".join(f"{v:.4f}" for v in ins),
            "strictly decreasing over N=100,400,1600",
        )
    )
    results.append(
        _check(
            "regime b: u_in at N=1600",
            ins[2] <= 0.1,
            f"{ins[2]:.4f}",
            "<= 0.1",
        )
    )

    row = _ladder(POINT_D)[-1]
    results.append(
        _check(
            "regime d (1/5, 1/5): both potentials at N=1600",
            row.u_in <= 0.1 and row.u_out <= 0.1,
            f"u_in {row.u_in:.4f}, u_out {row.u_out:.4f}",
            "both <= 0.1",
        )
    )

    row = _ladder(POINT_F)[-1]
    results.append(
        _check(
            "regime f (4/5, 1/2): both potentials at N=1600",
            row.u_in >= 0.9 and row.u_out >= 0.9,
            f"u_in {row.u_in:.4f}, u_out {row.u_out:.4f}",
            "both >= 0.9",
        )
    )

    row = _ladder(POINT_E)[-1]
    results.append(
        _check(
            "regime e (1/2, 1/5): both interior at N=1600",
            0.1 < row.u_in < 0.9 and 0.1 < row.u_out < 0.9,
            f"u_in {row.u_in:.4f}, u_out {row.u_out:.4f}",
            "both in (0.1, 0.9)",
        )
    )
    results.append(
        _check(
            "regime e: gap at N=1600",
            abs(row.gap) <= 0.1,
            f"{row.gap:+.4f}",
            "|gap| <= 0.1",
        )
    )

    for point, want in ((POINT_B, "b"), (POINT_D, "d"), (POINT_F, "f"), (POINT_E, "e")):
        got = classify_regime(*point)
        results.append(
            _check(
                f"classify_regime({point[0]}, {point[1]})",
                got == want,
                got,
                want,
            )
        )
    return results


def _model_at(point, n):
    alpha, beta = point
    q = float(n) ** float(alpha)
    w2 = float(n) ** (-float(beta))
    return TwoCommunityModel(n, 1.0, w2), q


def criterion_structure():
    """Partition shapes at the pinned regime points, N = 400."""
    results = []
    cfg = McConfig.for_run(STRUCTURE_SAMPLES, base_seed=SEED_STRUCTURE)

    model, q = _model_at(POINT_D, 400)
    rep = community_structure_report(model, q, cfg)
    results.append(
        _check(
            "regime d N=400: giant block frequency",
            rep.freq_giant >= 0.9,
            f"{rep.freq_giant:.3f}",
            ">= 0.9 (largest block >= 0.9 of vertices)",
        )
    )

    model, q = _model_at(POINT_F, 400)
    rep = community_structure_report(model, q, cfg)
    results.append(
        _check(
            "regime f N=400: dust frequency",
            rep.freq_no_macroscopic >= 0.9,
            f"{rep.freq_no_macroscopic:.3f}",
            ">= 0.9 (no block >= 0.1 of vertices)",
        )
    )

    model, q = _model_at(POINT_B, 400)
    rep = community_structure_report(model, q, cfg)
    results.append(
        _check(
            "regime b N=400: pure top-two frequency",
            rep.freq_pure_pair >= 0.8,
            f"{rep.freq_pure_pair:.3f}",
            ">= 0.8 (two largest blocks both >= 0.9 pure)",
        )
    )

    for point, label in ((POINT_D, "d"), (POINT_F, "f")):
        alpha = float(point[0])
        normalized = []
        for n in (100, 400):
            model, q = _model_at(point, n)
            rep = community_structure_report(model, q, cfg)
            normalized.append(rep.mean_blocks / float(n) ** min(alpha, 1.0))
        ratio = normalized[1] / normalized[0]
        results.append(
            _check(
                f"regime {label}: mean blocks / N^alpha stable over N=100,400",
                1.0 / 1.5 <= ratio <= 1.5,
                f"{normalized[0]:.3f} vs {normalized[1]:.3f} (ratio {ratio:.3f})",
                "ratio within factor 1.5",
            )
        )
    return results


def run_suite(suite: str, extra_graphs=()):
    """All checks of one named suite, in a stable order."""
    if suite == "oracle":
        results = []
        results += criterion_forest_law(extra_graphs)
        results += criterion_path_law()
        results += criterion_block_law()
        return results
    if suite == "formulas":
        results = []
        results += criterion_complete_formula()
        results += criterion_scaling_limit()
        results += criterion_two_community_formula()
        return results
    if suite == "phase":
        return criterion_phase_trends() + criterion_structure()
    raise ValueError(f"unknown suite {suite!r}; pick from {SUITES}")
