"""Batched estimators: layout, kernel parity, and statistical agreement."""

import numpy as np
import pytest

from lepart import _kernels
from lepart.exact import u_complete_exact, u_enumeration
from lepart.graphs import CompleteModel, TwoCommunityModel, complete_graph, path_graph
from lepart.montecarlo import (
    McConfig,
    community_structure_report,
    estimate_block_law,
    estimate_potential,
    le_walk_batch,
    sample_forest_batch,
    sample_structure,
)
from lepart.rng import batch_seed

needs_kernels = pytest.mark.skipif(
    not _kernels.AVAILABLE, reason="compiled kernels unavailable"
)


class TestMcConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            McConfig(n_samples=0)
        with pytest.raises(ValueError):
            McConfig(n_samples=10, batch_size=11)
        with pytest.raises(ValueError):
            McConfig(n_samples=10, batch_size=0)
        with pytest.raises(ValueError):
            McConfig(n_samples=10, batch_size=5, max_concurrency=0)

    def test_for_run_clamps_batch_size(self):
        cfg = McConfig.for_run(100, base_seed=3)
        assert cfg.batch_size == 100
        assert McConfig.for_run(10**6).batch_size == 65536

    def test_batches_partition_the_samples(self):
        cfg = McConfig(n_samples=10, base_seed=7, batch_size=4)
        batches = cfg.batches()
        assert [size for _, _, size in batches] == [4, 4, 2]
        assert [index for index, _, _ in batches] == [0, 1, 2]
        assert [seed for _, seed, _ in batches] == [
            batch_seed(7, 0), batch_seed(7, 1), batch_seed(7, 2)
        ]


@needs_kernels
class TestKernelParity:
    """The compiled kernels must replay the reference sampler bit for bit."""

    @pytest.mark.parametrize(
        "target",
        [
            complete_graph(5),
            path_graph(6),
            CompleteModel(N=6, w=0.5),
            TwoCommunityModel(N=4, w1=1.0, w2=0.3),
        ],
    )
    def test_forest_batches_match(self, target, monkeypatch):
        compiled = sample_forest_batch(target, 0.8, 42, 64)
        monkeypatch.setattr(_kernels, "AVAILABLE", False)
        reference = sample_forest_batch(target, 0.8, 42, 64)
        assert np.array_equal(compiled[0], reference[0])
        assert np.array_equal(compiled[1], reference[1])

    def test_walk_batches_match(self, monkeypatch):
        g = complete_graph(4)
        compiled = le_walk_batch(g, 1.0, 7, 256, start=0, encode=True)
        monkeypatch.setattr(_kernels, "AVAILABLE", False)
        reference = le_walk_batch(g, 1.0, 7, 256, start=0, encode=True)
        assert np.array_equal(compiled[0], reference[0])
        assert np.array_equal(compiled[1], reference[1])

    def test_split_batches_match(self, monkeypatch):
        g = complete_graph(5)
        cfg = McConfig.for_run(2048, base_seed=11)
        compiled = estimate_potential(g, 1.0, 0, 1, cfg, method="split")
        monkeypatch.setattr(_kernels, "AVAILABLE", False)
        reference = estimate_potential(g, 1.0, 0, 1, cfg, method="split")
        assert compiled == reference


def test_path_codes_guard_large_graphs():
    with pytest.raises(ValueError):
        le_walk_batch(complete_graph(20), 1.0, 0, 4, start=0, encode=True)


class TestEstimatePotential:
    def test_validation(self):
        g = complete_graph(4)
        cfg = McConfig.for_run(16)
        with pytest.raises(ValueError):
            estimate_potential(g, 1.0, 2, 2, cfg)
        with pytest.raises(ValueError):
            estimate_potential(g, 1.0, 0, 9, cfg)
        with pytest.raises(ValueError):
            estimate_potential(g, 0.0, 0, 1, cfg)
        with pytest.raises(ValueError):
            estimate_potential(g, 1.0, 0, 1, cfg, method="teleport")

    def test_forest_matches_exact_on_complete_model(self):
        model = CompleteModel(N=10, w=1.0)
        expected = u_complete_exact(10, 1.0, 1.0).value
        est = estimate_potential(model, 1.0, 0, 1, McConfig.for_run(40000, 5))
        assert abs(est.mean - expected) <= 4.0 * est.stderr
        assert est.n == 40000

    def test_split_matches_enumeration_on_k4(self):
        g = complete_graph(4)
        expected = u_enumeration(g, 1.5, 0, 2).value
        est = estimate_potential(g, 1.5, 0, 2, McConfig.for_run(40000, 6), "split")
        assert abs(est.mean - expected) <= 4.0 * est.stderr

    def test_forest_and_split_agree(self):
        g = complete_graph(6)
        cfg = McConfig.for_run(30000, base_seed=9)
        a = estimate_potential(g, 0.7, 0, 3, cfg, method="forest")
        b = estimate_potential(g, 0.7, 0, 3, cfg, method="split")
        joint = float(np.hypot(a.stderr, b.stderr))
        assert abs(a.mean - b.mean) <= 4.0 * joint

    def test_concurrency_does_not_change_the_estimate(self):
        model = TwoCommunityModel(N=15, w1=1.0, w2=0.1)
        serial = McConfig(n_samples=24000, base_seed=3, batch_size=2048)
        threaded = McConfig(
            n_samples=24000, base_seed=3, batch_size=2048, max_concurrency=8
        )
        a = estimate_potential(model, 2.0, 0, 20, serial)
        b = estimate_potential(model, 2.0, 0, 20, threaded)
        assert a == b

    def test_reruns_are_identical(self):
        g = complete_graph(5)
        cfg = McConfig.for_run(5000, base_seed=77)
        assert estimate_potential(g, 1.0, 0, 1, cfg) == estimate_potential(
            g, 1.0, 0, 1, cfg
        )


class TestBlockLaw:
    def test_complete_model_comparison_fields(self):
        model = CompleteModel(N=12, w=1.0)
        q = 2.0
        result = estimate_block_law(model, q, McConfig.for_run(20000, 13))
        assert int(result.histogram.sum()) == result.n == 20000
        expected_mean = 1.0 + 11.0 * q / (q + 12.0)
        assert result.exact_mean == pytest.approx(expected_mean, rel=1e-12)
        assert result.exact_variance is not None
        assert abs(result.z_mean) <= 4.0
        assert result.chi2_pvalue is not None
        assert result.chi2_pvalue > 1e-6

    def test_small_graph_gets_dense_comparison(self):
        result = estimate_block_law(path_graph(5), 1.0, McConfig.for_run(4000, 2))
        assert result.exact_mean is not None
        assert abs(result.z_mean) <= 4.0

    def test_minimum_tree_count_is_one(self):
        result = estimate_block_law(complete_graph(3), 0.5, McConfig.for_run(2000, 1))
        assert result.histogram[0] == 0

    def test_rejects_nonpositive_q(self):
        with pytest.raises(ValueError):
            estimate_block_law(complete_graph(3), 0.0, McConfig.for_run(10))


class TestStructure:
    def test_sample_shapes_and_ordering(self):
        model = TwoCommunityModel(N=8, w1=1.0, w2=0.05)
        sample = sample_structure(model, 0.5, McConfig.for_run(500, 21))
        assert len(sample.largest) == 500
        assert np.all(sample.largest >= sample.second)
        assert np.all(sample.second >= sample.third)
        assert np.all(sample.largest >= 1)
        assert np.all(sample.n_blocks >= 1)
        nonzero = sample.second > 0
        assert np.all(sample.purity_second[nonzero] >= 0.5)
        assert np.all(sample.purity_second[~nonzero] == 0.0)
        assert np.all(sample.purity_largest >= 0.5)
        assert np.all(sample.purity_largest <= 1.0)

    def test_tiny_communities_are_rejected(self):
        with pytest.raises(ValueError):
            sample_structure(TwoCommunityModel(N=1, w1=1.0, w2=1.0), 1.0,
                             McConfig.for_run(4))

    def test_report_frequencies_are_consistent(self):
        model = TwoCommunityModel(N=10, w1=1.0, w2=0.02)
        report = community_structure_report(model, 0.4, McConfig.for_run(800, 31))
        for freq in (
            report.freq_giant,
            report.freq_two_macroscopic,
            report.freq_no_macroscopic,
            report.freq_pure_pair,
        ):
            assert 0.0 <= freq <= 1.0
        assert report.freq_giant + report.freq_no_macroscopic <= 1.0 + 1e-12
        assert report.n == 800
        assert report.mean_blocks >= 1.0

    def test_eps_validation(self):
        model = TwoCommunityModel(N=4, w1=1.0, w2=0.1)
        with pytest.raises(ValueError):
            community_structure_report(model, 1.0, McConfig.for_run(4), eps=0.7)

    def test_strong_communities_split_in_two_pure_blocks(self):
        """Weak cross weight and moderate q favor one pure block per side."""
        model = TwoCommunityModel(N=20, w1=1.0, w2=1e-4)
        report = community_structure_report(model, 0.8, McConfig.for_run(400, 41))
        assert report.freq_pure_pair > 0.5
        assert report.freq_two_macroscopic > 0.5
