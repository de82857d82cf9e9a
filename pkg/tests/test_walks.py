"""Killed walks, loop erasure, and the forest sampler."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lepart.graphs import CompleteModel, TwoCommunityModel, complete_graph, path_graph
from lepart.rng import SplitMix64, batch_seed
from lepart.walks import (
    LePath,
    killed_step,
    loop_erased_walk,
    make_stepper,
    sample_partition,
    wilson_forest,
)


def test_le_path_killed_flag():
    assert LePath(vertices=(0, 1), hit=None).killed
    assert not LePath(vertices=(0,), hit=3).killed
    assert len(LePath(vertices=(0, 1, 2), hit=None)) == 3


def test_killed_step_stays_on_graph():
    g = complete_graph(4)
    rng = SplitMix64(1)
    for _ in range(200):
        y = killed_step(g, 0.5, 2, rng)
        assert y is None or (0 <= y < 4 and y != 2)


def test_make_stepper_requires_positive_q():
    with pytest.raises(ValueError):
        make_stepper(complete_graph(3), 0.0)


def test_make_stepper_rejects_unknown_targets():
    with pytest.raises(TypeError):
        make_stepper(object(), 1.0)


def test_complete_stepper_replays_graph_draws():
    """Uniform weights keep neighbor order, so inversion equals the search."""
    model = CompleteModel(N=6, w=0.5)
    q = 0.7
    direct = make_stepper(model, q)
    dense = make_stepper(model.expand(), q)
    rng_a, rng_b = SplitMix64(42), SplitMix64(42)
    for _ in range(3000):
        x = rng_a.next_uint64() % model.n_vertices
        rng_b.next_uint64()
        assert direct(x, rng_a) == dense(x, rng_b)


def test_two_community_stepper_frequencies():
    """Block-ordered inversion must still hit each vertex at rate w/(q+s)."""
    model = TwoCommunityModel(N=4, w1=1.0, w2=0.25)
    q = 0.7
    x = 5
    step = make_stepper(model, q)
    rng = SplitMix64(2024)
    n_draws = 40000
    counts = np.zeros(model.n_vertices + 1)
    for _ in range(n_draws):
        counts[step(x, rng)] += 1
    row = model.expand().weights[x]
    total = q + row.sum()
    expected = np.append(row, q) / total
    sigma = np.sqrt(expected * (1.0 - expected) / n_draws)
    observed = counts / n_draws
    assert observed[x] == 0.0
    mask = expected > 0.0
    assert np.all(np.abs(observed[mask] - expected[mask]) <= 4.0 * sigma[mask])


def test_loop_erased_walk_range_checks():
    g = complete_graph(3)
    with pytest.raises(ValueError):
        loop_erased_walk(g, 1.0, 5, None, SplitMix64(0))
    frozen = np.array([True, False, False])
    with pytest.raises(ValueError):
        loop_erased_walk(g, 1.0, 0, frozen, SplitMix64(0))


def test_loop_erased_walk_stops_at_frozen_set():
    g = complete_graph(5)
    frozen = np.zeros(5, dtype=bool)
    frozen[4] = True
    for seed in range(30):
        walk = loop_erased_walk(g, 0.5, 0, frozen, SplitMix64(seed))
        assert walk.vertices[0] == 0
        assert not any(frozen[v] for v in walk.vertices)
        if not walk.killed:
            assert walk.hit == 4


@given(st.integers(min_value=0, max_value=2**63))
@settings(max_examples=60, deadline=None)
def test_loop_erased_walk_is_self_avoiding(seed):
    g = complete_graph(6)
    walk = loop_erased_walk(g, 0.3, 0, None, SplitMix64(seed))
    assert walk.killed
    assert len(set(walk.vertices)) == len(walk.vertices)
    for a, b in zip(walk.vertices, walk.vertices[1:]):
        assert g.weights[a, b] > 0.0


@given(st.integers(min_value=0, max_value=2**63))
@settings(max_examples=60, deadline=None)
def test_walk_respects_graph_edges(seed):
    g = path_graph(6)
    walk = loop_erased_walk(g, 0.8, 2, None, SplitMix64(seed))
    for a, b in zip(walk.vertices, walk.vertices[1:]):
        assert abs(a - b) == 1


@pytest.mark.parametrize(
    "target",
    [
        complete_graph(7),
        path_graph(5),
        CompleteModel(N=9, w=2.0),
        TwoCommunityModel(N=5, w1=1.0, w2=0.1),
    ],
)
def test_wilson_forest_is_valid(target):
    for seed in (0, 1, 17):
        forest = wilson_forest(target, 1.5, seed)
        assert forest.n_vertices == target.n_vertices
        forest.validate()
        if hasattr(target, "weights"):
            forest.validate(target.weights)


def test_wilson_forest_is_deterministic():
    model = TwoCommunityModel(N=6, w1=1.0, w2=0.2)
    a = wilson_forest(model, 2.0, seed=123)
    b = wilson_forest(model, 2.0, seed=123)
    assert a == b
    c = wilson_forest(model, 2.0, seed=124)
    assert a != c or a.parent == c.parent


def test_wilson_forest_scan_order_changes_draws_not_law():
    g = complete_graph(5)
    default = wilson_forest(g, 1.0, seed=7)
    reversed_scan = wilson_forest(g, 1.0, seed=7, scan_order=range(4, -1, -1))
    default.validate()
    reversed_scan.validate()


def test_sample_partition_matches_forest():
    g = complete_graph(6)
    forest = wilson_forest(g, 1.0, seed=99)
    partition = sample_partition(g, 1.0, seed=99)
    root_of = forest.root_of()
    for block in partition.blocks:
        assert len({int(root_of[v]) for v in block}) == 1
    assert partition.n_blocks == forest.n_trees


def test_batch_seed_wraps_modulo_2_64():
    assert batch_seed(2**64 - 1, 1) == 0
    assert batch_seed(10, 5) == 15


def test_single_vertex_graph():
    g = complete_graph(1)
    forest = wilson_forest(g, 1.0, seed=0)
    assert forest.parent == (-1,)
