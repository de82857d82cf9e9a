"""Loop-erased partitions of weighted graphs.

Random walks killed at rate q, run with Wilson-style cycle erasure,
cut a graph into the trees of a random rooted forest. This package
samples that forest measure, evaluates its closed-form separation
potentials on complete and two-community graphs, and maps the large-N
phase diagram of community detectability.
"""

from .exact import (
    LocalTimeTable,
    PotentialResult,
    entropy_factor,
    entropy_factor_variant,
    lerw_length_ccdf,
    local_time_table,
    lumped_eigenvalues,
    marchal_le_prob,
    p_dagger,
    survival_prob,
    theta,
    u_complete_exact,
    u_complete_limit,
    u_enumeration,
    u_two_community_exact,
)
from .forests import (
    Partition,
    RootedForest,
    forest_from_text,
    forest_to_partition,
    forest_to_text,
    partition_to_text,
)
from .graphs import (
    CompleteModel,
    TwoCommunityModel,
    WeightedGraph,
    block_count_law,
    block_count_pmf,
    build_laplacian,
    complete_graph,
    enumerate_rooted_forests,
    enumerated_forest_law,
    forest_polynomial,
    mean_field_spectrum,
    path_graph,
    read_graph_file,
    star_graph,
    write_graph_file,
)
from .montecarlo import (
    BlockLawResult,
    McConfig,
    McEstimate,
    StructureReport,
    StructureSample,
    community_structure_report,
    estimate_block_law,
    estimate_potential,
    le_walk_batch,
    sample_forest_batch,
    sample_structure,
)
from .phase import (
    DEFAULT_POINTS,
    DEFAULT_SIZES,
    REGIME_LABELS,
    REGIME_LIMITS,
    PhaseRow,
    classify_regime,
    detectability_gap,
    is_anticommunity,
    phase_point,
    rows_to_csv,
    rows_to_records,
    sweep,
)
from .rng import SplitMix64, batch_seed
from .walks import LePath, killed_step, loop_erased_walk, sample_partition, wilson_forest

__version__ = "0.1.0"
