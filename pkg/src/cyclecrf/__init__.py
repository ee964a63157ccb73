"""Multicut decompositions via adaptive higher-order mean-field inference."""
from ._backend import BACKEND
from .cycles import (
    CycleStats,
    Triangle,
    TriangleSet,
    count_invalid,
    enumerate_chordless_cycles,
    enumerate_triangles,
    is_feasible,
    triangle_violated,
)
from .graph import (
    EdgeGraph,
    EdgeMap,
    GridConfig,
    build_grid_graph,
    icc_weight,
    labeling_from_partition,
    partition_from_labeling,
    probs_to_costs,
)
from .meanfield import (
    CoolingState,
    FitOptions,
    MeanFieldConfig,
    PotentialParams,
    fit_costs,
    meanfield_step,
    phi,
    run_meanfield,
    softmax_with_temperature,
    unary_potential,
)
from .metrics import PartitionScore, edge_prf, rand_index, variation_of_information
from .solvers import (
    SolveResult,
    greedy_contract,
    objective_cubic,
    objective_linear,
    round_and_repair,
    solve_exact,
)

__version__ = "0.1.0"
