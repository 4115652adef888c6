"""Low-adaptivity maximization of non-monotone submodular objectives.

Batch threshold selection (rand_batch) drives two solvers: par_skp for
knapsack budgets and par_ssp for k-systems.  Objectives implement the
ValueOracle interface; constraints implement IndependenceSystem.  Every
run can be metered (adaptive rounds, value queries, independence
checks) and reproduced exactly from a seed, with or without the
compiled kernel.
"""

from . import _kernels
from .constraints import (
    COST_FLOOR,
    Cardinality,
    Contraction,
    CostModel,
    IndependenceSystem,
    Intersection,
    Knapsack,
    LabelSystem,
    MaskSystem,
    PartitionMatroid,
    TrivialSystem,
    as_mask_system,
    build_cardinality,
    build_intersection,
    build_knapsack,
    build_label_system,
    build_partition_matroid,
    check_downward_closure,
    unit_costs,
    verify_k_parameter,
)
from .core import (
    MASK_LIMIT,
    InputError,
    ModularOracle,
    RoundExecutor,
    RunMetrics,
    ShiftedOracle,
    TableOracle,
    Tally,
    ValueOracle,
    evaluate,
    marginal,
    shift_oracle,
    spawn_rng,
    subseq,
)
from .objectives import (
    CutOracle,
    ImageOracle,
    RevenueOracle,
    brute_force_opt,
    image_costs,
    movie_costs,
    movie_oracle,
    movie_similarity,
    revenue_costs,
)
from .parskp import SkpConfig, ThresholdGrid, par_skp, probe, threshold_repeats
from .parssp import SspConfig, ThresholdSchedule, default_p, effective_r, par_ssp
from .randbatch import (
    RandBatchParams,
    RandBatchResult,
    choose_engine,
    find_tstar,
    get_seq,
    normalize_instance,
    rand_batch,
)
from .usm import RANDOM_SUBSET, UsmSolver, usm_random_subset

__version__ = "0.1.0"

__all__ = [
    "COST_FLOOR",
    "Cardinality",
    "Contraction",
    "CostModel",
    "CutOracle",
    "ImageOracle",
    "IndependenceSystem",
    "InputError",
    "Intersection",
    "Knapsack",
    "LabelSystem",
    "MASK_LIMIT",
    "MaskSystem",
    "ModularOracle",
    "PartitionMatroid",
    "RANDOM_SUBSET",
    "RandBatchParams",
    "RandBatchResult",
    "RevenueOracle",
    "RoundExecutor",
    "RunMetrics",
    "ShiftedOracle",
    "SkpConfig",
    "SspConfig",
    "TableOracle",
    "Tally",
    "ThresholdGrid",
    "ThresholdSchedule",
    "TrivialSystem",
    "UsmSolver",
    "ValueOracle",
    "as_mask_system",
    "brute_force_opt",
    "build_cardinality",
    "build_intersection",
    "build_knapsack",
    "build_label_system",
    "build_partition_matroid",
    "check_downward_closure",
    "choose_engine",
    "default_p",
    "effective_r",
    "evaluate",
    "find_tstar",
    "get_seq",
    "image_costs",
    "marginal",
    "movie_costs",
    "movie_oracle",
    "movie_similarity",
    "normalize_instance",
    "par_skp",
    "par_ssp",
    "probe",
    "rand_batch",
    "revenue_costs",
    "shift_oracle",
    "spawn_rng",
    "subseq",
    "threshold_repeats",
    "unit_costs",
    "usm_random_subset",
    "verify_k_parameter",
]
