"""Link scheduling with multiuser (broadcast / multiple-access) links:
greedy schedulers, queue simulation, and LP-certified pooling bounds."""

from .capacity import (
    FixedRegion,
    GaussianBCRegion,
    RatePair,
    SampledRegion,
    make_fixed_region,
    make_sampled_region,
    max_weight_point,
    on_boundary,
    sample_boundary,
)
from .net_model import (
    Link,
    NetworkGraph,
    Violation,
    derive_node_exclusive_sets,
    enumerate_links,
    graph_from_json,
    graph_to_json,
    load_graph,
    make_graph,
    save_graph,
    validate_graph,
)
from .rate_alloc import (
    RateAllocationVector,
    check_constraints,
    enumerate_mgmw_reachable,
    enumerate_rate_vectors,
    link_conflict,
    stability_region_contains,
)
from .sched import (
    gmm_schedule,
    maxweight_schedule,
    mgmw_schedule,
    vr_mgmw_schedule,
)
from .sim import (
    BernoulliArrivals,
    IIDBatchArrivals,
    StabilityEstimate,
    Trace,
    estimate_stability,
    run_simulation,
)
from .pooling import (
    CandidateMWSet,
    GraphSigmaBounds,
    LpProblem,
    LpSolution,
    candidate_mw_subsets,
    graph_sigma_bounds,
    sigma_lower_lp,
    sigma_ratio_bound,
    sigma_upper_lp,
    solve_lp,
    vr_sigma_hat,
)
from .adversarial import (
    TheoremTraffic,
    build_theorem2_traffic,
    build_theorem5_traffic,
    hat_c_increments,
    lemma1_initial_queues,
)
from . import errors, fixtures

__all__ = [name for name in dir() if not name.startswith("_")]
