"""Interactive Bayesian preference elicitation over combinatorial decision
problems, with pairwise queries chosen by minimax expected regret."""

from .bayes import (
    Answer,
    GaussianState,
    ResponseNoise,
    posterior_given_latent,
    sample_truncated_latent,
    sample_weights,
    simulate_answer,
    update,
)
from .clustering import ClusteredSample, cluster
from .elicitation import (
    DecisionMaker,
    SessionConfig,
    SessionState,
    SimulatedDecisionMaker,
    advance,
    apply_answer,
    hidden_weight,
    new_session,
    run,
    score,
    step,
    trace_records,
)
from .milp import (
    BranchAndBoundBackend,
    HighsBackend,
    MilpBackend,
    MilpModel,
    ModelBuilder,
    SolverError,
    get_backend,
)
from .model import (
    OptimizationSense,
    Solution,
    UtilityVector,
    WeightVector,
    aggregate,
    utility_difference,
)
from .oracle import (
    InstanceTooLargeError,
    best_scalarized,
    enumerate_feasible,
    knapsack_optimum_dp,
    oracle_mmer,
)
from .problems import (
    AllocationInstance,
    KnapsackInstance,
    generate_allocation,
    generate_knapsack,
    instance_from_json,
    instance_to_json,
    is_feasible,
    load_instance,
    optimize_scalarized,
    save_instance,
)
from .regret import RegretReport, mer_explicit, mmer_explicit, per
from .regret_milp import (
    ChallengerSet,
    ConvergenceError,
    build_mer_model,
    build_restricted_mmer_model,
    mer,
    mmer,
)

__version__ = "0.1.0"
