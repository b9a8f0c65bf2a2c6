"""FTRL-based Blackwell approachability of convex cones.

Library layout:
  geometry      cones, polars, generator sets, support functions, distances
  solvers       projections, Dykstra, projected gradient ascent, a dense LP,
                stationary distributions, Caratheodory decomposition
  regularizers  the regularizer zoo, conjugate argmax maps, certificates
  engine        the FTRL approachability loop and its diagnostics
  games         vector-payoff games, environments, the dual-condition check
  global_cost   online load balancing under a norm cost (cutting planes)
  combinatorial m-set online combinatorial optimization
  phi_regret    swap/internal/Phi-regret via approachability
  blackwell     Blackwell's classical algorithm and the FTRL equivalence
  experiments   problem builders and the bound-reproduction experiments
  harness       JSON config, run/verify/sweep commands, serialization
"""

from .blackwell import (
    BlackwellState,
    blackwell_step,
    certify_payoff_bound,
    equivalence_check,
    run_blackwell,
)
from .combinatorial import (
    CombInstance,
    comb_ftrl_step,
    comb_oracle,
    comb_payoff,
    comb_regret,
)
from .engine import (
    RunReport,
    Schedule,
    StepRecord,
    bound_values,
    eta,
    ftrl_step,
    mix64,
    run,
    run_mixed,
)
from .errors import (
    CapabilityError,
    ConfigError,
    CutBudgetError,
    DimensionMismatchError,
    HardLimitError,
    InfeasibleError,
    InputError,
    SolverError,
    UnboundedError,
)
from .games import (
    GameSpec,
    MixedAction,
    adversarial_env,
    dual_condition_check,
)
from .geometry import (
    FinitelyGeneratedCone,
    GeneratorSet,
    GlobalCostCone,
    HalfspaceCone,
    LpNorm,
    MaxPairNorm,
    Orthant,
    SumPairNorm,
    distance_to_cone,
    membership,
    moreau_decompose,
    polar,
    project_to_cone,
    support_function,
    support_point,
)
from .global_cost import (
    GlobalCostInstance,
    PolarApprox,
    configure_lp_algorithm,
    configure_norm_algorithm,
    eval_regret,
    ftrl_argmax_gc,
    polar_separation,
)
from .phi_regret import (
    PhiFamily,
    all_maps,
    internal_regret_eval,
    phi_ftrl_weights,
    phi_oracle,
    phi_payoff,
    phi_regret_eval,
    transpositions,
)
from .regularizers import (
    CompositeGlobalCost,
    Entropic,
    EuclideanSquared,
    LpSquared,
    Regularizer,
    ScaledEntropic,
    capped_softmax,
    certify_constants,
    conj_argmax,
    numeric_delta,
    softmax,
    strong_convexity_check,
)
from .solvers import (
    caratheodory_decompose,
    dykstra_project,
    lp_solve,
    min_weighted_lp_norm,
    nu_oracle,
    pga_maximize,
    project_onto,
    stationary_distribution,
)

__version__ = "0.1.0"
