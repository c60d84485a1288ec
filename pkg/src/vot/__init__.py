"""Vector-valued optimal transport on finitely supported measures.

Solve the multi-species Kantorovich problem, certify optimality through
dual potentials and complementary slackness, and compute and audit the
induced p-transportation distances.
"""
from .dual import (
    PotentialPair,
    SweepResult,
    c_transform,
    cbar_transform,
    check_dual_feasible,
    check_optimality,
    dual_value,
    improve_potentials,
    improve_until_stall,
)
from .errors import (
    DimensionMismatchError,
    MassMismatchError,
    MeasureValidationError,
    MiddleMarginalError,
    OracleSizeError,
    ProblemFormatError,
    VotError,
)
from .measures import (
    CostTensor,
    DiscreteEpsilon,
    ExplicitCost,
    LpNormPlusKappa,
    MetricSpec,
    Point,
    SupportSet,
    VectorMeasure,
    as_metric_spec,
    build_kappa_cost,
    load_measure,
    load_metric,
    load_problem,
    load_supports,
    save_problem,
    union_support,
    validate_measure,
)
from .metrics import (
    GluedPlan,
    MetricAxiomsReport,
    MtiReport,
    MtiViolation,
    check_metric_axioms,
    check_mti,
    dirac_tuple_measure,
    glue_plans,
    mti_counterexample,
    three_point_cost,
    transport_report,
    tuple_distance,
    wasserstein_p,
)
from .solver import (
    CouplingTensor,
    FlatProblem,
    SolveReport,
    Status,
    brute_force_oracle,
    coupling_residuals,
    flatten,
    product_plan,
    solve_primal,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
