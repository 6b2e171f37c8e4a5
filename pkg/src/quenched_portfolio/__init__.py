"""Finite-N mean-variance portfolio solvers checked against quenched replica predictions."""

__version__ = "0.1.0"

from .errors import (
    DegenerateMeanError,
    IllConditionedEliminationError,
    InfeasibleRiskError,
    InsufficientSamplesError,
    InvalidParameterError,
    PortfolioError,
    SingularWishartError,
)
from .market import (
    Distribution,
    MarketParams,
    MarketSample,
    WishartSolver,
    sample_market,
    wishart_apply_inverse,
)
from .solver import (
    Branch,
    DualSolution,
    PrimalSolution,
    ProjectionScalars,
    dual_frontier,
    efficient_frontier,
    projection_scalars,
    solve_dual,
    solve_primal,
)
from .theory import (
    EnsembleMoments,
    Regime,
    SharpeOptimum,
    TheoryPoint,
    annealed_dual,
    annealed_primal,
    max_sharpe,
    quenched_dual,
    quenched_primal,
)
from .harness import (
    ComparisonReport,
    SweepKind,
    SweepResult,
    SweepSpec,
    compare_with_theory,
    duality_audit,
    qp_oracle,
    run_sweep,
)
