"""Monte Carlo configuration averages, duality audit and an independent QP oracle.

A sweep draws ``C`` disorder samples, solves the whole grid on each sample
with a single factorization, and aggregates mean and standard error per
grid point in sample-index order. Samples can be evaluated on a thread
pool; each sample owns its random stream, so the result does not depend
on the number of workers.
"""

from __future__ import annotations

import enum
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    IllConditionedEliminationError,
    InsufficientSamplesError,
    InvalidParameterError,
    PortfolioError,
)
from .market import MarketParams, MarketSample, sample_market
from .solver import (
    Branch,
    PrimalSolution,
    _dual,
    _primal,
    _projections,
    _check_degenerate,
)
from .theory import (
    EnsembleMoments,
    annealed_dual,
    annealed_primal,
    quenched_dual,
    quenched_primal,
)

__all__ = [
    "SweepKind",
    "SweepSpec",
    "PointStats",
    "SweepResult",
    "AuditRecord",
    "ComparisonEntry",
    "ComparisonReport",
    "run_sweep",
    "duality_audit",
    "qp_oracle",
    "compare_with_theory",
    "solve_dense",
]

Z_TOL = 3.0
REL_TOL = 0.02
PASS_FRACTION = 0.9


class SweepKind(str, enum.Enum):
    PRIMAL = "primal"
    DUAL = "dual"


@dataclass(frozen=True)
class SweepSpec:
    kind: SweepKind
    grid: tuple
    n_samples: int
    params: MarketParams
    branch: Branch = Branch.MAXIMIZE

    def __post_init__(self):
        object.__setattr__(self, "kind", SweepKind(self.kind))
        object.__setattr__(self, "branch", Branch(self.branch))
        grid = tuple(float(x) for x in self.grid)
        if not grid:
            raise InvalidParameterError("grid must be non-empty")
        if any(not math.isfinite(x) for x in grid):
            raise InvalidParameterError("grid values must be finite")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidParameterError("grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        if int(self.n_samples) != self.n_samples or self.n_samples < 2:
            raise InvalidParameterError("n_samples must be an integer >= 2")


@dataclass(frozen=True)
class PointStats:
    x_value: float
    mean_primary: float
    se_primary: float
    mean_qw: float
    se_qw: float
    mean_sharpe: float
    se_sharpe: float
    n_ok: int
    n_failed: int
    failures: tuple = ()  # (sample_index, message) pairs


@dataclass(frozen=True)
class SweepResult:
    kind: SweepKind
    branch: Branch
    per_point: list
    theory_quenched: list  # TheoryPoint or None where the formula is infeasible
    theory_annealed: list
    provenance: dict = field(default_factory=dict)

    @property
    def primary_stat(self) -> str:
        return "epsilon" if self.kind is SweepKind.PRIMAL else "r_prime"


def _evaluate_sample(spec: SweepSpec, index: int):
    """Values of shape (G, 3) for one sample, NaN where the solver refused."""
    sample = sample_market(spec.params, index)
    n_grid = len(spec.grid)
    values = np.full((n_grid, 3), np.nan)
    errors: list = [None] * n_grid
    try:
        proj = _projections(sample)
        _check_degenerate(proj.scalars)
    except PortfolioError as exc:
        return values, [str(exc)] * n_grid
    for g, x in enumerate(spec.grid):
        try:
            if spec.kind is SweepKind.PRIMAL:
                sol = _primal(proj, sample.n_assets, x)
                values[g] = (sol.epsilon, sol.q_w, sol.sharpe)
            else:
                sol = _dual(proj, sample.n_assets, x, spec.branch)
                values[g] = (sol.r_extremal, sol.q_w, sol.sharpe)
        except PortfolioError as exc:
            errors[g] = str(exc)
    return values, errors


def _mean_se(col: np.ndarray):
    return float(np.mean(col)), float(np.std(col, ddof=1) / math.sqrt(col.size))


def _theory(spec: SweepSpec):
    moments = EnsembleMoments.from_params(spec.params)
    quenched, annealed = [], []
    for x in spec.grid:
        try:
            if spec.kind is SweepKind.PRIMAL:
                quenched.append(quenched_primal(moments, x))
            else:
                quenched.append(quenched_dual(moments, x, spec.branch))
        except PortfolioError:
            quenched.append(None)
        try:
            if spec.kind is SweepKind.PRIMAL:
                annealed.append(annealed_primal(moments, x))
            else:
                annealed.append(annealed_dual(moments, x, spec.branch))
        except PortfolioError:
            annealed.append(None)
    return quenched, annealed


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Configuration average of the grid over ``spec.n_samples`` samples.

    Per-sample solver failures are counted in ``n_failed`` and recorded in
    ``failures``; they are never resampled.

    Raises
    ------
    InsufficientSamplesError
        If fewer than two samples succeed at some grid point.
    """
    start = time.perf_counter()
    indices = range(spec.n_samples)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(lambda c: _evaluate_sample(spec, c), indices))
    else:
        outputs = [_evaluate_sample(spec, c) for c in indices]

    stack = np.stack([v for v, _ in outputs])  # (C, G, 3)
    per_point = []
    for g, x in enumerate(spec.grid):
        ok = ~np.isnan(stack[:, g, 0])
        n_ok = int(ok.sum())
        failures = tuple(
            (c, errs[g]) for c, (_, errs) in enumerate(outputs) if errs[g] is not None
        )
        if n_ok < 2:
            raise InsufficientSamplesError(
                f"only {n_ok} of {spec.n_samples} samples succeeded at x={x!r}"
            )
        cols = stack[ok, g, :]
        mp, sp = _mean_se(cols[:, 0])
        mq, sq = _mean_se(cols[:, 1])
        ms, ss = _mean_se(cols[:, 2])
        per_point.append(
            PointStats(x, mp, sp, mq, sq, ms, ss, n_ok, spec.n_samples - n_ok, failures)
        )

    quenched, annealed = _theory(spec)
    provenance = {
        "master_seed": spec.params.master_seed,
        "params": spec.params.to_dict(),
        "n_samples": spec.n_samples,
        "wall_time": time.perf_counter() - start,
    }
    return SweepResult(spec.kind, spec.branch, per_point, quenched, annealed, provenance)


# --------------------------------------------------------------------------
# duality audit
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AuditRecord:
    R: float
    branch: Branch
    epsilon: float
    return_residual: float
    portfolio_residual: float


def duality_audit(sample: MarketSample, R_grid: Sequence[float]) -> list[AuditRecord]:
    """Check that the dual problem at ``eps(R)`` gives back ``R`` and the same portfolio.

    Targets at or above the vertex ``b/a`` use the maximize branch, targets
    below it the minimize branch.
    """
    proj = _projections(sample)
    _check_degenerate(proj.scalars)
    vertex = proj.scalars.vertex_return
    n = sample.n_assets
    out = []
    for R in R_grid:
        primal = _primal(proj, n, R)
        branch = Branch.MAXIMIZE if R >= vertex else Branch.MINIMIZE
        dual = _dual(proj, n, primal.epsilon, branch)
        out.append(
            AuditRecord(
                R=float(R),
                branch=branch,
                epsilon=primal.epsilon,
                return_residual=abs(dual.r_extremal - R),
                portfolio_residual=float(np.max(np.abs(dual.portfolio - primal.portfolio))),
            )
        )
    return out


# --------------------------------------------------------------------------
# reduced-space QP oracle
# --------------------------------------------------------------------------


def solve_dense(A, b) -> np.ndarray:
    """Gaussian elimination with partial pivoting; ``b`` may be 1-d or 2-d."""
    A = np.array(A, dtype=np.float64)
    x = np.array(b, dtype=np.float64)
    vector = x.ndim == 1
    if vector:
        x = x[:, None]
    n = A.shape[0]
    if A.shape != (n, n) or x.shape[0] != n:
        raise InvalidParameterError("solve_dense needs a square system")
    scale = np.max(np.abs(A)) if n else 0.0
    for col in range(n):
        piv = col + int(np.argmax(np.abs(A[col:, col])))
        if abs(A[piv, col]) <= 1e-14 * scale:
            raise IllConditionedEliminationError(f"zero pivot in column {col}")
        if piv != col:
            A[[col, piv]] = A[[piv, col]]
            x[[col, piv]] = x[[piv, col]]
        factors = A[col + 1:, col] / A[col, col]
        A[col + 1:, col:] -= np.outer(factors, A[col, col:])
        x[col + 1:] -= np.outer(factors, x[col])
    for col in range(n - 1, -1, -1):
        x[col] = (x[col] - A[col, col + 1:] @ x[col + 1:]) / A[col, col]
    return x[:, 0] if vector else x


def qp_oracle(sample: MarketSample, target_return: float) -> PrimalSolution:
    """Primal solution by eliminating the two equality constraints.

    The budget and return constraints are solved for the pivot pair with
    the smallest and largest mean return; the remaining ``N - 2``
    coordinates are free and the risk becomes an unconstrained
    positive-definite quadratic in them. Shares no code with
    :func:`~quenched_portfolio.solver.solve_primal` beyond matrix products.
    Meant for small ``N`` (up to about 50).
    """
    n = sample.n_assets
    if n < 3:
        raise InvalidParameterError("qp_oracle needs at least 3 assets")
    r = sample.means
    R = float(target_return)
    J = sample.x_scaled @ sample.x_scaled.T

    i, j = int(np.argmin(r)), int(np.argmax(r))
    det = r[j] - r[i]
    if i == j or abs(det) <= 1e-12 * max(abs(r[i]), abs(r[j]), 1e-300):
        raise IllConditionedEliminationError(
            "pivot block [[1, 1], [r_i, r_j]] is singular; mean vector is proportional to e"
        )
    pivots = [i, j]
    free = [t for t in range(n) if t not in pivots]

    # w_P = B^-1 (rhs - A_F w_F) with B = [[1, 1], [r_i, r_j]]
    B_inv = np.array([[r[j], -1.0], [-r[i], 1.0]]) / det
    A_free = np.vstack([np.ones(n - 2), r[free]])
    w0 = np.zeros(n)
    w0[pivots] = B_inv @ np.array([n, n * R])
    Z = np.zeros((n, n - 2))
    Z[free, np.arange(n - 2)] = 1.0
    Z[pivots, :] = -B_inv @ A_free

    H = Z.T @ J @ Z
    g = Z.T @ J @ w0
    w_free = solve_dense(H, -g)
    w = w0 + Z @ w_free

    eps = float(w @ J @ w) / (2 * n)
    # multipliers from stationarity J w = k e + theta r on the pivot rows
    Jw = J @ w
    k, theta = solve_dense(np.array([[1.0, r[i]], [1.0, r[j]]]), Jw[pivots])
    return PrimalSolution(
        target_return=R,
        epsilon=eps,
        portfolio=w,
        k=float(k),
        theta=float(theta),
        q_w=float(w @ w) / n,
        sharpe=R / math.sqrt(2 * eps),
    )


# --------------------------------------------------------------------------
# comparison with theory
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonEntry:
    x_value: float
    stat: str
    mean: float
    stderr: float
    theory: float | None
    z: float | None
    passed: bool | None  # None when no theory value exists at this point


@dataclass(frozen=True)
class ComparisonReport:
    entries: list
    pass_fraction: float
    verdict: bool

    def failed(self) -> list:
        return [e for e in self.entries if e.passed is False]


def _z(mean: float, se: float, theory: float) -> float:
    if se > 0:
        return (mean - theory) / se
    return 0.0 if mean == theory else math.copysign(math.inf, mean - theory)


def compare_with_theory(result: SweepResult) -> ComparisonReport:
    """z-scores of every statistic against the quenched prediction.

    An entry passes when ``|z| <= 3`` or its relative error is at most 2%;
    the verdict requires at least 90% of comparable entries to pass.
    """
    entries = []
    for pt, th in zip(result.per_point, result.theory_quenched):
        stats = [
            (result.primary_stat, pt.mean_primary, pt.se_primary,
             None if th is None else th.epsilon_or_return),
            ("q_w", pt.mean_qw, pt.se_qw, None if th is None else th.q_w),
            ("sharpe", pt.mean_sharpe, pt.se_sharpe, None if th is None else th.sharpe),
        ]
        for name, mean, se, theory in stats:
            if theory is None:
                entries.append(ComparisonEntry(pt.x_value, name, mean, se, None, None, None))
                continue
            z = _z(mean, se, theory)
            rel_ok = abs(mean - theory) <= REL_TOL * abs(theory)
            entries.append(
                ComparisonEntry(pt.x_value, name, mean, se, theory, z,
                                abs(z) <= Z_TOL or rel_ok)
            )
    judged = [e for e in entries if e.passed is not None]
    fraction = sum(e.passed for e in judged) / len(judged) if judged else 0.0
    return ComparisonReport(entries, fraction, bool(judged) and fraction >= PASS_FRACTION)
