"""Exact finite-N solvers for the primal and dual mean-variance problems.

Primal: minimize ``(1/2N) w^T J w`` subject to ``sum(w) = N`` and
``r^T w = N R``. Dual: maximize (or minimize) ``r^T w / N`` subject to
``sum(w) = N`` and ``(1/2N) w^T J w = eps'``.

Both reduce to the three quadratic forms

    a = e^T J^-1 e / N,   b = r^T J^-1 e / N,   c = r^T J^-1 r / N,

computed from two Cholesky solves, and the discriminant ``D = a c - b^2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateMeanError, InfeasibleRiskError
from .market import MarketSample, WishartSolver

__all__ = [
    "Branch",
    "ProjectionScalars",
    "PrimalSolution",
    "DualSolution",
    "projection_scalars",
    "solve_primal",
    "solve_dual",
    "efficient_frontier",
]

DEGENERACY_RTOL = 1e-12
RADICAND_CLAMP = 1e-12


class Branch(str, enum.Enum):
    MAXIMIZE = "max"
    MINIMIZE = "min"


@dataclass(frozen=True)
class ProjectionScalars:
    a: float
    b: float
    c: float
    d_discriminant: float

    @property
    def vertex_return(self) -> float:
        """Expected return b/a of the budget-only minimum-variance portfolio."""
        return self.b / self.a

    @property
    def min_risk(self) -> float:
        """Smallest risk per asset attainable on the budget hyperplane, 1/(2a)."""
        return 0.5 / self.a

    @property
    def degenerate(self) -> bool:
        return self.d_discriminant <= DEGENERACY_RTOL * self.a * self.c


@dataclass(frozen=True, eq=False)
class PrimalSolution:
    target_return: float
    epsilon: float
    portfolio: np.ndarray
    k: float
    theta: float
    q_w: float
    sharpe: float


@dataclass(frozen=True, eq=False)
class DualSolution:
    """Extremal expected return at fixed risk.

    At the minimum-variance boundary (zero radicand) the multipliers ``k``
    and ``theta`` diverge and are reported as signed infinities; the
    portfolio stays finite because it only depends on ``k/theta`` and
    ``1/theta``.
    """

    target_risk: float
    r_extremal: float
    branch: Branch
    portfolio: np.ndarray
    k: float
    theta: float
    q_w: float
    sharpe: float


@dataclass(frozen=True)
class _Projections:
    scalars: ProjectionScalars
    jinv_e: np.ndarray
    jinv_r: np.ndarray


def _projections(sample: MarketSample) -> _Projections:
    n = sample.n_assets
    e = np.ones(n)
    r = sample.means
    ys = WishartSolver(sample).solve(np.column_stack([e, r]))
    jinv_e = ys[:, 0].copy()
    jinv_r = ys[:, 1].copy()
    a = float(e @ jinv_e) / n
    # b from the symmetric pair average keeps it independent of solve order
    b = 0.5 * (float(r @ jinv_e) + float(e @ jinv_r)) / n
    c = float(r @ jinv_r) / n
    return _Projections(ProjectionScalars(a, b, c, a * c - b * b), jinv_e, jinv_r)


def projection_scalars(sample: MarketSample) -> ProjectionScalars:
    """Quadratic forms a, b, c of the inverse Wishart matrix, and D = ac - b^2."""
    return _projections(sample).scalars


def _check_degenerate(s: ProjectionScalars):
    if s.degenerate:
        raise DegenerateMeanError(
            f"D={s.d_discriminant:.3e} <= {DEGENERACY_RTOL:g}*a*c; "
            "mean vector is proportional to the budget vector"
        )


def _primal(proj: _Projections, n: int, target_return: float) -> PrimalSolution:
    s = proj.scalars
    a, b, c, d = s.a, s.b, s.c, s.d_discriminant
    R = float(target_return)
    k = (c - b * R) / d
    theta = (a * R - b) / d
    w = k * proj.jinv_e + theta * proj.jinv_r
    eps = 0.5 / a * (1.0 + (R - b / a) ** 2 / (c / a - (b / a) ** 2))
    q_w = float(w @ w) / n
    return PrimalSolution(
        target_return=R,
        epsilon=eps,
        portfolio=w,
        k=k,
        theta=theta,
        q_w=q_w,
        sharpe=R / math.sqrt(2.0 * eps),
    )


def solve_primal(sample: MarketSample, target_return: float) -> PrimalSolution:
    """Minimal risk portfolio with budget and expected-return constraints.

    The multipliers solve the 2x2 system ``[[a, b], [b, c]] (k, theta) = (1, R)``
    and the optimal portfolio is ``w = k J^-1 e + theta J^-1 r``.

    Raises
    ------
    DegenerateMeanError
        If ``r`` is numerically proportional to ``e``.
    SingularWishartError
        If ``J`` is not positive definite.
    """
    proj = _projections(sample)
    _check_degenerate(proj.scalars)
    return _primal(proj, sample.n_assets, target_return)


def efficient_frontier(sample: MarketSample, grid: Sequence[float]) -> list[PrimalSolution]:
    """:func:`solve_primal` over a grid of target returns, factoring J once."""
    proj = _projections(sample)
    _check_degenerate(proj.scalars)
    return [_primal(proj, sample.n_assets, R) for R in grid]


def _dual(proj: _Projections, n: int, target_risk: float, branch: Branch) -> DualSolution:
    s = proj.scalars
    a, b, d = s.a, s.b, s.d_discriminant
    eps = float(target_risk)
    radicand = 2.0 * eps * a - 1.0
    if radicand < -RADICAND_CLAMP:
        raise InfeasibleRiskError(
            f"eps'={eps!r} is below the minimum-variance risk {s.min_risk!r}"
        )
    radicand = max(radicand, 0.0)
    sign = 1.0 if branch is Branch.MAXIMIZE else -1.0

    root = math.sqrt(radicand)
    sqrt_d = math.sqrt(d)
    r_ext = b / a + sign * (sqrt_d / a) * root

    # w = (k/theta) J^-1 e + (1/theta) J^-1 r, with 1/theta = sign*sqrt(rad/D)
    inv_theta = sign * root / sqrt_d
    k_over_theta = (1.0 - b * inv_theta) / a
    w = k_over_theta * proj.jinv_e + inv_theta * proj.jinv_r

    if root > 0.0:
        theta = sign * sqrt_d / root
        k = (theta - b) / a
    else:
        theta = sign * math.inf
        k = sign * math.inf
    return DualSolution(
        target_risk=eps,
        r_extremal=r_ext,
        branch=branch,
        portfolio=w,
        k=k,
        theta=theta,
        q_w=float(w @ w) / n,
        sharpe=r_ext / math.sqrt(2.0 * eps),
    )


def solve_dual(
    sample: MarketSample, target_risk: float, branch: Branch = Branch.MAXIMIZE
) -> DualSolution:
    """Extremal expected return per asset at fixed risk per asset.

    ``Branch.MAXIMIZE`` returns ``b/a + sqrt(D)/a * sqrt(2 eps' a - 1)``;
    ``Branch.MINIMIZE`` negates the square-root term. A radicand in
    ``[-1e-12, 0)`` is clamped to zero.

    Raises
    ------
    InfeasibleRiskError
        If ``eps'`` lies below the minimum-variance risk ``1/(2a)``.
    DegenerateMeanError
        If ``r`` is numerically proportional to ``e``.
    """
    proj = _projections(sample)
    _check_degenerate(proj.scalars)
    return _dual(proj, sample.n_assets, target_risk, Branch(branch))


def dual_frontier(
    sample: MarketSample, grid: Sequence[float], branch: Branch = Branch.MAXIMIZE
) -> list[DualSolution | Exception]:
    """:func:`solve_dual` over a grid of risk levels, factoring J once.

    Infeasible grid points are returned as their exception instead of
    aborting the whole grid.
    """
    proj = _projections(sample)
    _check_degenerate(proj.scalars)
    out: list[DualSolution | Exception] = []
    for eps in grid:
        try:
            out.append(_dual(proj, sample.n_assets, eps, Branch(branch)))
        except InfeasibleRiskError as exc:
            out.append(exc)
    return out
