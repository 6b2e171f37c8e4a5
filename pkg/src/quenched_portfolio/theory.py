"""Large-N closed forms for the quenched and annealed ensembles.

Quenched values average the per-sample optimum over disorder; annealed
("OR") values optimize the disorder-averaged objective. Only the
zero-temperature endpoints are provided. With ``kappa = sd2 (alpha - 1)``
the quenched curves are

    eps(R)   = kappa/2 * (1 + (R - m)^2 / sigma2)
    q_w(R)   = alpha/(alpha - 1) * (1 + (R - m)^2 / sigma2)
    R'(eps') = m +/- sigma * sqrt(2 eps' / kappa - 1)

and the annealed ones replace ``alpha - 1`` by ``alpha`` in the risk scale,
with ``q_w^OR = 1 + (R - m)^2 / sigma2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import InfeasibleRiskError, InvalidParameterError
from .solver import Branch

__all__ = [
    "Regime",
    "EnsembleMoments",
    "TheoryPoint",
    "SharpeOptimum",
    "quenched_primal",
    "quenched_dual",
    "max_sharpe",
    "annealed_primal",
    "annealed_dual",
]


class Regime(str, enum.Enum):
    QUENCHED = "quenched"
    ANNEALED = "annealed"


@dataclass(frozen=True)
class EnsembleMoments:
    alpha: float
    return_variance: float = 1.0
    mean_of_means: float = 1.0
    variance_of_means: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidParameterError("invalid scenario ratio: alpha must be positive")
        if not self.return_variance > 0:
            raise InvalidParameterError("return_variance must be positive")
        if not self.variance_of_means > 0:
            raise InvalidParameterError("variance_of_means must be positive")

    @classmethod
    def from_params(cls, params) -> "EnsembleMoments":
        return cls(
            alpha=params.alpha,
            return_variance=params.return_variance,
            mean_of_means=params.mean_of_means,
            variance_of_means=params.variance_of_means,
        )


@dataclass(frozen=True)
class TheoryPoint:
    x_value: float
    epsilon_or_return: float
    q_w: float
    sharpe: float
    regime: Regime


@dataclass(frozen=True)
class SharpeOptimum:
    s_max: float
    r_star: float
    eps_star: float


def _require_quenched(moments: EnsembleMoments):
    if moments.alpha <= 1:
        raise InvalidParameterError(
            f"invalid scenario ratio: alpha={moments.alpha!r} must exceed 1"
        )


def _excess(moments: EnsembleMoments, R: float) -> float:
    return 1.0 + (R - moments.mean_of_means) ** 2 / moments.variance_of_means


def quenched_primal(moments: EnsembleMoments, R: float) -> TheoryPoint:
    _require_quenched(moments)
    a = moments.alpha
    g = _excess(moments, R)
    eps = 0.5 * moments.return_variance * (a - 1.0) * g
    return TheoryPoint(R, eps, a / (a - 1.0) * g, R / math.sqrt(2.0 * eps), Regime.QUENCHED)


def _dual_radicand(eps_prime: float, scale: float) -> float:
    rad = 2.0 * eps_prime / scale - 1.0
    if rad < 0:
        raise InfeasibleRiskError(
            f"eps'={eps_prime!r} is below the asymptotic minimum {scale / 2!r}"
        )
    return rad


def quenched_dual(
    moments: EnsembleMoments, eps_prime: float, branch: Branch = Branch.MAXIMIZE
) -> TheoryPoint:
    _require_quenched(moments)
    a = moments.alpha
    kappa = moments.return_variance * (a - 1.0)
    rad = _dual_radicand(eps_prime, kappa)
    sign = 1.0 if Branch(branch) is Branch.MAXIMIZE else -1.0
    r_ext = moments.mean_of_means + sign * math.sqrt(moments.variance_of_means * rad)
    q_w = a / (a - 1.0) * (2.0 * eps_prime / kappa)
    return TheoryPoint(
        eps_prime, r_ext, q_w, r_ext / math.sqrt(2.0 * eps_prime), Regime.QUENCHED
    )


def max_sharpe(moments: EnsembleMoments) -> SharpeOptimum:
    """Tangency point of the quenched frontier: where R / sqrt(2 eps) peaks."""
    _require_quenched(moments)
    m = moments.mean_of_means
    if m == 0:
        raise InvalidParameterError("undefined tangency: mean_of_means is zero")
    s2 = moments.variance_of_means
    kappa = moments.return_variance * (moments.alpha - 1.0)
    return SharpeOptimum(
        s_max=math.sqrt((m * m + s2) / kappa),
        r_star=m + s2 / m,
        eps_star=0.5 * kappa * (1.0 + s2 / (m * m)),
    )


def annealed_primal(moments: EnsembleMoments, R: float) -> TheoryPoint:
    g = _excess(moments, R)
    eps = 0.5 * moments.return_variance * moments.alpha * g
    return TheoryPoint(R, eps, g, R / math.sqrt(2.0 * eps), Regime.ANNEALED)


def annealed_dual(
    moments: EnsembleMoments, eps_prime: float, branch: Branch = Branch.MAXIMIZE
) -> TheoryPoint:
    """Annealed extremal return; the minimize branch mirrors the square-root term."""
    scale = moments.return_variance * moments.alpha
    rad = _dual_radicand(eps_prime, scale)
    sign = 1.0 if Branch(branch) is Branch.MAXIMIZE else -1.0
    r_ext = moments.mean_of_means + sign * math.sqrt(moments.variance_of_means * rad)
    return TheoryPoint(
        eps_prime, r_ext, 2.0 * eps_prime / scale, r_ext / math.sqrt(2.0 * eps_prime),
        Regime.ANNEALED,
    )
