"""Random-market ensemble and reproducible disorder realizations.

A market is described by an ``N x p`` matrix of modified return rates
``x_{i mu}`` (mean 0, variance ``return_variance``) and a vector of mean
returns ``r_i`` (mean ``mean_of_means``, variance ``variance_of_means``).
Samples store the scaled matrix ``X = x / sqrt(N)`` so that the Wishart
matrix is simply ``J = X X^T``.

Each sample draws from its own generator seeded by
``SeedSequence(master_seed, spawn_key=(sample_index,))``, so sample ``c``
never depends on how many samples were drawn before it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import linalg

from .errors import InvalidParameterError, SingularWishartError

__all__ = [
    "Distribution",
    "MarketParams",
    "MarketSample",
    "WishartSolver",
    "sample_market",
    "sample_rng",
    "wishart_apply_inverse",
]

_SQRT3 = np.sqrt(3.0)


class Distribution(str, enum.Enum):
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"  # uniform with matched mean and variance


@dataclass(frozen=True)
class MarketParams:
    """Generative description of the random-market ensemble.

    Parameters
    ----------
    n_assets : int
        Number of assets ``N``.
    n_scenarios : int
        Number of return scenarios ``p``; must exceed ``n_assets``.
    return_variance : float
        Variance of the modified return rates ``x_{i mu}``.
    mean_of_means, variance_of_means : float
        Mean and variance of the per-asset mean returns ``r_i``.
    return_dist, mean_dist : Distribution
        Shape of the two distributions. Only their first two moments
        enter the large-N theory.
    master_seed : int
        Unsigned 64-bit seed from which every sample stream is derived.
    """

    n_assets: int
    n_scenarios: int
    return_variance: float = 1.0
    mean_of_means: float = 1.0
    variance_of_means: float = 1.0
    return_dist: Distribution = Distribution.GAUSSIAN
    mean_dist: Distribution = Distribution.GAUSSIAN
    master_seed: int = 0

    def __post_init__(self):
        if int(self.n_assets) != self.n_assets or self.n_assets < 1:
            raise InvalidParameterError("n_assets must be a positive integer")
        if int(self.n_scenarios) != self.n_scenarios or self.n_scenarios < 1:
            raise InvalidParameterError("n_scenarios must be a positive integer")
        if self.n_scenarios <= self.n_assets:
            raise InvalidParameterError("n_scenarios must exceed n_assets")
        if not self.return_variance > 0:
            raise InvalidParameterError("return_variance must be positive")
        if not self.variance_of_means > 0:
            raise InvalidParameterError("variance_of_means must be positive")
        if not np.isfinite(self.mean_of_means):
            raise InvalidParameterError("mean_of_means must be finite")
        if not 0 <= self.master_seed < 2**64:
            raise InvalidParameterError("master_seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "return_dist", Distribution(self.return_dist))
        object.__setattr__(self, "mean_dist", Distribution(self.mean_dist))

    @property
    def alpha(self) -> float:
        """Scenario ratio p / N."""
        return self.n_scenarios / self.n_assets

    def to_dict(self) -> dict:
        return {
            "n_assets": self.n_assets,
            "n_scenarios": self.n_scenarios,
            "return_variance": self.return_variance,
            "mean_of_means": self.mean_of_means,
            "variance_of_means": self.variance_of_means,
            "return_dist": self.return_dist.value,
            "mean_dist": self.mean_dist.value,
            "master_seed": self.master_seed,
        }


@dataclass(frozen=True, eq=False)
class MarketSample:
    """One disorder realization: scaled return matrix and mean vector."""

    x_scaled: np.ndarray
    means: np.ndarray
    sample_index: int = 0
    _wishart: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = np.array(self.x_scaled, dtype=np.float64)
        r = np.array(self.means, dtype=np.float64)
        if x.ndim != 2:
            raise InvalidParameterError("x_scaled must be a 2-d array")
        if r.shape != (x.shape[0],):
            raise InvalidParameterError(
                f"means has shape {r.shape}, expected ({x.shape[0]},)"
            )
        x.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "x_scaled", x)
        object.__setattr__(self, "means", r)
        j = x @ x.T
        j.setflags(write=False)
        object.__setattr__(self, "_wishart", j)

    @property
    def n_assets(self) -> int:
        return self.x_scaled.shape[0]

    @property
    def n_scenarios(self) -> int:
        return self.x_scaled.shape[1]

    @property
    def wishart(self) -> np.ndarray:
        """The Wishart matrix J = X X^T (read-only)."""
        return self._wishart


def _draw(rng: np.random.Generator, dist: Distribution, mean: float, var: float, size):
    sd = np.sqrt(var)
    if dist is Distribution.GAUSSIAN:
        return rng.normal(mean, sd, size=size)
    half_width = _SQRT3 * sd
    return rng.uniform(mean - half_width, mean + half_width, size=size)


def sample_rng(master_seed: int, sample_index: int) -> np.random.Generator:
    """Generator for sample ``sample_index``; independent of every other index."""
    if sample_index < 0:
        raise InvalidParameterError("sample_index must be non-negative")
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(sample_index,))
    return np.random.Generator(np.random.PCG64(seq))


def sample_market(params: MarketParams, sample_index: int) -> MarketSample:
    """Draw disorder realization ``sample_index`` of the ensemble."""
    if params.n_scenarios <= params.n_assets:
        raise InvalidParameterError("n_scenarios must exceed n_assets")
    rng = sample_rng(params.master_seed, sample_index)
    n, p = params.n_assets, params.n_scenarios
    x = _draw(rng, params.return_dist, 0.0, params.return_variance, (n, p))
    r = _draw(rng, params.mean_dist, params.mean_of_means, params.variance_of_means, n)
    return MarketSample(x / np.sqrt(n), r, sample_index)


class WishartSolver:
    """Cholesky factorization of ``J = X X^T`` reused across right-hand sides.

    The explicit inverse is never formed. A pivot that is non-positive,
    or below ``n * machine_eps`` of the largest diagonal entry, raises
    :class:`SingularWishartError`; nothing is regularized.
    """

    def __init__(self, sample: MarketSample):
        j = sample.wishart
        try:
            self._factor = linalg.cho_factor(j, lower=True, check_finite=True)
        except linalg.LinAlgError as exc:
            raise SingularWishartError(str(exc)) from None
        pivots = np.diag(self._factor[0]) ** 2
        floor = j.shape[0] * np.finfo(np.float64).eps * np.max(np.diag(j))
        if np.min(pivots) <= floor:
            raise SingularWishartError(
                f"pivot {np.min(pivots):.3e} below threshold {floor:.3e}"
            )

    def solve(self, v) -> np.ndarray:
        return linalg.cho_solve(self._factor, np.asarray(v, dtype=np.float64))


def wishart_apply_inverse(sample: MarketSample, vectors: Sequence) -> list[np.ndarray]:
    """Solve ``J y = v`` for each ``v`` with one shared factorization."""
    vs = [np.asarray(v, dtype=np.float64) for v in vectors]
    for v in vs:
        if v.shape != (sample.n_assets,):
            raise InvalidParameterError(
                f"vector of shape {v.shape} does not match N={sample.n_assets}"
            )
    if not vs:
        return []
    solver = WishartSolver(sample)
    ys = solver.solve(np.column_stack(vs))
    return [ys[:, i].copy() for i in range(len(vs))]
