"""Block partitioning and aggregation of local parametric estimates.

The local parametric estimator cuts the sample into consecutive blocks of
``h`` observations, fits a parametric model on each block and averages the
block estimates with weights proportional to the block durations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .chisq import chisq_survival

__all__ = [
    "ObservationSeries",
    "BlockPartition",
    "LocalEstimate",
    "LpeResult",
    "default_block_size",
    "partition_blocks",
    "lpe_aggregate",
    "av_aggregate",
    "constancy_chisq",
    "ChiSquareResult",
]


@dataclass(frozen=True)
class ObservationSeries:
    """Observed returns with their time increments.

    ``values`` has shape ``(N,)`` for scalar returns or ``(N, d)`` for
    vector returns; ``dts[i]`` is the time elapsed between observation
    ``i - 1`` and observation ``i``.
    """

    values: np.ndarray
    dts: np.ndarray
    horizon: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        dts = np.asarray(self.dts, dtype=float)
        if values.ndim not in (1, 2):
            raise ValueError("values must be 1-d or 2-d")
        if dts.ndim != 1 or len(dts) != len(values):
            raise ValueError(
                f"values and dts lengths differ ({len(values)} vs {len(dts)})"
            )
        if len(dts) == 0:
            raise ValueError("empty observation series")
        if not np.all(dts > 0):
            raise ValueError("time increments must be positive")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if math.fsum(dts) > self.horizon * (1 + 1e-9):
            raise ValueError("sum of time increments exceeds the horizon")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dts", dts)
        object.__setattr__(self, "horizon", float(self.horizon))

    def __len__(self):
        return len(self.dts)

    @property
    def times(self) -> np.ndarray:
        return np.cumsum(self.dts)

    @classmethod
    def regular(cls, values, horizon: float) -> "ObservationSeries":
        n = len(values)
        return cls(values, np.full(n, horizon / n), horizon)


@dataclass(frozen=True)
class BlockPartition:
    h: int
    boundaries: tuple  # (start, stop) half-open index ranges
    block_lengths: np.ndarray

    @property
    def n_blocks(self) -> int:
        return len(self.boundaries)

    def slices(self):
        return [slice(a, b) for a, b in self.boundaries]


@dataclass
class LocalEstimate:
    """Parameter estimate on one block.

    ``variance`` is the per-observation asymptotic variance of the block
    estimator, i.e. the variance of ``sqrt(len(block)) * (theta - truth)``.
    """

    theta: np.ndarray
    block_index: int
    variance: Optional[np.ndarray] = None

    def __post_init__(self):
        self.theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        if self.variance is not None:
            v = np.asarray(self.variance, dtype=float)
            p = len(self.theta)
            self.variance = v.reshape(p, p)


@dataclass
class LpeResult:
    theta_hat: np.ndarray
    partition: BlockPartition
    locals: list = field(default_factory=list)
    av_hat: Optional[np.ndarray] = None
    horizon: float = 1.0
    n_obs: int = 0
    names: tuple = ()

    def standard_errors(self) -> Optional[np.ndarray]:
        """Standard errors of ``theta_hat`` from the asymptotic variance.

        ``av_hat`` approximates ``T^-2 int_0^T V_s ds`` while the estimator
        variance is ``T^-1 int_0^T V_s ds / N``.
        """
        if self.av_hat is None:
            return None
        return np.sqrt(np.diag(self.av_hat) * self.horizon / self.n_obs)


def default_block_size(n: int) -> int:
    """Block size ``floor(n ** 0.4999)``, never below 2."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    return max(2, int(math.floor(n ** 0.4999)))


def partition_blocks(series: ObservationSeries, h: int) -> BlockPartition:
    if h < 1:
        raise ValueError("block size must be at least 1")
    n = len(series)
    if n == 0:
        raise ValueError("empty observation series")
    starts = range(0, n, h)
    bounds = tuple((a, min(a + h, n)) for a in starts)
    lengths = np.array([math.fsum(series.dts[a:b]) for a, b in bounds])
    return BlockPartition(h=h, boundaries=bounds, block_lengths=lengths)


def _check_locals(locals: Sequence[LocalEstimate], partition: BlockPartition):
    if len(locals) != partition.n_blocks:
        raise ValueError(
            f"{len(locals)} local estimates for {partition.n_blocks} blocks"
        )


def lpe_aggregate(locals: Sequence[LocalEstimate], partition: BlockPartition,
                  T: float) -> np.ndarray:
    """Duration-weighted sum ``T^-1 sum_i theta_i * dT_i``."""
    _check_locals(locals, partition)
    thetas = np.stack([loc.theta for loc in locals])
    w = partition.block_lengths
    # fsum per component keeps the regular-sampling reduction exact to rounding
    return np.array([math.fsum(thetas[:, k] * w) for k in range(thetas.shape[1])]) / T


def av_aggregate(locals: Sequence[LocalEstimate], partition: BlockPartition,
                 T: float) -> np.ndarray:
    """Asymptotic variance ``T^-2 sum_i V_i * dT_i``."""
    _check_locals(locals, partition)
    missing = [loc.block_index for loc in locals if loc.variance is None]
    if missing:
        raise ValueError(f"blocks without a variance estimate: {missing}")
    acc = sum(loc.variance * w for loc, w in zip(locals, partition.block_lengths))
    acc = acc / T ** 2
    return 0.5 * (acc + acc.T)


@dataclass(frozen=True)
class ChiSquareResult:
    stat: float
    df: int
    pvalue: float


def constancy_chisq(locals: Sequence[float], global_estimate: float,
                    sd: float) -> ChiSquareResult:
    """Chi-square test that a scalar parameter is constant across blocks.

    ``locals`` must already exclude the final (possibly short) block.
    """
    if not sd > 0:
        raise ValueError("sd must be positive")
    locals = np.asarray(locals, dtype=float)
    if len(locals) < 2:
        raise ValueError("need at least two block estimates")
    z = (locals - global_estimate) / sd
    stat = float(np.sum(z * z))
    df = len(locals)
    return ChiSquareResult(stat, df, chisq_survival(stat, df))
