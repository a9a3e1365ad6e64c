"""Toy block estimators whose local parametric estimate equals the global one."""

import math

import numpy as np

from .core import LocalEstimate, LpeResult, ObservationSeries, lpe_aggregate, partition_blocks


def scaled_rv(returns, k: int, n: int, T: float) -> float:
    """Realized variance of ``k`` returns rescaled to a spot variance: ``n / (T k) * sum r^2``."""
    r = np.asarray(returns, dtype=float)
    if len(r) == 0:
        raise ValueError("empty input")
    if len(r) != k:
        raise ValueError(f"expected {k} returns, got {len(r)}")
    return n / (T * k) * math.fsum(r * r)


def poisson_mean(counts) -> float:
    c = np.asarray(counts, dtype=float)
    if len(c) == 0:
        raise ValueError("empty input")
    if np.any(c < 0):
        raise ValueError("counts must be nonnegative")
    return math.fsum(c) / len(c)


def lpe_scaled_rv(series: ObservationSeries, h: int) -> LpeResult:
    """Block-wise spot variance ``sum r^2 / dT_i`` aggregated by duration.

    On a regular grid each block value is :func:`scaled_rv` of the block.
    """
    part = partition_blocks(series, h)
    r = series.values.reshape(len(series), -1)[:, 0]
    locs = [
        LocalEstimate([math.fsum(r[s] ** 2) / w], i)
        for i, (s, w) in enumerate(zip(part.slices(), part.block_lengths))
    ]
    theta = lpe_aggregate(locs, part, series.horizon)
    return LpeResult(theta, part, locs, horizon=series.horizon, n_obs=len(series),
                     names=("sigma2",))


def lpe_poisson(series: ObservationSeries, h: int, alpha: float = None) -> LpeResult:
    """Block means of counts, converted to a rate by ``alpha * dt``.

    With the default ``alpha = 1 / dt`` (one expected unit per interval at
    unit rate) the block estimate is the plain mean count.
    """
    part = partition_blocks(series, h)
    c = series.values.reshape(len(series), -1)[:, 0]
    locs = []
    for i, s in enumerate(part.slices()):
        scale = 1.0 if alpha is None else alpha * float(np.mean(series.dts[s]))
        locs.append(LocalEstimate([poisson_mean(c[s]) / scale], i))
    theta = lpe_aggregate(locs, part, series.horizon)
    return LpeResult(theta, part, locs, horizon=series.horizon, n_obs=len(series),
                     names=("rate",))
