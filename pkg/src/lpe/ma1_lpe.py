"""Block-wise MA(1) estimation aggregated over block durations."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .core import (BlockPartition, LocalEstimate, LpeResult, ObservationSeries,
                   av_aggregate, lpe_aggregate, partition_blocks)
from .ma1 import MIN_MLE_LENGTH, Ma1Params, correct_bias, ma1_asy_variance, ma1_mle

MIN_BC_LENGTH = 8  # smallest block the bias table covers


def merge_short_tail(part: BlockPartition, min_len: int) -> BlockPartition:
    """Fold a trailing block shorter than ``min_len`` into its predecessor."""
    if part.n_blocks < 2:
        return part
    a, b = part.boundaries[-1]
    if b - a >= min_len:
        return part
    prev = part.boundaries[-2]
    bounds = part.boundaries[:-2] + ((prev[0], b),)
    lengths = np.append(part.block_lengths[:-2], part.block_lengths[-2] + part.block_lengths[-1])
    return BlockPartition(part.h, bounds, lengths)


def lpe_ma1(series: ObservationSeries, h: int, bias_correct: bool = False,
            mu: Optional[float] = None, table=None) -> LpeResult:
    """LPE of ``(mu, beta, kappa)`` with block MLEs, optionally bias corrected.

    ``mu`` holds the mean fixed in every block. Local variances are the
    per-observation inverse Fisher information at each block estimate; a
    block with ``|beta|`` at the boundary leaves ``av_hat`` unset.
    """
    if h < 2:
        raise ValueError("block size must be at least 2")
    x = np.asarray(series.values, dtype=float)
    if x.ndim != 1:
        raise ValueError("MA(1) estimation needs scalar returns")
    min_len = MIN_BC_LENGTH if bias_correct else MIN_MLE_LENGTH
    if len(x) < min_len:
        raise ValueError(f"need at least {min_len} observations, got {len(x)}")
    part = merge_short_tail(partition_blocks(series, h), min_len)
    if part.boundaries[0][1] - part.boundaries[0][0] < min_len:
        raise ValueError(f"block size {h} is below the minimum of {min_len}")
    mean_known = mu is not None
    locs = []
    have_var = True
    for i, s in enumerate(part.slices()):
        block = x[s]
        est = ma1_mle(block, mu=mu)
        if bias_correct:
            est = correct_bias(est, len(block), mean_known=mean_known, table=table)
        var = None
        try:
            var = len(block) * ma1_asy_variance(est, len(block), mean_known=mean_known)
        except np.linalg.LinAlgError:
            have_var = False
        locs.append(LocalEstimate(est.as_array(), i, var))
    theta = lpe_aggregate(locs, part, series.horizon)
    av = av_aggregate(locs, part, series.horizon) if have_var else None
    return LpeResult(theta, part, locs, av_hat=av, horizon=series.horizon,
                     n_obs=len(series), names=("mu", "beta", "kappa"))


def global_ma1(series: ObservationSeries, mu: Optional[float] = None) -> Ma1Params:
    return ma1_mle(np.asarray(series.values, dtype=float), mu=mu)
