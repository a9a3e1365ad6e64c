"""Estimators for the model with uncertainty zones.

A price change is a continuation when it moves in the same direction as
the previous change and an alternation otherwise. With friction ``eta``
and jump size ``k`` the continuation probability is
``(2 eta + k - 1) / (2 eta + 2k - 1)``, so ``k (N_c / N_a - 1) + 1``
estimates ``2 eta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .core import (ChiSquareResult, LocalEstimate, LpeResult, constancy_chisq,
                   lpe_aggregate, partition_blocks)
from .simulate import TickSeries

ENUMERATION_LIMIT = 10_000
MC_DRAWS = 100_000


@dataclass(frozen=True)
class AltContCounts:
    """Alternation and continuation counts per jump size ``k = 1..m``."""

    n_alt: np.ndarray
    n_cont: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.n_alt, dtype=np.int64)
        c = np.asarray(self.n_cont, dtype=np.int64)
        if a.shape != c.shape or a.ndim != 1:
            raise ValueError("n_alt and n_cont must be 1-d of equal length")
        if np.any(a < 0) or np.any(c < 0):
            raise ValueError("counts must be nonnegative")
        object.__setattr__(self, "n_alt", a)
        object.__setattr__(self, "n_cont", c)

    @property
    def m(self) -> int:
        return len(self.n_alt)

    @property
    def totals(self) -> np.ndarray:
        return self.n_alt + self.n_cont

    @property
    def total(self) -> int:
        return int(self.totals.sum())

    def weights(self) -> np.ndarray:
        tot = self.totals
        return tot / tot.sum()

    @property
    def per_size(self) -> dict:
        return {k + 1: (int(a), int(c)) for k, (a, c) in enumerate(zip(self.n_alt, self.n_cont))}


def _classify(directions, jumps, m=None):
    d = np.asarray(directions)
    L = np.asarray(jumps)
    if len(d) < 2:
        raise ValueError("need at least two price changes")
    cont = d[1:] == d[:-1]
    size = L[1:]
    m = int(L.max()) if m is None else m
    n_cont = np.bincount(size[cont] - 1, minlength=m)[:m]
    n_alt = np.bincount(size[~cont] - 1, minlength=m)[:m]
    return AltContCounts(n_alt, n_cont)


def count_alt_cont(ticks: TickSeries, m: int = None) -> AltContCounts:
    """Tally each change from the second on under its own jump size."""
    return _classify(ticks.directions, ticks.jump_ticks, m)


def _u(k, n_alt, n_cont):
    if n_alt == 0:
        return 1.0
    return max(0.0, min(1.0, 0.5 * (k * (n_cont / n_alt - 1.0) + 1.0)))


def eta_hat(counts: AltContCounts) -> float:
    tot = counts.totals
    if tot.sum() == 0:
        raise ValueError("no alternations or continuations to estimate from")
    lam = counts.weights()
    return float(sum(lam[k] * _u(k + 1, counts.n_alt[k], counts.n_cont[k])
                     for k in range(counts.m) if tot[k] > 0))


def corrected_rv(ticks: TickSeries, eta: float, tick: float = None,
                 start: int = 1, stop: int = None) -> float:
    """Realized variance of de-rounded prices ``Z - tick (1/2 - eta) d``.

    Sums the increments ending at price changes ``start .. stop`` (changes
    are numbered from 1, the first has no increment); the default covers
    the whole series.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    tick = ticks.tick if tick is None else tick
    if ticks.n_changes < 2:
        raise ValueError("need at least two price changes")
    stop = ticks.n_changes if stop is None else stop
    start = max(start, 2)
    d = ticks.directions.astype(float)
    # in tick units: x_i = z_i - (1/2 - eta) d_i for change i = 1..N
    x = ticks.ticks[1:] - (0.5 - eta) * d
    inc = np.diff(x)[start - 2:stop - 1]
    return tick * tick * math.fsum(inc * inc)


def realized_variance(ticks: TickSeries) -> float:
    """Plain realized variance of observed prices over the same increments."""
    return corrected_rv(ticks, 0.5)


# ---------------------------------------------------------------------------
# finite-sample distribution of eta_hat


@dataclass(frozen=True)
class FrictionBiasSd:
    bias: float
    sd: float
    method: str
    mc_se: float = 0.0


def continuation_prob(eta: float, k: int) -> float:
    return (2.0 * eta + k - 1.0) / (2.0 * eta + 2.0 * k - 1.0)


def _c_values(k, n, b):
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(n - b > 0, b / (n - b), np.inf)
        c = 0.5 * (k * (ratio - 1.0) + 1.0)
    c = np.where(np.isinf(ratio), 1.0, c)
    return np.clip(c, 0.0, 1.0)


def _moments_exact(k, n, p):
    b = np.arange(n + 1)
    w = stats.binom.pmf(b, n, p)
    c = _c_values(k, n, b)
    mean = float(np.dot(w, c))
    return mean, float(np.dot(w, (c - mean) ** 2))


def _moments_mc(k, n, p, rng, draws):
    c = _c_values(k, n, rng.binomial(n, p, size=draws))
    return float(c.mean()), float(c.var(ddof=1))


def eta_bias_sd(eta: float, counts: AltContCounts, method: str = "auto",
                seed: int = 0, draws: int = MC_DRAWS) -> FrictionBiasSd:
    """Bias ``E[eta_hat] - eta`` and standard deviation of ``eta_hat`` when the
    number of continuations of size ``k`` is binomial given the size totals.

    ``method`` is ``"exact"`` (sum over the binomial support), ``"mc"`` or
    ``"auto"`` (exact up to :data:`ENUMERATION_LIMIT` trials per size).
    """
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    if method not in ("auto", "exact", "mc"):
        raise ValueError(f"unknown method {method!r}")
    tot = counts.totals
    if tot.sum() == 0:
        raise ValueError("empty counts")
    lam = counts.weights()
    rng = np.random.default_rng(seed)
    mean = 0.0
    var = 0.0
    se2 = 0.0
    used = set()
    for k in range(1, counts.m + 1):
        n = int(tot[k - 1])
        if n == 0:
            continue
        p = continuation_prob(eta, k)
        exact = method == "exact" or (method == "auto" and n <= ENUMERATION_LIMIT)
        if exact:
            mk, vk = _moments_exact(k, n, p)
            used.add("exact")
        else:
            mk, vk = _moments_mc(k, n, p, rng, draws)
            se2 += lam[k - 1] ** 2 * vk / draws
            used.add("mc")
        mean += lam[k - 1] * mk
        var += lam[k - 1] ** 2 * vk
    label = used.pop() if len(used) == 1 else "mixed"
    return FrictionBiasSd(mean - eta, math.sqrt(var), label, math.sqrt(se2))


# ---------------------------------------------------------------------------
# block estimation


def _block_counts(ticks: TickSeries, a: int, b: int, m: int) -> AltContCounts:
    """Counts for changes ``a+1 .. b`` (1-based), each paired with its predecessor."""
    d = ticks.directions
    L = ticks.jump_ticks
    lo = max(a - 1, 0)
    return _classify(d[lo:b], L[lo:b], m)


def uz_lpe(ticks: TickSeries, tick: float, h: int, T: float = None) -> LpeResult:
    """Block estimates of ``(sigma^2, eta)`` aggregated over block durations.

    Each block holds ``h`` price changes; its friction estimate de-rounds
    the block prices and the corrected realized variance over the block
    duration gives the spot variance.
    """
    if h < 2:
        raise ValueError("block size must be at least 2")
    if ticks.n_changes < 2 * h:
        raise ValueError(f"need at least {2 * h} price changes, got {ticks.n_changes}")
    T = ticks.times[-1] if T is None else T
    obs = ticks.to_observations(T)
    part = partition_blocks(obs, h)
    m = int(ticks.jump_ticks.max())
    locs = []
    for i, ((a, b), dT) in enumerate(zip(part.boundaries, part.block_lengths)):
        counts = _block_counts(ticks, a, b, m)
        eta_i = eta_hat(counts) if counts.total > 0 else 0.5
        # changes are 1-based: block covers changes a+1..b
        rv = corrected_rv(ticks, eta_i, tick, start=a + 1, stop=b)
        locs.append(LocalEstimate([rv / dT, eta_i], i))
    theta = lpe_aggregate(locs, part, T)
    return LpeResult(theta, part, locs, horizon=T, n_obs=ticks.n_changes,
                     names=("sigma2", "eta"))


def uz_constancy_test(ticks: TickSeries, h: int, result: LpeResult = None) -> ChiSquareResult:
    """Chi-square test of a constant friction parameter.

    Block friction estimates (last block dropped) are compared with the
    whole-sample estimate, scaled by the standard deviation of a block of
    ``h`` changes at the whole-sample estimate.
    """
    res = uz_lpe(ticks, ticks.tick, h) if result is None else result
    counts = count_alt_cont(ticks)
    eta_g = eta_hat(counts)
    # split h across sizes in the global proportions, then let the binomials act
    block_counts = np.round(h * counts.weights()).astype(np.int64)
    sd = eta_bias_sd(min(max(eta_g, 1e-6), 1 - 1e-6),
                     AltContCounts(np.zeros_like(block_counts), block_counts)).sd
    etas = [loc.theta[1] for loc in res.locals[:-1]]
    return constancy_chisq(etas, eta_g, sd)
