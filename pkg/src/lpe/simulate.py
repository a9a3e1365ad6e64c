"""Data-generating processes: time-varying MA(1), noisy diffusion,
uncertainty zones and Poisson counts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numba as nb
import numpy as np
from scipy.integrate import cumulative_trapezoid

from .core import ObservationSeries
from .paths import ParamPath, ParamPathSpec, path_values

__all__ = [
    "Ma1SimSpec",
    "NoisyDiffusionSpec",
    "UzSimSpec",
    "TickSeries",
    "simulate_tv_ma1",
    "simulate_tv_ma1_with_path",
    "simulate_noisy_diffusion",
    "simulate_uncertainty_zones",
    "simulate_poisson_counts",
    "simulate_diffusion_returns",
]


def _streams(seed, k: int):
    """``k`` independent generators derived from one seed."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in ss.spawn(k)]


def _interval_integrals(spec: ParamPathSpec, n: int, T: float, rng, substeps: int):
    """Integral of a scalar path over each of ``n`` regular intervals
    (trapezoid on ``substeps`` sub-intervals) and its values at the interval ends."""
    grid = np.linspace(0.0, T, n * substeps + 1)
    vals = path_values(spec, grid, T, rng)[:, 0]
    cum = cumulative_trapezoid(vals, grid, initial=0.0)
    return np.diff(cum[::substeps]), vals[::substeps]


# ---------------------------------------------------------------------------
# MA(1)


@dataclass(frozen=True)
class Ma1SimSpec:
    n: int
    T: float
    path: ParamPathSpec  # over (mu, beta, kappa)
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or not self.T > 0:
            raise ValueError("n must be >= 1 and T > 0")
        if self.path.dim != 3:
            raise ValueError("MA(1) path must have dimension 3 (mu, beta, kappa)")


def simulate_tv_ma1_with_path(spec: Ma1SimSpec):
    """Like :func:`simulate_tv_ma1`, also returning the parameter path on the
    closed grid ``0, T/n, ..., T`` (for computing the integrated parameter)."""
    n, T = spec.n, spec.T
    path_rng, noise_rng = _streams(spec.seed, 2)
    grid = np.linspace(0.0, T, n + 1)
    theta = path_values(spec.path, grid, T, path_rng)
    mu, beta, kappa = theta[:-1, 0], theta[:-1, 1], theta[:-1, 2]
    if np.any(kappa <= 0):
        raise ValueError("kappa must stay positive along the path")
    if np.any(np.abs(beta) >= 1):
        raise ValueError("|beta| must stay below 1 along the path")
    lam = noise_rng.standard_normal(n + 1)
    sk = np.sqrt(kappa)
    values = mu + sk * lam[1:] + beta * sk * lam[:-1]
    return ObservationSeries(values, np.full(n, T / n), T), ParamPath(grid, theta, spec.path)


def simulate_tv_ma1(spec: Ma1SimSpec) -> ObservationSeries:
    """``R_i = mu + sqrt(kappa) lam_i + beta sqrt(kappa) lam_{i-1}`` with the
    parameter read at the previous observation time ``(i - 1) T / n``."""
    return simulate_tv_ma1_with_path(spec)[0]


# ---------------------------------------------------------------------------
# noisy diffusion


@dataclass(frozen=True)
class NoisyDiffusionSpec:
    n: int
    T: float
    vol_path: ParamPathSpec    # sigma_t^2
    noise_path: ParamPathSpec  # v_t
    seed: int = 0
    substeps: int = 10

    def __post_init__(self):
        if self.n < 1 or not self.T > 0:
            raise ValueError("n must be >= 1 and T > 0")


def simulate_noisy_diffusion(spec: NoisyDiffusionSpec) -> ObservationSeries:
    """Returns ``dX + eps_i - eps_{i-1}`` with ``eps = n^-1/2 v^1/2 gamma``."""
    n, T = spec.n, spec.T
    vol_rng, noise_path_rng, w_rng, g_rng = _streams(spec.seed, 4)
    iv, s2_ends = _interval_integrals(spec.vol_path, n, T, vol_rng, spec.substeps)
    if np.any(s2_ends < 0) or np.any(iv < 0):
        raise ValueError("sigma^2 must be nonnegative along the path")
    v = path_values(spec.noise_path, np.linspace(0.0, T, n + 1), T, noise_path_rng)[:, 0]
    if np.any(v < 0):
        raise ValueError("noise variance must be nonnegative along the path")
    dx = np.sqrt(iv) * w_rng.standard_normal(n)
    eps = np.sqrt(v / n) * g_rng.standard_normal(n + 1)
    return ObservationSeries(dx + np.diff(eps), np.full(n, T / n), T)


def simulate_diffusion_returns(n: int, T: float, vol_path: ParamPathSpec,
                               seed: int, substeps: int = 10) -> ObservationSeries:
    """Noise-free returns of ``X_t = int sigma dW`` on a regular grid."""
    vol_rng, w_rng = _streams(seed, 2)
    iv, _ = _interval_integrals(vol_path, n, T, vol_rng, substeps)
    if np.any(iv < 0):
        raise ValueError("sigma^2 must be nonnegative along the path")
    return ObservationSeries(np.sqrt(iv) * w_rng.standard_normal(n), np.full(n, T / n), T)


# ---------------------------------------------------------------------------
# Poisson counts


def simulate_poisson_counts(rate_path: ParamPathSpec, n: int, T: float, alpha: float,
                            seed: int, substeps: int = 10) -> ObservationSeries:
    """Counts on ``n`` regular intervals, Poisson with mean ``int alpha lambda_t dt``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    rate_rng, count_rng = _streams(seed, 2)
    integral, ends = _interval_integrals(rate_path, n, T, rate_rng, substeps)
    if np.any(ends <= 0):
        raise ValueError("rate must be positive")
    counts = count_rng.poisson(alpha * integral)
    return ObservationSeries(counts.astype(float), np.full(n, T / n), T)


# ---------------------------------------------------------------------------
# uncertainty zones


@dataclass(frozen=True)
class UzSimSpec:
    tick: float
    eta_path: ParamPathSpec
    vol_path: ParamPathSpec  # sigma_t^2
    jump_probs: tuple = (1.0,)
    x0: float = 0.0
    T: float = 1.0
    euler_substeps: int = 200
    seed: int = 0

    def __post_init__(self):
        p = np.asarray(self.jump_probs, dtype=float)
        if p.ndim != 1 or len(p) == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("jump_probs must be a probability vector")
        if not self.tick > 0 or not self.T > 0 or self.euler_substeps < 1:
            raise ValueError("tick, T and euler_substeps must be positive")
        object.__setattr__(self, "jump_probs", tuple(float(q) for q in p))

    @property
    def m(self) -> int:
        return len(self.jump_probs)

    def euler_dt(self) -> float:
        """``(tick / sigma_bar)^2 / euler_substeps`` with ``sigma_bar^2`` the path centre."""
        s2 = float(self.vol_path.center[0])
        if not s2 > 0:
            raise ValueError("volatility path centre must be positive")
        return self.tick ** 2 / s2 / self.euler_substeps


@dataclass(frozen=True)
class TickSeries:
    """Price-change events on a tick grid.

    Index 0 is the starting point (time 0, the rounded initial price); rows
    ``1..N`` are the price changes. Prices are held as integer tick counts.
    """

    tick: float
    times: np.ndarray
    ticks: np.ndarray  # int64 price in units of tick
    eta_true: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        ticks = np.asarray(self.ticks)
        if not np.issubdtype(ticks.dtype, np.integer):
            raise TypeError("tick counts must be integers")
        ticks = ticks.astype(np.int64)
        if len(times) != len(ticks) or len(times) < 1:
            raise ValueError("times and prices must have the same nonzero length")
        if np.any(np.diff(times) <= 0):
            raise ValueError("event times must be strictly increasing")
        if np.any(np.diff(ticks) == 0):
            raise ValueError("consecutive rows must change price")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "ticks", ticks)

    @property
    def prices(self) -> np.ndarray:
        return self.ticks * self.tick

    @property
    def n_changes(self) -> int:
        return len(self.ticks) - 1

    @property
    def jump_ticks(self) -> np.ndarray:
        return np.abs(np.diff(self.ticks))

    @property
    def directions(self) -> np.ndarray:
        return np.sign(np.diff(self.ticks)).astype(np.int64)

    @property
    def durations(self) -> np.ndarray:
        return np.diff(self.times)

    def to_observations(self, horizon: Optional[float] = None) -> ObservationSeries:
        """Price changes (in price units) with their durations."""
        T = self.times[-1] if horizon is None else horizon
        return ObservationSeries(np.diff(self.ticks) * self.tick, self.durations, T)


@nb.njit(cache=True)
def _uz_events(t, y, step_var, eta_grid, u_bridge, u_event, u_jump, cum_p, z0):
    """Scan a tick-unit Euler path for uncertainty-zone barrier crossings.

    ``y`` is the efficient price divided by the tick on grid ``t``;
    ``step_var`` the variance of each increment in tick units. A crossing
    inside a step that the endpoints miss is detected with the Brownian
    bridge exceedance probability.
    """
    n_steps = t.shape[0] - 1
    cap = u_jump.shape[0]
    ev_t = np.empty(cap)
    ev_z = np.empty(cap, dtype=np.int64)
    ev_eta = np.empty(cap)
    z = z0
    k = 0
    j = 0
    # current segment start (time, value); fraction of the step remaining
    t0 = t[0]
    y0 = y[0]
    frac = 1.0
    u_seg = u_bridge[0]
    while j < n_steps and k < cap:
        # draw the size of the next change and set the barriers with eta frozen
        q = u_jump[k]
        L = 1
        while L < cum_p.shape[0] and q > cum_p[L - 1]:
            L += 1
        eta = eta_grid[j]
        up = z + L - 0.5 + eta
        dn = z - L + 0.5 - eta
        found = False
        while j < n_steps:
            y1 = y[j + 1]
            var = step_var[j] * frac
            hit = 0
            if y1 >= up:
                hit = 1
                tau = t0 + (up - y0) / (y1 - y0) * (t[j + 1] - t0)
            elif y1 <= dn:
                hit = -1
                tau = t0 + (dn - y0) / (y1 - y0) * (t[j + 1] - t0)
            elif var > 0.0:
                p_up = math.exp(-2.0 * (up - y0) * (up - y1) / var)
                p_dn = math.exp(-2.0 * (y0 - dn) * (y1 - dn) / var)
                p_any = p_up + p_dn - p_up * p_dn
                if u_seg < p_any:
                    hit = 1 if u_seg < p_any * p_up / (p_up + p_dn) else -1
                    tau = 0.5 * (t0 + t[j + 1])
            if hit != 0:
                if k > 0 and tau <= ev_t[k - 1]:
                    tau = np.nextafter(ev_t[k - 1], np.inf)
                if tau <= t[0]:
                    tau = np.nextafter(t[0], np.inf)
                z = z + hit * L
                ev_t[k] = tau
                ev_z[k] = z
                ev_eta[k] = eta
                # the path restarts from the barrier inside the same step
                y0 = up if hit == 1 else dn
                frac = (t[j + 1] - tau) / (t[j + 1] - t[j])
                t0 = tau
                u_seg = u_event[k]
                k += 1
                found = True
                break
            j += 1
            t0 = t[j]
            y0 = y[j]
            frac = 1.0
            if j < n_steps:
                u_seg = u_bridge[j]
        if not found:
            break
    return ev_t[:k], ev_z[:k], ev_eta[:k]


def simulate_uncertainty_zones(spec: UzSimSpec) -> TickSeries:
    """Efficient price ``X_t = x0 + int sigma dW`` observed at the times it
    crosses ``Z_prev +/- tick (L - 1/2 + eta_prev)``; the observed price is
    the tick-rounded efficient price at those times.
    """
    T, tick = spec.T, spec.tick
    dt = spec.euler_dt()
    n_steps = max(int(math.ceil(T / dt)), 1)
    t = np.linspace(0.0, T, n_steps + 1)
    vol_rng, eta_rng, w_rng, u_rng, ev_rng, jump_rng = _streams(spec.seed, 6)

    s2 = path_values(spec.vol_path, t, T, vol_rng)[:, 0]
    if np.any(s2 <= 0):
        raise ValueError("sigma^2 must stay positive")
    eta = path_values(spec.eta_path, t, T, eta_rng)[:, 0]
    if np.any(eta <= 0) or np.any(eta >= 1):
        raise ValueError("eta must stay in (0, 1)")

    step_var = 0.5 * (s2[1:] + s2[:-1]) * np.diff(t) / tick ** 2
    y = np.empty(n_steps + 1)
    y[0] = spec.x0 / tick
    y[1:] = y[0] + np.cumsum(np.sqrt(step_var) * w_rng.standard_normal(n_steps))
    if not np.all(np.isfinite(y)):
        raise ValueError("non-finite efficient price path")
    u_bridge = u_rng.random(n_steps)
    cap = n_steps + 1
    u_event = ev_rng.random(cap)
    u_jump = jump_rng.random(cap)
    cum_p = np.cumsum(spec.jump_probs)
    z0 = int(np.floor(y[0] + 0.5))

    ev_t, ev_z, ev_eta = _uz_events(t, y, step_var, eta, u_bridge, u_event, u_jump,
                                    cum_p, z0)
    if len(ev_t) < 2:
        raise ValueError("horizon too short: fewer than 2 price changes")
    times = np.concatenate(([0.0], ev_t))
    ticks = np.concatenate(([z0], ev_z))
    return TickSeries(tick, times, ticks, eta_true=ev_eta)
