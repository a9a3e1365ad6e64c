"""Gaussian MA(1): exact likelihood, MLE, bias correction and the
volatility/noise parametrization of noisy diffusion returns.

Model: ``x_t = mu + sqrt(kappa) * (e_t + beta * e_{t-1})`` with standard
normal ``e_t``, so ``gamma_0 = kappa (1 + beta^2)`` and
``gamma_1 = beta * kappa``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numba as nb
import numpy as np

__all__ = [
    "Ma1Params",
    "VolNoisePair",
    "ConvergenceError",
    "DegenerateDataError",
    "ma1_loglik",
    "ma1_mle",
    "ma1_bias",
    "ma1_mle_bc",
    "ma1_asy_variance",
    "vol_to_ma1",
    "ma1_to_vol",
    "G",
]

# transformed-coordinate box: |atanh(beta)| <= 5 keeps |beta| <= 0.99991
Z_BOUND = 5.0
LOGK_BOUND = 50.0
MU_BOUND = 1e3
XTOL = 1e-8
MAXITER = 10_000
MIN_MLE_LENGTH = 4
BETA_CLAMP = 1 - 1e-6


class ConvergenceError(RuntimeError):
    def __init__(self, msg, best=None, iterations=None):
        super().__init__(msg)
        self.best = best
        self.iterations = iterations


class DegenerateDataError(ValueError):
    pass


@dataclass(frozen=True)
class Ma1Params:
    mu: float
    beta: float
    kappa: float

    def __post_init__(self):
        if not abs(self.beta) < 1:
            raise ValueError(f"beta must lie in (-1, 1), got {self.beta}")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")

    def as_array(self) -> np.ndarray:
        return np.array([self.mu, self.beta, self.kappa])


@dataclass(frozen=True)
class VolNoisePair:
    sigma2: float
    v: float
    n: int
    T: float = 1.0

    def __post_init__(self):
        if not (self.sigma2 > 0 and self.v > 0 and self.T > 0 and self.n >= 1):
            raise ValueError("sigma2, v, T must be positive and n >= 1")


# ---------------------------------------------------------------------------
# likelihood kernels


@nb.njit(cache=True)
def _negll(data, mu, beta, kappa):
    # innovations algorithm: v_t = kappa * r_t, theta_t = beta / r_{t-1}
    g0 = 1.0 + beta * beta
    r = g0
    e = data[0] - mu
    logdet = math.log(r)
    quad = e * e / r
    for t in range(1, data.shape[0]):
        th = beta / r
        e = (data[t] - mu) - th * e
        r = g0 - th * th * r
        logdet += math.log(r)
        quad += e * e / r
    n = data.shape[0]
    return 0.5 * (n * math.log(2.0 * math.pi * kappa) + logdet + quad / kappa)


@nb.njit(cache=True)
def _objective(x, data, mu_fixed):
    if mu_fixed:
        return _negll(data, 0.0, math.tanh(x[0]), math.exp(x[1]))
    return _negll(data, x[0], math.tanh(x[1]), math.exp(x[2]))


@nb.njit(cache=True)
def _clip(x, lo, hi):
    out = np.empty_like(x)
    for j in range(x.shape[0]):
        out[j] = min(max(x[j], lo[j]), hi[j])
    return out


@nb.njit(cache=True)
def _nelder_mead(x0, step, lo, hi, data, mu_fixed, xtol, maxiter):
    # standard coefficients (1, 2, 1/2, 1/2); trial points projected on the box
    n = x0.shape[0]
    sim = np.empty((n + 1, n))
    fs = np.empty(n + 1)
    sim[0] = _clip(x0, lo, hi)
    for i in range(n):
        sim[i + 1] = sim[0]
        sim[i + 1, i] += step[i]
        if sim[i + 1, i] > hi[i]:
            sim[i + 1, i] = sim[0, i] - step[i]
    for i in range(n + 1):
        fs[i] = _objective(sim[i], data, mu_fixed)
    it = 0
    converged = False
    while True:
        order = np.argsort(fs)
        sim = sim[order]
        fs = fs[order]
        diam = 0.0
        for i in range(1, n + 1):
            for j in range(n):
                d = abs(sim[i, j] - sim[0, j])
                if d > diam:
                    diam = d
        if diam < xtol:
            converged = True
            break
        if it >= maxiter:
            break
        it += 1
        c = np.zeros(n)
        for i in range(n):
            c += sim[i]
        c /= n
        xr = _clip(2.0 * c - sim[n], lo, hi)
        fr = _objective(xr, data, mu_fixed)
        if fr < fs[0]:
            xe = _clip(3.0 * c - 2.0 * sim[n], lo, hi)
            fe = _objective(xe, data, mu_fixed)
            if fe < fr:
                sim[n] = xe
                fs[n] = fe
            else:
                sim[n] = xr
                fs[n] = fr
        elif fr < fs[n - 1]:
            sim[n] = xr
            fs[n] = fr
        else:
            if fr < fs[n]:
                xc = _clip(1.5 * c - 0.5 * sim[n], lo, hi)
            else:
                xc = _clip(0.5 * c + 0.5 * sim[n], lo, hi)
            fc = _objective(xc, data, mu_fixed)
            if fc < min(fr, fs[n]):
                sim[n] = xc
                fs[n] = fc
            else:
                for i in range(1, n + 1):
                    sim[i] = sim[0] + 0.5 * (sim[i] - sim[0])
                    fs[i] = _objective(sim[i], data, mu_fixed)
    return sim[0].copy(), fs[0], it, converged


@nb.njit(cache=True)
def _moment_start(y):
    # method of moments on standardized data
    n = y.shape[0]
    g0 = 0.0
    for t in range(n):
        g0 += y[t] * y[t]
    g1 = 0.0
    for t in range(1, n):
        g1 += y[t] * y[t - 1]
    g0 /= n
    g1 /= n
    rho = g1 / g0
    if rho >= 0.5:
        b = 0.95
    elif rho <= -0.5:
        b = -0.95
    elif rho == 0.0:
        b = 0.0
    else:
        b = (1.0 - math.sqrt(1.0 - 4.0 * rho * rho)) / (2.0 * rho)
        b = min(max(b, -0.95), 0.95)
    return b, g0 / (1.0 + b * b)


@nb.njit(cache=True)
def _fit(x, mu_fixed, mu_value, xtol, maxiter):
    """Returns (mu, beta, kappa, negll, negll_start, iterations, converged, status).

    status: 0 ok, 1 degenerate data.
    """
    n = x.shape[0]
    if mu_fixed:
        center = mu_value
    else:
        center = 0.0
        for t in range(n):
            center += x[t]
        center /= n
    ss = 0.0
    for t in range(n):
        ss += (x[t] - center) ** 2
    scale = math.sqrt(ss / n)
    if not scale > 0.0 or not math.isfinite(scale):
        return np.nan, np.nan, np.nan, np.nan, np.nan, 0, False, 1
    y = (x - center) / scale
    b0, k0 = _moment_start(y)
    if mu_fixed:
        x0 = np.array([math.atanh(b0), math.log(k0)])
        step = np.array([0.1, 0.1])
        lo = np.array([-Z_BOUND, -LOGK_BOUND])
        hi = np.array([Z_BOUND, LOGK_BOUND])
    else:
        x0 = np.array([0.0, math.atanh(b0), math.log(k0)])
        step = np.array([0.1, 0.1, 0.1])
        lo = np.array([-MU_BOUND, -Z_BOUND, -LOGK_BOUND])
        hi = np.array([MU_BOUND, Z_BOUND, LOGK_BOUND])
    f0 = _objective(x0, y, mu_fixed)
    best, fbest, it, conv = _nelder_mead(x0, step, lo, hi, y, mu_fixed, xtol, maxiter)
    if mu_fixed:
        mu_s = 0.0
        z = best[0]
        lk = best[1]
    else:
        mu_s = best[0]
        z = best[1]
        lk = best[2]
    # change of variables: log-likelihood of x differs from y's by n*log(scale)
    shift = n * math.log(scale)
    return (center + scale * mu_s, math.tanh(z), scale * scale * math.exp(lk),
            fbest + shift, f0 + shift, it, conv, 0)


@nb.njit(cache=True)
def _fit_rows(mat, mu_fixed, xtol, maxiter):
    out = np.empty((mat.shape[0], 3))
    for i in range(mat.shape[0]):
        r = _fit(mat[i], mu_fixed, 0.0, xtol, maxiter)
        out[i, 0] = r[0]
        out[i, 1] = r[1]
        out[i, 2] = r[2]
    return out


# ---------------------------------------------------------------------------
# public API


def _as_data(data) -> np.ndarray:
    x = np.ascontiguousarray(data, dtype=float).ravel()
    if len(x) == 0:
        raise ValueError("empty data")
    if not np.all(np.isfinite(x)):
        raise ValueError("data must be finite")
    return x


def ma1_loglik(params: Ma1Params, data) -> float:
    """Exact Gaussian log-likelihood, O(n) via the innovations recursion."""
    x = _as_data(data)
    return -_negll(x, params.mu, params.beta, params.kappa)


def _run_fit(x, mu):
    if len(x) < MIN_MLE_LENGTH:
        raise ValueError(f"need at least {MIN_MLE_LENGTH} observations, got {len(x)}")
    mu_fixed = mu is not None
    res = _fit(x, mu_fixed, 0.0 if mu is None else float(mu), XTOL, MAXITER)
    if res[7] == 1:
        raise DegenerateDataError("data have zero sample variance")
    return res


def ma1_mle(data, mu: Optional[float] = None) -> Ma1Params:
    """Maximum likelihood fit by Nelder-Mead in ``(mu, atanh beta, log kappa)``.

    Pass ``mu`` to hold the mean fixed. The simplex works on data
    standardized by their sample mean and scale, so location shifts and
    rescalings of ``data`` map exactly onto the estimates.
    """
    x = _as_data(data)
    m, b, k, nll, nll0, it, conv, _ = _run_fit(x, mu)
    est = Ma1Params(m, b, k)
    if not conv:
        raise ConvergenceError(
            f"simplex did not converge after {it} iterations", best=est, iterations=it
        )
    return est


def fit_many(rows, mean_known: bool = False) -> np.ndarray:
    """Fit each row of a 2-d array; returns ``(rows, 3)`` of (mu, beta, kappa).

    With ``mean_known`` the mean is held at 0. Non-converged rows are kept
    at their best simplex vertex.
    """
    mat = np.ascontiguousarray(rows, dtype=float)
    return _fit_rows(mat, mean_known, XTOL, MAXITER)


def ma1_asy_variance(params: Ma1Params, h: int, mean_known: bool = False) -> np.ndarray:
    """Inverse expected Fisher information over ``h`` observations.

    The information matrix of (mu, beta, kappa) is diagonal with entries
    ``1/(kappa (1+beta)^2)``, ``1/(1-beta^2)`` and ``1/(2 kappa^2)`` per
    observation.
    """
    if h < 1:
        raise ValueError("h must be positive")
    b, k = params.beta, params.kappa
    if 1.0 - abs(b) < 1e-6:
        raise np.linalg.LinAlgError("Fisher information is singular as |beta| -> 1")
    var_mu = 0.0 if mean_known else k * (1.0 + b) ** 2
    return np.diag([var_mu, 1.0 - b * b, 2.0 * k * k]) / h


def ma1_bias(params: Ma1Params, h: int, mean_known: bool = False,
             table=None) -> np.ndarray:
    """First-order finite-sample bias of :func:`ma1_mle` at sample size ``h``.

    Read from the Monte Carlo tabulation shipped with the package (or the
    ``table`` passed in). Returns ``(bias_mu, bias_beta, bias_kappa)``.
    """
    from .bias_table import default_table

    tab = table if table is not None else default_table(mean_known)
    bb, bk = tab.lookup(params.beta, h)
    return np.array([0.0, bb, bk * params.kappa])


def correct_bias(est: Ma1Params, h: int, mean_known: bool = False,
                 table=None) -> Ma1Params:
    b = ma1_bias(est, h, mean_known=mean_known, table=table)
    beta = min(max(est.beta - b[1], -BETA_CLAMP), BETA_CLAMP)
    kappa = est.kappa - b[2]
    if kappa <= 0:
        kappa = 1e-3 * est.kappa
    return Ma1Params(est.mu - b[0], beta, kappa)


def ma1_mle_bc(data, mu: Optional[float] = None, table=None) -> Ma1Params:
    """Bias-corrected MLE: ``theta_hat - b(theta_hat)``."""
    x = _as_data(data)
    est = ma1_mle(x, mu=mu)
    return correct_bias(est, len(x), mean_known=mu is not None, table=table)


# ---------------------------------------------------------------------------
# volatility / noise correspondence


def G(x):
    """``-1/x - x`` on (-1, 0); equals ``-gamma_0 / gamma_1`` of an MA(1)."""
    return -1.0 / x - x


def vol_to_ma1(pair: VolNoisePair) -> Ma1Params:
    """MA(1) parameters of returns ``dX + eps_i - eps_{i-1}`` with
    ``Var(eps) = v / n`` and integrated variance ``sigma2 * T`` spread
    over ``n`` regular intervals."""
    c = pair.sigma2 * pair.T / pair.v + 2.0
    # smaller-magnitude root of beta^2 + c beta + 1 = 0, computed without cancellation
    beta = -2.0 / (c + math.sqrt(c * c - 4.0))
    if not -1.0 < beta < 0.0:
        raise ValueError("no MA(1) root in (-1, 0)")
    kappa = -pair.v / (pair.n * beta)
    return Ma1Params(0.0, beta, kappa)


def ma1_to_vol(params: Ma1Params, n: int, T: float = 1.0) -> VolNoisePair:
    b, k = params.beta, params.kappa
    if b >= 0:
        raise ValueError("beta >= 0: no negative lag-1 autocovariance, noise not identified")
    v = -n * b * k
    sigma2 = (G(b) - 2.0) * v / T
    return VolNoisePair(sigma2, v, n, T)
