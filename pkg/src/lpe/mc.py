"""Monte Carlo studies of the block estimators.

Path ``j`` of a study draws from ``SeedSequence(master_seed, spawn_key=(j,))``,
so its random stream does not depend on how paths are scheduled; results
are reduced in path order.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .core import ObservationSeries
from .ma1 import ConvergenceError, DegenerateDataError, ma1_mle
from .ma1_lpe import lpe_ma1
from .paths import ParamPathSpec, integrated_parameter, path_values
from .simulate import (Ma1SimSpec, UzSimSpec, simulate_tv_ma1_with_path,
                       simulate_uncertainty_zones)
from .uz import uz_constancy_test, uz_lpe

ESTIMATORS = ("global-MLE", "last-500-MLE", "LPE", "BC-LPE")
BLOCKED = ("LPE", "BC-LPE")
LAST_WINDOW = 500
MAX_FAILURE_RATE = 0.01
REPORT_HEADER = ("estimator", "h", "param", "bias", "sd", "mc_se")

TABLE_HS = (25, 100, 500, 1000, 2000, 5000)


class StudyError(RuntimeError):
    pass


def path_seed(master_seed: int, j: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(j,))


@dataclass(frozen=True)
class EstimatorSpec:
    name: str
    h: Optional[int] = None

    def __post_init__(self):
        if self.name not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.name!r}; choose from {ESTIMATORS}")
        if self.name in BLOCKED and (self.h is None or self.h < 2):
            raise ValueError(f"{self.name} needs a block size >= 2")

    @property
    def label_h(self) -> str:
        if self.name == "last-500-MLE":
            return str(LAST_WINDOW)
        return "" if self.h is None else str(self.h)


@dataclass(frozen=True)
class McConfig:
    n: int
    n_paths: int
    path_spec: ParamPathSpec
    estimators: tuple
    master_seed: int
    T: float = 1.0

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be at least 1")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.path_spec.dim != 3:
            raise ValueError("path_spec must be over (mu, beta, kappa)")
        ests = tuple(e if isinstance(e, EstimatorSpec) else EstimatorSpec(*e)
                     for e in self.estimators)
        if not ests:
            raise ValueError("no estimators requested")
        for e in ests:
            if e.h is not None and e.h > self.n:
                raise ValueError(f"block size {e.h} exceeds n={self.n}")
            if e.name == "last-500-MLE" and self.n < LAST_WINDOW:
                raise ValueError(f"last-500-MLE needs n >= {LAST_WINDOW}")
        object.__setattr__(self, "estimators", ests)


@dataclass(frozen=True)
class ReportRow:
    estimator: str
    h: str
    param: str
    bias: float
    sd: float
    mc_se: float


@dataclass
class McReport:
    rows: list = field(default_factory=list)
    n_paths: int = 0
    failures: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(REPORT_HEADER)
        for r in self.rows:
            w.writerow([r.estimator, r.h, r.param, repr(r.bias), repr(r.sd), repr(r.mc_se)])
        return buf.getvalue()

    def get(self, estimator: str, h, param: str) -> ReportRow:
        key = "" if h is None else str(h)
        for r in self.rows:
            if r.estimator == estimator and r.h == key and r.param == param:
                return r
        raise KeyError((estimator, h, param))


def _summarize(errors: np.ndarray):
    """Mean, sd and mc_se of each column, in path order."""
    k = len(errors)
    mean = np.array([math.fsum(c) / k for c in errors.T])
    if k > 1:
        sd = np.array([math.sqrt(math.fsum((c - m) ** 2) / (k - 1)) for c, m in zip(errors.T, mean)])
    else:
        sd = np.zeros(errors.shape[1])
    return mean, sd, sd / math.sqrt(k)


def _map_ordered(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * threads))))


# ---------------------------------------------------------------------------
# MA(1) study


def _apply(est: EstimatorSpec, series: ObservationSeries) -> np.ndarray:
    x = series.values
    if est.name == "global-MLE":
        return ma1_mle(x, mu=0.0).as_array()
    if est.name == "last-500-MLE":
        return ma1_mle(x[-LAST_WINDOW:], mu=0.0).as_array()
    res = lpe_ma1(series, est.h, bias_correct=est.name == "BC-LPE", mu=0.0)
    return res.theta_hat


def _ma1_path(args):
    config, j = args
    spec = Ma1SimSpec(config.n, config.T, config.path_spec, path_seed(config.master_seed, j))
    series, path = simulate_tv_ma1_with_path(spec)
    target = integrated_parameter(path, config.T)
    out = []
    for est in config.estimators:
        try:
            out.append(_apply(est, series) - target)
        except (ConvergenceError, DegenerateDataError, ValueError, np.linalg.LinAlgError) as e:
            out.append(f"{type(e).__name__}: {e}")
    return out


def _collect(config_paths: int, labels, per_path) -> tuple:
    """Split per-path results into error arrays, aborting on too many failures."""
    errors, failures = [], {}
    for k, label in enumerate(labels):
        ok = [p[k] for p in per_path if not isinstance(p[k], str)]
        bad = [(j, p[k]) for j, p in enumerate(per_path) if isinstance(p[k], str)]
        if len(bad) > MAX_FAILURE_RATE * config_paths:
            detail = "; ".join(f"path {j}: {msg}" for j, msg in bad[:5])
            raise StudyError(f"{label} failed on {len(bad)} of {config_paths} paths ({detail})")
        if bad:
            failures[label] = [j for j, _ in bad]
        errors.append(np.array(ok))
    return errors, failures


def run_ma1_study(config: McConfig, threads: int = 1,
                  params: Sequence[str] = ("beta", "kappa")) -> McReport:
    """Sample bias and sd of each estimator against the integrated parameter.

    The mean is held at 0 in every fit; ``params`` selects which of
    ``mu, beta, kappa`` are reported.
    """
    names = ("mu", "beta", "kappa")
    idx = [names.index(p) for p in params]
    per_path = _map_ordered(_ma1_path, [(config, j) for j in range(config.n_paths)], threads)
    labels = [(e.name, e.label_h) for e in config.estimators]
    errors, failures = _collect(config.n_paths, labels, per_path)
    report = McReport(n_paths=config.n_paths, failures=failures)
    for (name, h), err in zip(labels, errors):
        mean, sd, se = _summarize(err[:, idx])
        for k, p in enumerate(params):
            report.rows.append(ReportRow(name, h, p, float(mean[k]), float(sd[k]), float(se[k])))
    return report


def table_config(delta: float, n_paths: int, master_seed: int, n: int = 10_000,
                 hs: Sequence[int] = TABLE_HS) -> McConfig:
    """Cosine path with ``nu = (.5, 1)``, ``A = (.2, .4)`` over ``(beta, kappa)`` and
    ``delta`` oscillations; ``mu`` stays at 0."""
    spec = ParamPathSpec.cosine(nu=[0.0, 0.5, 1.0], amp=[0.0, 0.2, 0.4],
                                osc=[0.0, delta, delta], positive=[False, False, True])
    ests = [EstimatorSpec("global-MLE"), EstimatorSpec("last-500-MLE")]
    ests += [EstimatorSpec(name, h) for name in BLOCKED for h in hs if h <= n]
    return McConfig(n, n_paths, spec, tuple(ests), master_seed)


def table1_config(n_paths: int, master_seed: int, **kw) -> McConfig:
    return table_config(4.0, n_paths, master_seed, **kw)


def table2_config(n_paths: int, master_seed: int, **kw) -> McConfig:
    return table_config(10.0, n_paths, master_seed, **kw)


# ---------------------------------------------------------------------------
# uncertainty-zones study


@dataclass(frozen=True)
class UzStudyConfig:
    n_paths: int
    tick: float
    eta_path: ParamPathSpec
    vol_path: ParamPathSpec
    hs: tuple
    master_seed: int
    jump_probs: tuple = (1.0,)
    T: float = 1.0
    euler_substeps: int = 200
    level: float = 0.05

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be at least 1")
        if not self.hs or any(h < 2 for h in self.hs):
            raise ValueError("block sizes must be >= 2")
        if not 0 < self.level < 1:
            raise ValueError("level must lie in (0, 1)")
        object.__setattr__(self, "hs", tuple(int(h) for h in self.hs))


def _uz_targets(config: UzStudyConfig) -> np.ndarray:
    grid = np.linspace(0.0, config.T, 10_001)
    out = []
    for spec in (config.vol_path, config.eta_path):
        if not spec.is_deterministic():
            raise ValueError("the study needs deterministic volatility and friction paths")
        v = path_values(spec, grid, config.T)[:, 0]
        out.append(trapezoid(v, grid) / config.T)
    return np.array(out)


def _uz_path(args):
    config, j, target = args
    spec = UzSimSpec(config.tick, config.eta_path, config.vol_path, config.jump_probs,
                     T=config.T, euler_substeps=config.euler_substeps,
                     seed=path_seed(config.master_seed, j))
    out = []
    try:
        ticks = simulate_uncertainty_zones(spec)
    except ValueError as e:
        return [f"ValueError: {e}"] * len(config.hs)
    for h in config.hs:
        try:
            res = uz_lpe(ticks, config.tick, h, config.T)
            test = uz_constancy_test(ticks, h, res)
            out.append(np.array([res.theta_hat[0] - target[0], res.theta_hat[1] - target[1],
                                 float(test.pvalue < config.level)]))
        except ValueError as e:
            out.append(f"ValueError: {e}")
    return out


def run_uz_study(config: UzStudyConfig, threads: int = 1) -> McReport:
    """LPE bias of ``(sigma2, eta)`` and rejection rate of the constancy test.

    The rejection rate is reported as the row ``chisq-reject`` whose ``bias``
    column holds the rate (the mean of the rejection indicator).
    """
    target = _uz_targets(config)
    per_path = _map_ordered(_uz_path, [(config, j, target) for j in range(config.n_paths)], threads)
    labels = [("UZ-LPE", str(h)) for h in config.hs]
    errors, failures = _collect(config.n_paths, labels, per_path)
    report = McReport(n_paths=config.n_paths, failures=failures)
    for (name, h), err in zip(labels, errors):
        mean, sd, se = _summarize(err)
        for k, p in enumerate(("sigma2", "eta", "chisq-reject")):
            report.rows.append(ReportRow(name, h, p, float(mean[k]), float(sd[k]), float(se[k])))
    return report


def rejection_rates(report: McReport) -> dict:
    return {int(r.h): r.bias for r in report.rows if r.param == "chisq-reject"}


def uz_default_config(n_paths: int, master_seed: int, eta_amp: float = 0.0,
                      hs=(43, 53, 63)) -> UzStudyConfig:
    """Constant unit volatility, ``eta = 0.155`` (optionally a one-period cosine)
    and tick 0.03, giving about 3500 price changes on ``[0, 1]``."""
    eta = (ParamPathSpec.constant([0.155]) if eta_amp == 0
           else ParamPathSpec.cosine([0.155], [eta_amp], [1.0]))
    return UzStudyConfig(n_paths, 0.03, eta, ParamPathSpec.constant([1.0]), tuple(hs), master_seed)
