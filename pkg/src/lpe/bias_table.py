"""Monte Carlo tabulation of the finite-sample bias of the MA(1) MLE.

Location/scale equivariance of the likelihood means the bias of the mean
estimate vanishes, the bias of ``beta_hat`` depends on ``beta`` and ``h``
only, and the bias of ``kappa_hat`` is proportional to ``kappa``. Each cell
is therefore simulated at ``mu = 0, kappa = 1``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .ma1 import fit_many

DEFAULT_BETAS = tuple(np.round(np.linspace(-0.95, 0.95, 21), 10))
DEFAULT_HS = (25, 50, 100, 200, 500, 1000)
MIN_H = 8
MIN_REPS = 1000
TABLE_FILES = {False: "ma1_bias_v1.csv", True: "ma1_bias_zero_mean_v1.csv"}

COLUMNS = ("h", "beta", "bias_mu", "bias_beta", "bias_kappa_per_unit_kappa",
           "mc_se_mu", "mc_se_beta", "mc_se_kappa")


@dataclass
class BiasTable:
    hs: np.ndarray          # (H,) increasing
    betas: np.ndarray       # (K,) increasing
    bias_mu: np.ndarray     # (H, K)
    bias_beta: np.ndarray
    bias_kappa: np.ndarray  # per unit kappa
    se_mu: np.ndarray
    se_beta: np.ndarray
    se_kappa: np.ndarray

    def lookup(self, beta: float, h: int):
        """Interpolated ``(bias_beta, bias_kappa_per_unit_kappa)``.

        Linear in ``beta`` (clamped to the grid) and in ``1/h``; outside the
        tabulated ``h`` range the nearest row is rescaled as ``1/h``.
        """
        if h < MIN_H:
            raise ValueError(f"h={h} below the tabulation range (>= {MIN_H})")
        b = min(max(beta, self.betas[0]), self.betas[-1])
        rows_b = np.array([np.interp(b, self.betas, r) for r in self.bias_beta])
        rows_k = np.array([np.interp(b, self.betas, r) for r in self.bias_kappa])
        if len(self.hs) == 1 or h <= self.hs[0]:
            s = self.hs[0] / h
            return rows_b[0] * s, rows_k[0] * s
        if h >= self.hs[-1]:
            s = self.hs[-1] / h
            return rows_b[-1] * s, rows_k[-1] * s
        inv = 1.0 / self.hs[::-1]
        return (float(np.interp(1.0 / h, inv, rows_b[::-1])),
                float(np.interp(1.0 / h, inv, rows_k[::-1])))

    # -- serialization ---------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(COLUMNS)
        for i, h in enumerate(self.hs):
            for j, b in enumerate(self.betas):
                w.writerow([int(h), repr(float(b))] + [
                    repr(float(a[i, j])) for a in (
                        self.bias_mu, self.bias_beta, self.bias_kappa,
                        self.se_mu, self.se_beta, self.se_kappa)
                ])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "BiasTable":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty bias table")
        missing = set(COLUMNS) - set(rows[0])
        if missing:
            raise ValueError(f"bias table lacks columns {sorted(missing)}")
        hs = sorted({int(r["h"]) for r in rows})
        betas = sorted({float(r["beta"]) for r in rows})
        shape = (len(hs), len(betas))
        arrays = {c: np.full(shape, np.nan) for c in COLUMNS[2:]}
        for r in rows:
            i = hs.index(int(r["h"]))
            j = betas.index(float(r["beta"]))
            for c in COLUMNS[2:]:
                arrays[c][i, j] = float(r[c])
        if any(np.isnan(a).any() for a in arrays.values()):
            raise ValueError("bias table is not a full (h, beta) grid")
        return cls(np.array(hs, dtype=float), np.array(betas),
                   arrays["bias_mu"], arrays["bias_beta"],
                   arrays["bias_kappa_per_unit_kappa"], arrays["mc_se_mu"],
                   arrays["mc_se_beta"], arrays["mc_se_kappa"])

    @classmethod
    def zero(cls) -> "BiasTable":
        """A table with no correction; turns the bias-corrected MLE into the MLE."""
        z = np.zeros((1, 2))
        return cls(np.array([float(MIN_H)]), np.array([-1.0, 1.0]), z, z, z, z, z, z)


def _cell_rng(seed: int, h: int, beta: float, mean_known: bool):
    key = (int(h), int(round((beta + 1.0) * 1e6)), int(mean_known))
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def simulate_cell(beta: float, h: int, reps: int, seed: int, mean_known: bool):
    """Monte Carlo MLE fits at ``(0, beta, 1)``; returns the ``(reps, 3)`` estimates."""
    rng = _cell_rng(seed, h, beta, mean_known)
    lam = rng.standard_normal((reps, h + 1))
    x = lam[:, 1:] + beta * lam[:, :-1]
    return fit_many(x, mean_known=mean_known)


def generate_table(reps: int, seed: int, mean_known: bool = False,
                   betas=DEFAULT_BETAS, hs=DEFAULT_HS, progress=None) -> BiasTable:
    if reps < MIN_REPS:
        raise ValueError(f"reps must be at least {MIN_REPS}")
    hs = sorted(int(h) for h in hs)
    betas = sorted(float(b) for b in betas)
    if hs[0] < MIN_H:
        raise ValueError(f"h must be at least {MIN_H}")
    shape = (len(hs), len(betas))
    out = {k: np.empty(shape) for k in ("mu", "beta", "kappa", "smu", "sbeta", "skappa")}
    for i, h in enumerate(hs):
        for j, b in enumerate(betas):
            est = simulate_cell(b, h, reps, seed, mean_known)
            err = est - np.array([0.0, b, 1.0])
            m = err.mean(axis=0)
            se = err.std(axis=0, ddof=1) / np.sqrt(reps)
            out["mu"][i, j], out["beta"][i, j], out["kappa"][i, j] = m
            out["smu"][i, j], out["sbeta"][i, j], out["skappa"][i, j] = se
            if progress is not None:
                progress(h, b)
    return BiasTable(np.array(hs, dtype=float), np.array(betas), out["mu"], out["beta"],
                     out["kappa"], out["smu"], out["sbeta"], out["skappa"])


@lru_cache(maxsize=2)
def default_table(mean_known: bool = False) -> BiasTable:
    name = TABLE_FILES[bool(mean_known)]
    text = resources.files("lpe").joinpath("data", name).read_text(encoding="utf-8")
    return BiasTable.from_csv(text)
