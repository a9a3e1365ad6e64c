"""Time-varying parameter paths: constant, cosine and Brownian martingale."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid

KINDS = ("constant", "cosine", "martingale")

#: floor at which variance-type components are reflected in martingale paths
POSITIVITY_FLOOR = 1e-8


def _vec(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ParamPathSpec:
    """Declarative description of a parameter path.

    * ``constant``: ``theta0``
    * ``cosine``: ``nu + amp * cos(2 pi t osc / T)``
    * ``martingale``: ``theta0 + vol * W_t`` with independent Brownian
      components; entries flagged in ``positive`` are reflected at
      ``floor`` to keep variance-type parameters positive.
    """

    kind: str
    theta0: Optional[np.ndarray] = None
    nu: Optional[np.ndarray] = None
    amp: Optional[np.ndarray] = None
    osc: Optional[np.ndarray] = None
    vol: Optional[np.ndarray] = None
    positive: Optional[np.ndarray] = None
    floor: float = POSITIVITY_FLOOR

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown path kind {self.kind!r}")
        for name in ("theta0", "nu", "amp", "osc", "vol"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, _vec(val))
        if self.kind == "cosine":
            if self.nu is None or self.amp is None or self.osc is None:
                raise ValueError("cosine path needs nu, amp and osc")
            if not (len(self.nu) == len(self.amp) == len(self.osc)):
                raise ValueError("nu, amp and osc must have the same dimension")
        else:
            if self.theta0 is None:
                raise ValueError(f"{self.kind} path needs theta0")
        if self.kind == "martingale":
            if self.vol is None or len(self.vol) != len(self.theta0):
                raise ValueError("martingale path needs vol of dimension p")
            if np.any(self.vol < 0):
                raise ValueError("martingale vol must be nonnegative")
        pos = self.positive
        if pos is None:
            pos = np.zeros(self.dim, dtype=bool)
        object.__setattr__(self, "positive", np.asarray(pos, dtype=bool).reshape(self.dim))

    @property
    def dim(self) -> int:
        return len(self.nu if self.kind == "cosine" else self.theta0)

    @property
    def center(self) -> np.ndarray:
        """Level around which the path moves (``nu`` or ``theta0``)."""
        return self.nu if self.kind == "cosine" else self.theta0

    @classmethod
    def constant(cls, theta0, **kw):
        return cls("constant", theta0=theta0, **kw)

    @classmethod
    def cosine(cls, nu, amp, osc, **kw):
        return cls("cosine", nu=nu, amp=amp, osc=osc, **kw)

    @classmethod
    def martingale(cls, theta0, vol, **kw):
        return cls("martingale", theta0=theta0, vol=vol, **kw)

    def is_deterministic(self) -> bool:
        return self.kind != "martingale" or not np.any(self.vol > 0)


@dataclass(frozen=True)
class ParamPath:
    times: np.ndarray
    values: np.ndarray  # shape (len(times), p)
    spec: ParamPathSpec = field(repr=False)


def _check_grid(grid, T):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise ValueError("grid must be a nonempty 1-d sequence")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if grid[0] < 0 or grid[-1] > T * (1 + 1e-12):
        raise ValueError("grid must lie in [0, T]")
    return grid


def evaluate_deterministic(spec: ParamPathSpec, t, T: float) -> np.ndarray:
    """Path values at times ``t`` for constant and cosine paths, shape ``(len(t), p)``."""
    t = np.asarray(t, dtype=float)
    if spec.kind == "cosine":
        return spec.nu + spec.amp * np.cos(2 * np.pi * t[:, None] * spec.osc / T)
    if spec.kind == "constant" or spec.is_deterministic():
        return np.broadcast_to(spec.theta0, (len(t), spec.dim)).copy()
    raise ValueError("martingale path values depend on a random seed")


def _martingale_values(spec: ParamPathSpec, grid: np.ndarray,
                       rng: np.random.Generator) -> np.ndarray:
    p = spec.dim
    out = np.empty((len(grid), p))
    out[0] = spec.theta0
    if len(grid) == 1:
        return out
    dt = np.diff(grid)
    z = rng.standard_normal((len(dt), p))
    eps = spec.floor
    pos = spec.positive
    # sequential because reflection is path dependent
    incr = spec.vol * np.sqrt(dt)[:, None] * z
    if not np.any(pos):
        out[1:] = spec.theta0 + np.cumsum(incr, axis=0)
        return out
    cur = out[0].copy()
    for j in range(len(dt)):
        cur = cur + incr[j]
        cur[pos] = eps + np.abs(cur[pos] - eps)
        out[j + 1] = cur
    return out


def path_values(spec: ParamPathSpec, grid, T: float,
                rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Sample the path on ``grid``; ``rng`` is only consumed by martingale paths."""
    grid = _check_grid(grid, T)
    if spec.kind == "martingale" and not spec.is_deterministic():
        if rng is None:
            raise ValueError("martingale path needs a random generator")
        return _martingale_values(spec, grid, rng)
    return evaluate_deterministic(spec, grid, T)


def sample_path(spec: ParamPathSpec, grid, T: float, seed: int) -> ParamPath:
    grid = _check_grid(grid, T)
    rng = np.random.default_rng(seed)
    return ParamPath(grid, path_values(spec, grid, T, rng), spec)


def integrated_parameter(path: ParamPath, T: float) -> np.ndarray:
    """``T^-1 * int_0^T theta_t dt`` by the trapezoidal rule on the path grid."""
    t = path.times
    if abs(t[0]) > 1e-12 * T or abs(t[-1] - T) > 1e-12 * T:
        raise ValueError("path grid must start at 0 and end at T")
    if path.spec.kind == "constant" or len(t) == 1:
        return path.values[0].copy()
    return trapezoid(path.values, t, axis=0) / T
