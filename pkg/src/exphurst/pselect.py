"""Monte-Carlo choice of the expectile order ``p``.

A pilot fit (standard method) gives ``H0`` and ``sigma0^2``. ``B`` paths are
simulated with those parameters, passed through the same contamination as
the data, and every ``p`` of the grid is scored by the mean squared error of
its expectile estimate around ``H0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math

import numpy as np

from .contamination import ContaminationSpec
from .estimators import EstimatorConfig, estimate_hurst, estimate_sigma2, expectile_hurst_grid
from .filters import FilterSpec, make_filter
from .synth import HurstParams, mix_seed, simulate_fbm

log = logging.getLogger(__name__)

H_CLAMP = (0.01, 0.99)


def default_grid() -> np.ndarray:
    return np.round(np.arange(1, 20) * 0.05, 10)


def parse_grid(text: str) -> np.ndarray:
    """Parse ``start:stop:step`` (inclusive stop) or a comma separated list."""
    if ":" in text:
        start, stop, step = (float(t) for t in text.split(":"))
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return np.round(start + step * np.arange(count), 10)
    return np.array([float(t) for t in text.split(",")])


@dataclass(frozen=True)
class PSelectConfig:
    grid: tuple = tuple(default_grid())
    B: int = 100
    contaminator: ContaminationSpec | None = None
    filter: FilterSpec = field(default_factory=lambda: make_filter("d4"))
    M: int = 5
    beta: float = 2.0

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        object.__setattr__(self, "grid", tuple(float(v) for v in g))
        if g.size == 0 or np.any(g <= 0) or np.any(g >= 1) or np.any(np.diff(g) <= 0):
            raise ValueError("grid must be nonempty, strictly increasing and inside (0, 1)")
        if self.B < 2:
            raise ValueError("B must be >= 2")


@dataclass
class PSelectResult:
    p_opt: float
    mse_curve: list  # (p, mse)
    H0: float
    sigma2_0: float
    dropped: int
    clamped: bool

    def to_dict(self) -> dict:
        return {
            "p_opt": self.p_opt,
            "H0": self.H0,
            "sigma2_0": self.sigma2_0,
            "dropped": self.dropped,
            "clamped": self.clamped,
            "mse_curve": [{"p": p, "mse": m} for p, m in self.mse_curve],
        }


def pick_minimum(grid, mse) -> float:
    """Grid point with the smallest MSE; exact ties go to the ``p`` nearest 0.5."""
    grid = np.asarray(grid, dtype=float)
    mse = np.asarray(mse, dtype=float)
    best = np.nanmin(mse)
    cands = grid[mse == best]
    return float(cands[np.argmin(np.abs(cands - 0.5))])


def select_p(x, cfg: PSelectConfig | None = None, seed: int = 0) -> PSelectResult:
    """Choose the expectile order minimising the Monte-Carlo MSE around the pilot estimate."""
    cfg = cfg or PSelectConfig()
    values = x.values if hasattr(x, "values") else np.asarray(x, dtype=float)
    n = len(values)
    H0 = estimate_hurst(values, EstimatorConfig("ST", filter=cfg.filter, M=cfg.M)).H_hat
    clamped = not (H_CLAMP[0] <= H0 <= H_CLAMP[1])
    if clamped:
        log.warning("pilot estimate H0=%.4f clamped to %s", H0, H_CLAMP)
        H0 = min(max(H0, H_CLAMP[0]), H_CLAMP[1])
    sigma2 = estimate_sigma2(values, cfg.filter, H0)
    params = HurstParams(H0, math.sqrt(sigma2))

    grid = np.asarray(cfg.grid)
    est = np.empty((cfg.B, len(grid)))
    for b in range(cfg.B):
        path = simulate_fbm(params, n, mix_seed(seed, b))
        if cfg.contaminator is not None:
            path = cfg.contaminator.apply(path, sigma2, mix_seed(seed, b, 1))
        try:
            est[b] = expectile_hurst_grid(path, grid, cfg.beta, cfg.filter, cfg.M)
        except ValueError:
            est[b] = np.nan
    bad = ~np.isfinite(est)
    dropped = int(np.any(bad, axis=1).sum())
    if np.all(bad, axis=0).any():
        raise RuntimeError("every replication degenerate for some p on the grid")
    mse = np.nanmean((est - H0) ** 2, axis=0)
    p_opt = pick_minimum(grid, mse)
    curve = [(float(p), float(m)) for p, m in zip(grid, mse)]
    return PSelectResult(p_opt, curve, float(H0), float(sigma2), dropped, clamped)
