"""Discrete-variations estimators of the Hurst exponent.

For each dilation ``m = 1..M`` a scale statistic ``y_m`` is computed from
the filtered path ``X^{a^m}`` and ``H`` is read off the OLS slope of
``y_m`` against ``log m``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .expectile import expectile_sorted, sample_median, trimmed_mean
from .filters import FilterSpec, apply_filter, dilate, kappa, make_filter

METHODS = ("E", "ELOG", "ST", "MED", "TM")


class ScaleDegenerateError(ValueError):
    """A per-scale statistic is not strictly positive, so its log is undefined."""

    def __init__(self, m, method, value):
        super().__init__(f"scale m={m}: {method} statistic is {value!r}, log undefined")
        self.m = m


@dataclass(frozen=True)
class EstimatorConfig:
    method: str = "E"
    p: float = 0.5
    beta: float = 2.0
    trim: float = 0.05
    filter: FilterSpec = field(default_factory=lambda: make_filter("d4"))
    M: int = 5

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.M < 2:
            raise ValueError("M must be >= 2")
        if not 0 < self.p < 1:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not 0 <= self.trim < 0.5:
            raise ValueError("trim must lie in [0, 0.5)")

    @property
    def label(self) -> str:
        if self.method == "E":
            return f"E(p={self.p:g})" if self.beta == 2 else f"E(p={self.p:g},beta={self.beta:g})"
        if self.method == "ELOG":
            return f"ELOG(p={self.p:g})"
        if self.method == "TM" and self.trim != 0.05:
            return f"TM(trim={self.trim:g})"
        return self.method

    def to_dict(self) -> dict:
        return {"method": self.method, "p": self.p, "beta": self.beta, "trim": self.trim,
                "filter": self.filter.name, "M": self.M}


@dataclass
class HurstEstimate:
    H_hat: float
    per_scale: list  # (m, statistic, sample_count)
    method: str

    def to_dict(self) -> dict:
        return {
            "H_hat": self.H_hat,
            "method": self.method,
            "per_scale": [{"m": m, "statistic": s, "sample_count": c} for m, s, c in self.per_scale],
        }


def design_vector(M: int) -> np.ndarray:
    """Centered log-scales ``A_m = log m - mean(log 1..M)``."""
    if M < 2:
        raise ValueError("M must be >= 2")
    lm = np.log(np.arange(1, M + 1))
    return lm - lm.mean()


def regression_slope(y, divisor: float = 1.0) -> float:
    """``A . y / (divisor * |A|^2)`` for ``y`` indexed by ``m = 1..len(y)``."""
    y = np.asarray(y, dtype=float)
    A = design_vector(y.shape[0])
    return float(A @ y / (divisor * (A @ A)))


# filtered values below this fraction of max|x| * sum|a| are floating residue of a zero
ZERO_SNAP = 1e-10


def filtered_scales(x, a: FilterSpec, M: int) -> list[np.ndarray]:
    """``[X^{a^m} for m = 1..M]``; scale ``m`` has ``n - m*l`` values.

    Flat stretches of the path (e.g. rounded data) filter to exact zeros
    rather than to ~1e-17 residue, so degenerate scales are detected.
    """
    x = np.asarray(x, dtype=float)
    if len(x) <= M * a.length + 1:
        raise ValueError(f"path of length {len(x)} too short for M={M}, l={a.length}")
    tol = ZERO_SNAP * np.max(np.abs(x)) * np.sum(np.abs(a.array))
    out = []
    for m in range(1, M + 1):
        v = apply_filter(x, dilate(a, m))
        v[np.abs(v) <= tol] = 0.0
        out.append(v)
    return out


def _values(x):
    return x.values if hasattr(x, "values") else np.asarray(x, dtype=float)


def _scale_statistic(v: np.ndarray, cfg: EstimatorConfig):
    """Return (statistic, y_m) for one filtered scale."""
    meth = cfg.method
    if meth == "E":
        s = expectile_sorted(np.sort(np.abs(v) ** cfg.beta), cfg.p)
        return s, (np.log(s) if s > 0 else None)
    if meth == "ELOG":
        with np.errstate(divide="ignore"):
            lv = np.log(np.abs(v))
        if not np.all(np.isfinite(lv)):
            return -np.inf, None
        s = expectile_sorted(np.sort(lv), cfg.p)
        return s, s
    sq = v * v
    if meth == "ST":
        s = float(np.mean(sq))
    elif meth == "MED":
        s = sample_median(sq)
    else:
        s = trimmed_mean(sq, cfg.trim)
    return s, (np.log(s) if s > 0 else None)


def _divisor(cfg: EstimatorConfig) -> float:
    if cfg.method == "E":
        return cfg.beta
    if cfg.method == "ELOG":
        return 1.0
    return 2.0


def estimate_hurst(x, cfg: EstimatorConfig | None = None) -> HurstEstimate:
    """Estimate ``H`` from an fBm path (``SamplePath`` or array) with the method in ``cfg``.

    Raises :class:`ScaleDegenerateError` when a scale statistic cannot be
    log-transformed (e.g. an all-zero filtered series of a rounded path).
    """
    cfg = cfg or EstimatorConfig()
    scales = filtered_scales(_values(x), cfg.filter, cfg.M)
    ys, per_scale = [], []
    for m, v in enumerate(scales, start=1):
        stat, y = _scale_statistic(v, cfg)
        if y is None:
            raise ScaleDegenerateError(m, cfg.label, stat)
        ys.append(y)
        per_scale.append((m, float(stat), len(v)))
    return HurstEstimate(regression_slope(ys, _divisor(cfg)), per_scale, cfg.label)


def expectile_hurst_grid(x, ps, beta: float = 2.0, a: FilterSpec | None = None,
                         M: int = 5) -> np.ndarray:
    """``E(p, beta)`` estimates of ``H`` for every ``p`` in ``ps`` from one path.

    Each scale is sorted once and shared across the grid. Entries whose
    statistic is not strictly positive at some scale are NaN.
    """
    a = a or make_filter("d4")
    ps = np.atleast_1d(np.asarray(ps, dtype=float))
    ys = np.empty((M, len(ps)))
    for i, v in enumerate(filtered_scales(_values(x), a, M)):
        e = expectile_sorted(np.sort(np.abs(v) ** beta), ps)
        with np.errstate(divide="ignore", invalid="ignore"):
            ys[i] = np.where(e > 0, np.log(np.where(e > 0, e, 1.0)), np.nan)
    A = design_vector(M)
    return A @ ys / (beta * (A @ A))


def estimate_sigma2(x, a: FilterSpec, H_hat: float) -> float:
    """Moment inversion ``mean((X^a)^2) / kappa(a, H_hat)`` at scale ``m = 1``."""
    if not 0 < H_hat < 1:
        raise ValueError(f"H_hat must lie in (0, 1), got {H_hat}")
    v = apply_filter(_values(x), a)
    return float(np.mean(v * v) / kappa(a, H_hat))
