"""Contamination operators applied to clean fBm paths: additive outliers and rounding.

Two conventions are configurable because they change the experiment
outcome substantially:

* ``db_factor`` sets how an SNR in dB maps to a variance ratio,
  ``noise_var = sigma2 * 10**(-snr_db / db_factor)``. ``db_factor=20``
  (the default) treats -20 dB as a tenfold increment variance;
  ``db_factor=10`` is the textbook power ratio (a hundredfold variance).
* rounding ``mode="increments"`` (default) rounds every increment to the
  nearest integer and re-accumulates; ``mode="path"`` takes the floor of the
  path values.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .synth import SamplePath, increments

ROUNDING_MODES = ("increments", "path")


@dataclass(frozen=True)
class ContaminationSpec:
    """``kind`` is ``outliers`` (``fraction``, ``snr_db``, ``db_factor``) or
    ``rounding`` (``mode``)."""

    kind: str
    fraction: float = 0.05
    snr_db: float = -20.0
    db_factor: float = 20.0
    mode: str = "increments"

    def __post_init__(self):
        if self.kind not in ("outliers", "rounding"):
            raise ValueError(f"unknown contamination kind {self.kind!r}")
        if self.kind == "outliers":
            if not 0 < self.fraction < 1:
                raise ValueError(f"fraction must lie in (0, 1), got {self.fraction}")
            if not math.isfinite(self.snr_db):
                raise ValueError("snr_db must be finite")
            if self.db_factor not in (10.0, 20.0):
                raise ValueError("db_factor must be 10 or 20")
        elif self.mode not in ROUNDING_MODES:
            raise ValueError(f"unknown rounding mode {self.mode!r}")

    @property
    def label(self) -> str:
        return "outliers" if self.kind == "outliers" else "rounded"

    def apply(self, path: SamplePath, sigma2_increment: float, seed: int) -> SamplePath:
        if self.kind == "rounding":
            return round_path(path) if self.mode == "path" else round_increments(path)
        return add_outliers(path, self.fraction, self.snr_db, sigma2_increment, seed,
                            db_factor=self.db_factor)

    def to_dict(self) -> dict:
        if self.kind == "rounding":
            return {"kind": "rounding", "mode": self.mode}
        return {"kind": "outliers", "fraction": self.fraction, "snr_db": self.snr_db,
                "db_factor": self.db_factor}


def noise_variance(sigma2_increment: float, snr_db: float, db_factor: float = 20.0) -> float:
    """``sigma2_increment * 10**(-snr_db / db_factor)``."""
    return sigma2_increment * 10.0 ** (-snr_db / db_factor)


def add_outliers(path: SamplePath, fraction: float, snr_db: float,
                 sigma2_increment: float, seed: int, db_factor: float = 20.0) -> SamplePath:
    """Add Gaussian noise to ``floor(fraction * n)`` randomly chosen increments.

    The chosen indices are drawn without replacement; the path is rebuilt
    from the contaminated increments by cumulative sum, so each outlier is a
    level shift of the path.
    """
    if not 0 <= fraction < 1:
        raise ValueError(f"fraction must lie in [0, 1), got {fraction}")
    g = increments(path)
    n = len(g)
    k = int(math.floor(fraction * n))
    if k == 0:
        return path.with_values(path.values.copy())
    rng = np.random.default_rng(seed)
    idx = rng.choice(n, size=k, replace=False)
    sd = math.sqrt(noise_variance(sigma2_increment, snr_db, db_factor))
    g = g.copy()
    g[idx] += sd * rng.standard_normal(k)
    return path.with_values(np.cumsum(g), contamination="outliers",
                            extra={**path.extra, "outlier_seed": seed})


def round_path(path: SamplePath) -> SamplePath:
    """Floor of every path value."""
    return path.with_values(np.floor(path.values), contamination="rounded",
                            extra={**path.extra, "rounding": "path"})


def round_increments(path: SamplePath) -> SamplePath:
    """Round each increment to the nearest integer and re-accumulate.

    The result is an integer-valued path; half-integers round to even.
    """
    g = np.round(increments(path))
    return path.with_values(np.cumsum(g), contamination="rounded",
                            extra={**path.extra, "rounding": "increments"})
