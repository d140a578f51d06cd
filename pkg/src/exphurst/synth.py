"""Exact synthesis of fractional Gaussian noise and fractional Brownian motion.

Samples are drawn with the circulant embedding method: the Toeplitz
covariance of fGn is embedded in a circulant matrix of size ``g`` (a power of
two), whose eigenvalues are obtained with one FFT.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

# Eigenvalues below -EIG_RTOL * max(eig) mean the embedding is not PSD.
EIG_RTOL = 1e-9


class EmbeddingError(RuntimeError):
    pass


def mix_seed(*keys: int) -> int:
    """Derive a 64-bit seed from an ordered tuple of integer keys.

    Uses numpy's ``SeedSequence`` hash, so ``mix_seed(master, scenario, rep)``
    is stable across platforms and numpy versions that keep the
    SeedSequence algorithm.
    """
    ss = np.random.SeedSequence([int(k) & 0xFFFFFFFFFFFFFFFF for k in keys])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class HurstParams:
    H: float
    sigma: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.H < 1.0):
            raise ValueError(f"H must lie strictly inside (0, 1), got {self.H}")
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class SamplePath:
    """A finite real sequence plus the parameters that produced it."""

    values: np.ndarray
    H: float | None = None
    sigma: float | None = None
    seed: int | None = None
    kind: str = "fbm"
    contamination: str = "none"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("fgn", "fbm"):
            raise ValueError(f"unknown path kind {self.kind!r}")
        if np.ndim(self.values) != 1 or len(self.values) < 2:
            raise ValueError("a sample path needs at least 2 values")

    def __len__(self):
        return len(self.values)

    @property
    def meta(self) -> dict:
        return {
            "H": self.H,
            "sigma": self.sigma,
            "seed": self.seed,
            "kind": self.kind,
            "contamination": self.contamination,
            "n": len(self.values),
            **self.extra,
        }

    def with_values(self, values, **changes) -> "SamplePath":
        return replace(self, values=np.asarray(values, dtype=float), **changes)


def _check_h(H):
    if not (0.0 < H < 1.0):
        raise ValueError(f"H must lie strictly inside (0, 1), got {H}")


def fgn_autocovariance(H, sigma2, lag):
    """Autocovariance of unit-spacing fGn,
    ``sigma2/2 * (|k+1|^2H - 2|k|^2H + |k-1|^2H)``.

    ``lag`` may be an integer or an integer array.
    """
    _check_h(H)
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    k = np.abs(np.asarray(lag, dtype=float))
    h2 = 2.0 * H
    gamma = 0.5 * sigma2 * (np.abs(k + 1) ** h2 - 2 * k**h2 + np.abs(k - 1) ** h2)
    if np.ndim(gamma) == 0:
        return float(gamma)
    return gamma


def embedding_size(n: int) -> int:
    """Smallest power of two ``g`` with ``g >= 2(n - 1)``."""
    g = 2
    while g < 2 * (n - 1):
        g *= 2
    return g


def circulant_eigenvalues(H: float, n: int) -> np.ndarray:
    """Eigenvalues of the circulant embedding of the unit-variance fGn covariance.

    Raises :class:`EmbeddingError` if the embedding is not nonnegative
    definite; tiny negative values (floating noise) are clipped to zero.
    """
    g = embedding_size(n)
    half = g // 2
    gam = fgn_autocovariance(H, 1.0, np.arange(half + 1))
    row = np.concatenate([gam, gam[-2:0:-1]])
    eig = np.fft.fft(row).real
    top = eig.max()
    if eig.min() < -EIG_RTOL * top:
        raise EmbeddingError(
            f"circulant embedding failed for H={H}, n={n}: min eigenvalue {eig.min():.3e}"
        )
    return np.clip(eig, 0.0, None)


def _fgn_values(H: float, sigma: float, n: int, rng: np.random.Generator) -> np.ndarray:
    eig = circulant_eigenvalues(H, n)
    g = len(eig)
    z = rng.standard_normal(g) + 1j * rng.standard_normal(g)
    # real and imaginary parts are two independent paths; the second is dropped
    w = np.fft.fft(np.sqrt(eig / g) * z)
    return sigma * w.real[:n]


def simulate_fgn(params: HurstParams, n: int, seed: int) -> SamplePath:
    """Simulate ``n`` values of fGn with autocovariance ``fgn_autocovariance(H, sigma**2, .)``.

    Output is a pure function of ``(H, sigma, n, seed)``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = np.random.default_rng(seed)
    vals = _fgn_values(params.H, params.sigma, n, rng)
    return SamplePath(vals, H=params.H, sigma=params.sigma, seed=seed, kind="fgn")


def simulate_fbm(params: HurstParams, n: int, seed: int) -> SamplePath:
    """Simulate ``X(i) = sigma * B_H(i)`` for ``i = 1..n`` (``X(0) = 0`` is not stored).

    The path is the cumulative sum of ``simulate_fgn(params, n, seed)``.
    """
    g = simulate_fgn(params, n, seed)
    return g.with_values(np.cumsum(g.values), kind="fbm")


def increments(path: SamplePath) -> np.ndarray:
    """Recover the increment sequence of an fBm path (first value is ``X(1) - 0``)."""
    return np.diff(path.values, prepend=0.0)
