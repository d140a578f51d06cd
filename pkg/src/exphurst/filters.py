"""Discrete variation filters and the exact covariances of filtered fBm."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MOMENT_TOL = 1e-10

# Daubechies-4 high-pass (wavelet) filter, two vanishing moments.
_D4 = (
    0.48296291314453416,
    -0.83651630373780790,
    0.22414386804201339,
    0.12940952255126037,
)


def filter_moments(coeffs, upto: int) -> np.ndarray:
    """Return ``sum_q q**j * a_q`` for ``j = 0..upto``."""
    a = np.asarray(coeffs, dtype=float)
    q = np.arange(len(a), dtype=float)
    return np.array([np.sum(q**j * a) for j in range(upto + 1)])


@dataclass(frozen=True)
class FilterSpec:
    """Filter ``a_0..a_l`` with ``order`` vanishing moments."""

    coeffs: tuple
    order: int
    name: str = ""

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) < 2:
            raise ValueError("a filter needs at least two coefficients")
        if self.order < 1:
            raise ValueError("filter order must be >= 1")
        a = np.asarray(coeffs)
        scale = np.max(np.abs(a))
        mom = filter_moments(a / scale, self.order)
        if np.any(np.abs(mom[:-1]) > MOMENT_TOL):
            raise ValueError(f"filter moments {mom[:-1]} do not vanish up to order {self.order}")
        if abs(mom[-1]) <= MOMENT_TOL:
            raise ValueError(f"moment of order {self.order} vanishes; declared order is too low")

    @property
    def length(self) -> int:
        """Support length ``l`` (number of coefficients minus one)."""
        return len(self.coeffs) - 1

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs)


FILTERS = {
    "inc1": ((1.0, -1.0), 1),
    "d4": (_D4, 2),
}


def make_filter(name: str) -> FilterSpec:
    try:
        coeffs, order = FILTERS[name]
    except KeyError:
        raise ValueError(f"unknown filter {name!r}; known: {sorted(FILTERS)}") from None
    return FilterSpec(coeffs, order, name)


def dilate(a: FilterSpec, m: int) -> FilterSpec:
    """Insert ``m - 1`` zeros between consecutive coefficients of ``a``."""
    if m < 1:
        raise ValueError("dilation factor must be >= 1")
    if m == 1:
        return a
    out = np.zeros(m * a.length + 1)
    out[::m] = a.array
    return FilterSpec(tuple(out), a.order, f"{a.name}^{m}" if a.name else "")


def apply_filter(x, a: FilterSpec) -> np.ndarray:
    """Filter ``x``: ``out[k] = sum_q a_q x[k + l - q]`` for ``k = 0..n-l-1``."""
    x = np.asarray(x, dtype=float)
    if len(x) <= a.length:
        raise ValueError(f"series of length {len(x)} is shorter than the filter (l={a.length})")
    return np.convolve(x, a.array, mode="valid")


def _check_h(H):
    if not (0.0 < H < 1.0):
        raise ValueError(f"H must lie strictly inside (0, 1), got {H}")


def kappa(a: FilterSpec, H: float) -> float:
    """Variance factor ``-1/2 sum_{q,q'} a_q a_q' |q - q'|^{2H}`` of unit-scale filtered fBm."""
    _check_h(H)
    c = a.array
    q = np.arange(len(c))
    d = np.abs(q[:, None] - q[None, :]).astype(float)
    return float(-0.5 * c @ (d ** (2 * H)) @ c)


def filtered_autocovariance(a1: FilterSpec, m1: int, a2: FilterSpec, m2: int,
                            H: float, sigma2: float, j) -> float | np.ndarray:
    """Exact ``E[X^{a1^m1}(i) X^{a2^m2}(i + j)]`` for ``X = sigma * B_H``.

    ``j`` may be an integer array of lags.
    """
    _check_h(H)
    c1, c2 = a1.array, a2.array
    q = np.arange(len(c1))[:, None]
    r = np.arange(len(c2))[None, :]
    base = (m1 * q - m2 * r).astype(float)
    w = c1[:, None] * c2[None, :]
    lags = np.atleast_1d(np.asarray(j, dtype=float))
    pi = np.array([np.sum(w * np.abs(base + jj) ** (2 * H)) for jj in lags])
    cov = -0.5 * sigma2 * pi
    if np.ndim(j) == 0:
        return float(cov[0])
    return cov
