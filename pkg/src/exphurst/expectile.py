"""Sample and theoretical expectiles, plus the quantile/trimmed-mean statistics.

The sample expectile of order ``p`` is the unique root of the estimating
function

    psi_n(theta) = 1/n sum_i |p - 1{x_i <= theta}| (x_i - theta),

which is continuous, decreasing and linear between consecutive order
statistics. Sorting once and taking prefix sums gives the root exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, stats
from scipy.special import gamma as gamma_fn

# beyond |y| = 12 the standard normal tail mass is below 1e-31
_Y_MAX = 12.0


@dataclass(frozen=True)
class Transform:
    """Subordination function ``h`` applied before taking expectiles.

    tag is one of ``identity``, ``square``, ``abs_pow`` (``|y|**beta``) or
    ``log_abs`` (``log|y|``).
    """

    tag: str
    beta: float = 2.0

    def __post_init__(self):
        if self.tag not in ("identity", "square", "abs_pow", "log_abs"):
            raise ValueError(f"unknown transform {self.tag!r}")
        if self.tag == "abs_pow" and not self.beta > 0:
            raise ValueError("abs_pow needs beta > 0")

    @classmethod
    def parse(cls, text: str) -> "Transform":
        """Parse ``identity``, ``square``, ``log_abs`` or ``abs_pow:1.5``."""
        tag, _, arg = text.partition(":")
        return cls(tag, float(arg)) if arg else cls(tag)

    @property
    def label(self) -> str:
        return f"abs_pow:{self.beta:g}" if self.tag == "abs_pow" else self.tag

    @property
    def hermite_rank(self) -> int:
        return 1 if self.tag == "identity" else 2

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if self.tag == "identity":
            return y
        if self.tag == "square":
            return y * y
        if self.tag == "abs_pow":
            return np.abs(y) ** self.beta
        with np.errstate(divide="ignore"):
            return np.log(np.abs(y))

    def gaussian_mean(self) -> float:
        """``E h(Y)`` for ``Y ~ N(0, 1)``."""
        if self.tag == "identity":
            return 0.0
        if self.tag == "square":
            return 1.0
        if self.tag == "abs_pow":
            b = self.beta
            return 2 ** (b / 2) * gamma_fn((b + 1) / 2) / math.sqrt(math.pi)
        return -(np.euler_gamma + math.log(2.0)) / 2


def _check_p(p):
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)) or np.any(np.isnan(p)):
        raise ValueError(f"expectile order must lie in (0, 1), got {p}")
    return p


def expectile_sorted(xs: np.ndarray, p):
    """Expectile(s) of an already ascending-sorted sample.

    ``p`` may be a scalar or an array; the sort is shared across all orders,
    which is what makes scanning a whole grid of ``p`` cheap.
    """
    n = len(xs)
    if n == 0:
        raise ValueError("expectile of an empty sample")
    p = _check_p(p)
    if n == 1 or xs[0] == xs[-1]:
        out = np.full(p.shape, xs[0])
        return float(out) if out.ndim == 0 else out
    # shift to a central reference point to limit cancellation in prefix sums
    c = xs[n // 2]
    z = xs - c
    S = np.concatenate([[0.0], np.cumsum(z)])
    total = S[-1]
    j = np.arange(1, n + 1)
    # n * psi_n(x_(j)) = p * above[j] - (1 - p) * below[j]
    above = (total - S[1:]) - (n - j) * z
    below = j * z - S[1:]
    ratio = below / (above + below)
    ratio[0] = 0.0
    ratio[-1] = 1.0
    # ratio is nondecreasing; psi_n(x_(j)) > 0 exactly when ratio[j] < p
    k = np.searchsorted(ratio, p, side="left")
    k = np.clip(k, 1, n - 1)
    s_le = S[k]
    s_gt = total - s_le
    theta = (p * s_gt + (1 - p) * s_le) / (p * (n - k) + (1 - p) * k)
    theta = np.clip(theta + c, xs[0], xs[-1])
    return float(theta) if np.ndim(theta) == 0 else theta


def sample_expectile(x, p):
    """Sample expectile of order ``p`` (scalar or array of orders)."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("expectile of an empty sample")
    return expectile_sorted(np.sort(x), p)


def psi_n(x, theta: float, p: float) -> float:
    """Estimating function of the sample expectile, evaluated directly."""
    x = np.asarray(x, dtype=float)
    w = np.where(x <= theta, 1 - p, p)
    return float(np.mean(w * (x - theta)))


def _upper_partial_moment(h: Transform, theta: float) -> float:
    """``E[(h(Y) - theta)_+]`` for ``Y ~ N(0, 1)``."""
    phi, sf = stats.norm.pdf, stats.norm.sf
    if h.tag == "identity":
        return float(phi(theta) - theta * sf(theta))
    if h.tag in ("square", "abs_pow") and theta <= 0:
        return h.gaussian_mean() - theta
    if h.tag == "square":
        a = math.sqrt(theta)
        return float(2 * (a * phi(a) + sf(a) - theta * sf(a)))
    if h.tag == "abs_pow":
        lo = theta ** (1 / h.beta)
        if lo >= _Y_MAX:
            return 0.0
        val, _ = integrate.quad(lambda y: (y**h.beta - theta) * phi(y), lo, _Y_MAX,
                                epsabs=1e-13, epsrel=1e-12, limit=200)
        return 2 * val
    lo = math.exp(theta)
    if lo >= _Y_MAX:
        return 0.0
    if lo > 1e-3:
        val, _ = integrate.quad(lambda y: (math.log(y) - theta) * phi(y), lo, _Y_MAX,
                                epsabs=1e-13, epsrel=1e-12, limit=200)
        return 2 * val
    # far left tail: integrate the small lower piece, E[(theta - h)_+], instead
    low, _ = integrate.quad(lambda y: (theta - math.log(y)) * phi(y), 0.0, lo,
                            epsabs=1e-15, epsrel=1e-12, limit=200)
    return h.gaussian_mean() - theta + 2 * low


def psi_gaussian(h: Transform, theta: float, p: float) -> float:
    """``E[|p - 1{h(Y) <= theta}| (h(Y) - theta)]`` for ``Y ~ N(0, 1)``."""
    upper = _upper_partial_moment(h, theta)
    lower = upper - (h.gaussian_mean() - theta)
    return p * upper - (1 - p) * lower


def theoretical_expectile(h: Transform, p: float, xtol: float = 1e-12) -> float:
    """Expectile of order ``p`` of ``h(Y)``, ``Y`` standard normal."""
    _check_p(p)
    mean = h.gaussian_mean()
    f = lambda t: psi_gaussian(h, t, p)
    f0 = f(mean)
    if f0 == 0.0:
        return mean
    step = 1.0 if f0 > 0 else -1.0
    a, b = mean, mean + step
    for _ in range(200):
        if f(b) * f0 < 0:
            break
        a, b = b, b + step
        step *= 2
    else:
        raise RuntimeError(f"could not bracket the expectile of {h.label} at p={p}")
    lo, hi = min(a, b), max(a, b)
    return optimize.brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)


def sample_quantile(x, q: float) -> float:
    """Linearly interpolated sample quantile; the median of an even-sized
    sample is the mean of the two central order statistics."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("quantile of an empty sample")
    return float(np.quantile(x, q))


def sample_median(x) -> float:
    return sample_quantile(x, 0.5)


def trimmed_mean(x, trim: float) -> float:
    """Mean after dropping ``floor(trim * n)`` values from each end."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("trimmed mean of an empty sample")
    if not 0 <= trim < 0.5:
        raise ValueError(f"trim must be in [0, 0.5), got {trim}")
    return float(stats.trim_mean(x, trim))
