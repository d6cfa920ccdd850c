"""Polynomial forms of the innovations, their scalings and rate fits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.fft as sfft

from .lrd import Backend, DistributionSpec, ErrorPath, LrdSpec, ma_autocovariance

__all__ = [
    "RateStudyResult",
    "eps_nr",
    "eps_n2_bruteforce",
    "xi_series",
    "sigma_n1_exact",
    "sigma_nr_asymptotic",
    "reduction_diag",
    "reduction_grid",
    "rate_slope",
]


@dataclass(frozen=True)
class RateStudyResult:
    statistic: str
    n_grid: tuple
    dispersions: tuple
    slope: float
    slope_se: float
    reps: int = 0
    alpha: Optional[float] = None
    backend: str = ""
    seed: int = 0

    @classmethod
    def from_grid(cls, statistic, n_grid, dispersions, **meta) -> "RateStudyResult":
        slope, se = rate_slope(n_grid, dispersions)
        return cls(statistic, tuple(int(n) for n in n_grid), tuple(float(d) for d in dispersions),
                   slope, se, **meta)


def _require_innovations(path: ErrorPath) -> np.ndarray:
    if path.innovations is None:
        raise ValueError(
            f"{path.spec.backend.value} path has no innovations; "
            "second-order sums need the 'ma' backend"
        )
    return path.innovations


def _lagged_filter(eta: np.ndarray, weights: np.ndarray, n: int) -> np.ndarray:
    # out[i] = sum_{j=1}^{M} w_j eta[i + M - j],  i = 0..n-1, weights = [w_0, w_1, .., w_M]
    m = len(weights) - 1
    w = np.array(weights, dtype=float)
    w[0] = 0.0
    if n * (m + 1) <= 200_000:
        return np.convolve(eta, w, mode="valid")
    size = sfft.next_fast_len(n + m, real=True)
    return sfft.irfft(sfft.rfft(eta, size) * sfft.rfft(w, size), size)[m:m + n]


def eps_nr(path: ErrorPath, r: int) -> float:
    """First- or second-order sum of the path.

    ``r = 1`` is the partial sum of the errors.  ``r = 2`` is
    ``sum_i sum_{1<=j1<j2<=M} c_j1 c_j2 eta_{i-j1} eta_{i-j2}`` with the
    innovations on the process scale, evaluated per index as half of
    ``(sum_{j>=1} c_j eta_{i-j})^2 - sum_{j>=1} c_j^2 eta_{i-j}^2``.
    """
    if r == 1:
        return float(np.sum(path.values))
    if r != 2:
        raise ValueError("r must be 1 or 2")
    eta = _require_innovations(path)
    spec = path.spec
    n, m = path.n, spec.truncation_m
    if n == 0 or m == 0:
        return 0.0
    c = spec.coefficients
    lagged = _lagged_filter(eta, c, n)
    # diagonal: eta[t]^2 enters once per i whose lag window covers t
    c2 = np.concatenate([[0.0], np.cumsum(c[1:] ** 2)])
    t = np.arange(n + m)
    lo = np.maximum(1, m - t)
    hi = np.minimum(m, n + m - 1 - t)
    weight = np.where(hi >= lo, c2[hi] - c2[np.maximum(lo - 1, 0)], 0.0)
    diag = float(np.dot(eta * eta, weight))
    return spec.innovation_sd ** 2 * 0.5 * (float(np.dot(lagged, lagged)) - diag)


def eps_n2_bruteforce(path: ErrorPath) -> float:
    """Direct triple loop over ``i`` and ``j1 < j2``; for checking only."""
    eta = _require_innovations(path) * path.spec.innovation_sd
    c = path.spec.coefficients
    m = path.spec.truncation_m
    total = 0.0
    for i in range(path.n):
        base = i + m  # array index of eta_i
        for j1 in range(1, m + 1):
            a = c[j1] * eta[base - j1]
            for j2 in range(j1 + 1, m + 1):
                total += a * c[j2] * eta[base - j2]
    return total


def xi_series(path: ErrorPath) -> np.ndarray:
    """``eps_i`` minus its own innovation, ``i = 1..n``."""
    _require_innovations(path)
    return path.values - path.scaled_innovations()


def sigma_n1_exact(spec: LrdSpec, n: int) -> float:
    """Exact standard deviation of the partial sum of ``n`` errors.

    Uses ``Var = sum_{|h|<n} (n - |h|) gamma(h)`` with the MA autocovariances.
    fGn and i.i.d. specs have closed forms (``n^H`` and ``sqrt(n)``).
    """
    if n < 1:
        raise ValueError("n must be positive")
    if spec.backend is Backend.IID:
        return float(np.sqrt(n))
    if spec.backend is Backend.FGN:
        return float(n ** spec.hurst)
    gamma = ma_autocovariance(spec, n - 1)
    h = np.arange(1, n)
    var = n * gamma[0] + 2.0 * np.dot(n - h, gamma[1:n])
    return float(np.sqrt(var))


def sigma_nr_asymptotic(alpha: float, n, r: int = 1):
    """Scaling proxy ``n^{(2 - r alpha)/2}`` (slowly varying factor set to 1)."""
    if r not in (1, 2):
        raise ValueError("r must be 1 or 2")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if r * alpha >= 1.0:
        raise ValueError(f"r*alpha = {r * alpha:g} >= 1: no long-memory scaling for this order")
    out = np.asarray(n, dtype=float) ** ((2.0 - r * alpha) / 2.0)
    return float(out) if out.ndim == 0 else out


def reduction_grid(values: np.ndarray, points: int = 512) -> np.ndarray:
    if len(values) == 0:
        return np.zeros(0)
    return np.linspace(values.min() - 1.0, values.max() + 1.0, points)


def reduction_diag(
    path: ErrorPath,
    dist: DistributionSpec,
    p: int = 1,
    grid: Optional[Sequence[float]] = None,
) -> float:
    """Sup of ``|K_n(x) + sum_{r<=p} (-1)^{r-1} F^{(r)}(x) eps_{n,r}|``.

    The sup runs over ``grid`` (default: 512 points spanning the sample
    range +-1) and over both one-sided limits at every jump of ``K_n``.
    """
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    n = path.n
    if n == 0:
        return 0.0
    sums = [eps_nr(path, r) for r in range(1, p + 1)]
    xs = np.sort(path.values)
    grid = reduction_grid(xs) if grid is None else np.asarray(grid, dtype=float)

    def smooth(x):
        out = -n * dist.cdf(x)
        for r, s in enumerate(sums, start=1):
            out = out + (-1) ** (r - 1) * dist.derivative(r, x) * s
        return out

    on_grid = np.searchsorted(xs, grid, side="right") + smooth(grid)
    jumps, first = np.unique(xs, return_index=True)
    counts_right = np.searchsorted(xs, jumps, side="right")
    at_jumps = smooth(jumps)
    right = counts_right + at_jumps
    left = first + at_jumps
    return float(max(np.abs(on_grid).max(initial=0.0), np.abs(right).max(), np.abs(left).max()))


def rate_slope(n_grid: Sequence[float], dispersions: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope of ``log dispersion`` on ``log n`` and its standard error."""
    n_grid = np.asarray(n_grid, dtype=float)
    d = np.asarray(dispersions, dtype=float)
    if n_grid.shape != d.shape or len(d) < 3:
        raise ValueError("need at least 3 (n, dispersion) pairs")
    if np.any(d <= 0) or np.any(n_grid <= 0):
        raise ValueError("dispersions and n must be positive")
    lx, ly = np.log(n_grid), np.log(d)
    xc = lx - lx.mean()
    sxx = float(np.dot(xc, xc))
    if sxx == 0.0:
        raise ValueError("n grid must contain distinct values")
    slope = float(np.dot(xc, ly - ly.mean()) / sxx)
    resid = ly - ly.mean() - slope * xc
    dof = len(d) - 2
    se = float(np.sqrt(np.dot(resid, resid) / dof / sxx)) if dof > 0 else 0.0
    return slope, se
