"""Least-squares and Nadaraya-Watson fits with residuals.

All fits return a :class:`RegressionFit`.  The Epanechnikov smoother runs in
``O(n log n)`` using prefix sums over the sorted design; the kernel is a
quadratic polynomial on its support, so every windowed weight sum is a
combination of three running moments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .kernels import EPANECHNIKOV, KernelSpec, get_kernel

__all__ = [
    "DegenerateDesignError",
    "RegressionFit",
    "fit_ls",
    "fit_ls_known_intercept",
    "deltas",
    "nw_predict",
    "nw_fit",
    "bandwidth_default",
    "bandwidth_regime",
    "nw_bias_theory",
]


class DegenerateDesignError(ValueError):
    pass


@dataclass(frozen=True)
class RegressionFit:
    kind: str
    fitted: np.ndarray
    residuals: np.ndarray
    beta0_hat: Optional[float] = None
    beta1_hat: Optional[float] = None
    s_n: Optional[float] = None
    bandwidth: Optional[float] = None
    kernel: Optional[str] = None
    design_density: Optional[np.ndarray] = field(default=None, repr=False)
    excluded: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.residuals)

    @property
    def excluded_count(self) -> int:
        return 0 if self.excluded is None else int(self.excluded.sum())

    @property
    def usable_residuals(self) -> np.ndarray:
        """Residuals at points where the fit is defined."""
        if self.excluded is None:
            return self.residuals
        return self.residuals[~self.excluded]

    def summary_row(self) -> dict:
        return {
            "kind": self.kind,
            "beta0_hat": self.beta0_hat,
            "beta1_hat": self.beta1_hat,
            "bandwidth": self.bandwidth,
            "n": self.n,
            "excluded_points": self.excluded_count,
        }


def _as_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("x and y must be 1-d sequences of equal length")
    if len(x) < 3:
        raise ValueError("need at least 3 observations")
    return x, y


def fit_ls(x, y) -> RegressionFit:
    """Ordinary least squares for ``y = beta0 + beta1 x``."""
    x, y = _as_pair(x, y)
    xc = x - x.mean()
    s_n = float(np.dot(xc, xc) / len(x))
    if s_n == 0.0:
        raise DegenerateDesignError("all predictor values are equal")
    beta1 = float(np.dot(xc, y - y.mean()) / (len(x) * s_n))
    beta0 = float(y.mean() - beta1 * x.mean())
    fitted = beta0 + beta1 * x
    return RegressionFit("linear", fitted, y - fitted, beta0, beta1, s_n)


def fit_ls_known_intercept(x, y, beta0: float) -> RegressionFit:
    """Least squares for the slope with the intercept held at ``beta0``."""
    x, y = _as_pair(x, y)
    sxx = float(np.dot(x, x))
    if sxx == 0.0:
        raise DegenerateDesignError("all predictor values are zero")
    beta1 = float(np.dot(x, y - beta0) / sxx)
    fitted = beta0 + beta1 * x
    xc = x - x.mean()
    return RegressionFit("linear_known_intercept", fitted, y - fitted, float(beta0), beta1,
                         float(np.dot(xc, xc) / len(x)))


def deltas(fit: RegressionFit, true_beta0: float, true_beta1: float, x) -> np.ndarray:
    """Error minus residual, ``(b0_hat - b0) + (b1_hat - b1) x``."""
    if fit.beta1_hat is None:
        raise ValueError("deltas need a linear fit")
    x = np.asarray(x, dtype=float)
    return (fit.beta0_hat - true_beta0) + (fit.beta1_hat - true_beta1) * x


def _window_sums_epanechnikov(xs, ys, at, b):
    # sum over |at - x_j| <= b of (1 - ((at - x_j)/b)^2) * {1, y_j}
    center = 0.5 * (xs[0] + xs[-1])
    z = (xs - center) / b
    ze = (at - center) / b
    zero = np.zeros(1)
    q0 = np.arange(len(xs) + 1, dtype=float)
    q1 = np.concatenate([zero, np.cumsum(z)])
    q2 = np.concatenate([zero, np.cumsum(z * z)])
    p0 = np.concatenate([zero, np.cumsum(ys)])
    p1 = np.concatenate([zero, np.cumsum(z * ys)])
    p2 = np.concatenate([zero, np.cumsum(z * z * ys)])
    lo = np.searchsorted(xs, at - b, side="left")
    hi = np.searchsorted(xs, at + b, side="right")

    def win(p):
        return p[hi] - p[lo]

    c0, c1, c2 = win(q0), win(q1), win(q2)
    d0, d1, d2 = win(p0), win(p1), win(p2)
    den = c0 - (ze * ze * c0 - 2.0 * ze * c1 + c2)
    num = d0 - (ze * ze * d0 - 2.0 * ze * d1 + d2)
    return 0.75 * den, 0.75 * num, hi - lo


def _window_sums_direct(xs, ys, at, b, kernel, chunk=1024):
    den = np.empty(len(at))
    num = np.empty(len(at))
    for s in range(0, len(at), chunk):
        w = kernel((at[s:s + chunk, None] - xs[None, :]) / b)
        den[s:s + chunk] = w.sum(axis=1)
        num[s:s + chunk] = w @ ys
    return den, num, None


def nw_predict(x, y, b: float, kernel: Union[str, KernelSpec] = EPANECHNIKOV, at=None,
               method: str = "auto"):
    """Nadaraya-Watson estimate at ``at`` (default: the design points).

    Returns ``(m_hat, f_hat, excluded)``; ``f_hat`` is the kernel density of
    the design and ``excluded`` marks points with no kernel mass, where
    ``m_hat`` is NaN.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not b > 0:
        raise ValueError("bandwidth must be positive")
    kernel = get_kernel(kernel)
    at = x if at is None else np.asarray(at, dtype=float)
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    if method == "auto":
        method = "prefix" if kernel.name == "epanechnikov" else "direct"
    if method == "prefix":
        if kernel.name != "epanechnikov":
            raise ValueError("prefix-sum evaluation needs the Epanechnikov kernel")
        den, num, count = _window_sums_epanechnikov(xs, ys, at, b)
        excluded = count == 0
    elif method == "direct":
        den, num, _ = _window_sums_direct(xs, ys, at, b, kernel)
        excluded = den <= 0.0
    else:
        raise ValueError(f"unknown method {method!r}")
    # rounding can leave a tiny positive mass in an empty window
    excluded = excluded | (den <= 1e-12 * max(1.0, float(np.abs(den).max(initial=0.0))))
    with np.errstate(invalid="ignore", divide="ignore"):
        m_hat = np.where(excluded, np.nan, num / np.where(excluded, 1.0, den))
    f_hat = np.where(excluded, 0.0, den) / (len(x) * b)
    return m_hat, f_hat, excluded


def nw_fit(x, y, b: float, kernel: Union[str, KernelSpec] = EPANECHNIKOV,
           method: str = "auto") -> RegressionFit:
    x, y = _as_pair(x, y)
    kernel = get_kernel(kernel)
    m_hat, f_hat, excluded = nw_predict(x, y, b, kernel, method=method)
    return RegressionFit("nadaraya_watson", m_hat, y - m_hat, bandwidth=float(b),
                         kernel=kernel.name, design_density=f_hat, excluded=excluded)


def bandwidth_default(n: int, c: float = 1.0) -> float:
    """``c * n^(-1/5)``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return float(c * n ** -0.2)


def bandwidth_regime(alpha: float) -> dict:
    """Which bandwidth conditions ``b = C n^{-1/5}`` satisfies for memory ``alpha``.

    ``oversmoothing``: ``b sigma_{n,1}^2 / n -> inf`` (needs alpha < 4/5).
    ``remainder``: the second-order remainder conditions of the branch
    that applies (alpha < 1/2: alpha < 4/5; alpha > 1/2: 1/5 < alpha < 4/5).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    oversmoothing = alpha < 0.8
    remainder = alpha < 0.8 if alpha < 0.5 else 0.2 < alpha < 0.8
    return {"alpha": alpha, "oversmoothing": oversmoothing, "remainder": remainder,
            "valid": oversmoothing and remainder}


Smooth = Union[Callable, Sequence[Callable]]


def _derivs(fn: Smooth, y: float, step: float = 1e-4) -> tuple[float, float, float]:
    if callable(fn):
        f0, fp, fm = fn(y), fn(y + step), fn(y - step)
        return float(f0), float((fp - fm) / (2 * step)), float((fp - 2 * f0 + fm) / step ** 2)
    f, d1, d2 = fn
    return float(f(y)), float(d1(y)), float(d2(y))


def nw_bias_theory(m_fn: Smooth, f_fn: Smooth, b: float, kernel: Union[str, KernelSpec], y: float) -> float:
    """Leading Nadaraya-Watson bias ``(b^2 kappa_2 / 2) rho(y) / f(y)``.

    ``rho = (m f)'' - m f'' = m'' f + 2 m' f'``.  ``m_fn`` and ``f_fn`` are
    either ``(g, g', g'')`` triples or plain callables, differentiated
    numerically.
    """
    kernel = get_kernel(kernel)
    m0, m1, m2 = _derivs(m_fn, y)
    f0, f1, _ = _derivs(f_fn, y)
    if f0 <= 0.0:
        raise ValueError(f"design density vanishes at y={y}")
    rho = m2 * f0 + 2.0 * m1 * f1
    return 0.5 * b * b * kernel.second_moment * rho / f0
