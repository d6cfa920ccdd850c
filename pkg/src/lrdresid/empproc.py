"""Empirical processes of errors and residuals and their sup statistics."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .lrd import DistributionSpec, gaussian_family

__all__ = [
    "Normalization",
    "EmpSupResult",
    "ks_sup",
    "l_sup",
    "estimate_theta",
    "scale_from_theta",
    "eval_process",
]


class Normalization(str, enum.Enum):
    BY_N = "n"
    BY_SIGMA_N1 = "sigma_n1"
    BY_SIGMA_N2 = "sigma_n2"
    BY_SQRT_N = "sqrt_n"


@dataclass(frozen=True)
class EmpSupResult:
    """Sup of ``|sum_i (1{s_i <= x} - F(x))|`` over the real line.

    ``sup_value`` is the sup divided by ``n`` (a Kolmogorov distance);
    ``scaled_value`` is the raw sup divided by ``normalizer``.  When
    ``from_left`` is true the sup is the left limit at ``argmax_x``.
    """

    sup_value: float
    argmax_x: float
    n: int
    normalization: Normalization = Normalization.BY_N
    normalizer: float = 1.0
    from_left: bool = False

    @property
    def raw_sup(self) -> float:
        return self.sup_value * self.n

    @property
    def scaled_value(self) -> float:
        return self.sup_value * self.n / self.normalizer


def _normalizer(normalization: Normalization, n: int, sigma: Optional[float]) -> float:
    if normalization is Normalization.BY_N:
        return float(n)
    if normalization is Normalization.BY_SQRT_N:
        return float(np.sqrt(n))
    if sigma is None or not sigma > 0:
        raise ValueError(f"normalization {normalization.value} needs a positive sigma")
    return float(sigma)


def ks_sup(sample, dist: DistributionSpec, normalization="n", sigma: Optional[float] = None) -> EmpSupResult:
    """Exact sup by enumerating both one-sided limits at every jump.

    Tied observations are grouped, so the step at a repeated value has height
    ``multiplicity / n``.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = len(x)
    if n < 1:
        raise ValueError("need at least one observation")
    normalization = Normalization(normalization)
    jumps, first = np.unique(x, return_index=True)
    after = np.append(first[1:], n) / n
    before = first / n
    cdf = dist.cdf(jumps)
    upper = after - cdf
    lower = cdf - before
    iu, il = int(np.argmax(upper)), int(np.argmax(lower))
    if upper[iu] >= lower[il]:
        value, at, left = float(upper[iu]), float(jumps[iu]), False
    else:
        value, at, left = float(lower[il]), float(jumps[il]), True
    return EmpSupResult(value, at, n, normalization, _normalizer(normalization, n, sigma), left)


def estimate_theta(residuals, h: str = "square") -> float:
    """Plug-in moment estimate ``(1/n) sum H(e_i)``; only ``H(u) = u^2`` is supported.

    The result estimates the variance; the Gaussian scale is its square root
    (see :func:`scale_from_theta`).
    """
    if h != "square":
        raise ValueError(f"unsupported moment function {h!r}")
    r = np.asarray(residuals, dtype=float)
    if len(r) < 2:
        raise ValueError("need at least two residuals")
    return float(np.mean(r * r))


def scale_from_theta(theta_hat: float) -> float:
    if not theta_hat > 0:
        raise ValueError("estimated variance is zero; the scale family is degenerate")
    return float(np.sqrt(theta_hat))


def l_sup(sample, theta_hat: float, family: str = "gaussian", normalization="n",
          sigma: Optional[float] = None) -> EmpSupResult:
    """:func:`ks_sup` against the Gaussian with estimated scale ``theta_hat``."""
    if family != "gaussian":
        raise ValueError("only the Gaussian scale family is supported")
    if not theta_hat > 0:
        raise ValueError("theta_hat must be positive")
    return ks_sup(sample, gaussian_family(theta_hat), normalization, sigma)


def eval_process(sample, dist: DistributionSpec, x, left: bool = False):
    """``sum_i (1{s_i <= x} - F(x))``; with ``left=True`` the left limit at ``x``."""
    s = np.sort(np.asarray(sample, dtype=float))
    xq = np.asarray(x, dtype=float)
    counts = np.searchsorted(s, xq, side="left" if left else "right")
    out = counts - len(s) * dist.cdf(xq)
    return float(out) if out.ndim == 0 else out
