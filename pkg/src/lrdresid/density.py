"""Kernel density estimation from residuals.

``conjecture_diag`` is exploratory: it tabulates the Monte Carlo spread of
the residual-based density error at one point, scaled by ``n / sigma_{n,2}``,
for a bandwidth ``h = C n^{-gamma}``.  Nothing here establishes the limit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.integrate import trapezoid

from .kernels import GAUSSIAN, KernelSpec, get_kernel
from .lrd import gaussian_family, generate_path, make_spec
from .mc import draw_design, map_reps
from .regress import fit_ls
from .streams import StreamKey, make_stream, named_stream_id
from .sums import sigma_nr_asymptotic

__all__ = [
    "DensityEstimate",
    "ConjectureConfig",
    "pr_density",
    "bandwidth_feasibility",
    "conjecture_diag",
]


@dataclass(frozen=True)
class DensityEstimate:
    grid: np.ndarray
    values: np.ndarray
    bandwidth: float
    kernel: KernelSpec
    n: int = 0

    def integral(self) -> float:
        return float(trapezoid(self.values, self.grid))

    def rows(self):
        for x, v in zip(self.grid, self.values):
            yield {"x": float(x), "fhat": float(v), "h": self.bandwidth, "n": self.n,
                   "kernel": self.kernel.name}


def pr_density(sample, h: float, kernel: Union[str, KernelSpec] = GAUSSIAN, grid=None,
               chunk: int = 2048) -> DensityEstimate:
    """``(1 / (n h)) sum_i K((x - s_i) / h)`` on ``grid``.

    The default grid is 512 points over the sample range +-5 bandwidths.
    """
    s = np.asarray(sample, dtype=float)
    if not h > 0:
        raise ValueError("bandwidth must be positive")
    if len(s) < 1:
        raise ValueError("need at least one observation")
    kernel = get_kernel(kernel)
    if grid is None:
        grid = np.linspace(s.min() - 5 * h, s.max() + 5 * h, 512)
    grid = np.asarray(grid, dtype=float)
    values = np.empty(len(grid))
    for a in range(0, len(grid), chunk):
        u = (grid[a:a + chunk, None] - s[None, :]) / h
        values[a:a + chunk] = kernel(u).sum(axis=1)
    values /= len(s) * h
    return DensityEstimate(grid, values, float(h), kernel, len(s))


def bandwidth_feasibility(alpha: float, gamma: float) -> dict:
    """Check the two limits for ``h ~ n^{-gamma}`` when ``sigma_{n,2} ~ n^{1-alpha}``.

    ``feasible_bias``: ``n h^5 -> 0``, i.e. ``1 - 5 gamma < 0``.
    ``feasible_lrd``: ``sigma_{n,2} h -> inf``, i.e. ``1 - alpha - gamma > 0``.
    """
    bias_exponent = 1.0 - 5.0 * gamma
    lrd_exponent = 1.0 - alpha - gamma
    return {
        "feasible_bias": bias_exponent < 0,
        "feasible_lrd": lrd_exponent > 0,
        "bias_exponent": bias_exponent,
        "lrd_exponent": lrd_exponent,
    }


@dataclass(frozen=True)
class ConjectureConfig:
    alpha: float = 0.3
    n_grid: Sequence[int] = (2048, 4096, 8192)
    reps: int = 200
    h_const: float = 1.0
    h_exponent: float = 0.21
    x0: float = 0.0
    kernel: str = "gaussian"
    backend: str = "ma"
    beta0: float = 1.0
    beta1: float = 4.0
    x_law: str = "uniform_sym"
    master_seed: int = 0
    threads: int = 1


def conjecture_diag(config: ConjectureConfig) -> list[dict]:
    """Rows ``n, h, dispersion, feasible_bias, feasible_lrd`` (exploratory)."""
    if not 0.0 < config.alpha < 0.5:
        raise ValueError("the diagnostic needs 0 < alpha < 1/2")
    if config.reps < 2:
        raise ValueError("reps must be >= 2")
    kernel = get_kernel(config.kernel)
    f0 = float(gaussian_family(1.0).pdf(config.x0))
    flags = bandwidth_feasibility(config.alpha, config.h_exponent)
    rows = []
    for n in config.n_grid:
        n = int(n)
        h = config.h_const * n ** -config.h_exponent
        spec = make_spec(config.alpha, config.backend, n=n)
        scale = n / sigma_nr_asymptotic(config.alpha, n, 2)

        def one(rep, n=n, h=h, spec=spec, scale=scale):
            stream = make_stream(StreamKey(config.master_seed, named_stream_id("conjecture", n, rep)))
            eps = generate_path(spec, n, stream).values
            x = draw_design(config.x_law, n, stream)
            fit = fit_ls(x, config.beta0 + config.beta1 * x + eps)
            fhat = pr_density(fit.residuals, h, kernel, grid=[config.x0]).values[0]
            return scale * (fhat - f0)

        vals = np.asarray(map_reps(one, config.reps, config.threads))
        rows.append({"n": n, "h": h, "dispersion": float(np.std(vals, ddof=1)),
                     "feasible_bias": flags["feasible_bias"], "feasible_lrd": flags["feasible_lrd"]})
    return rows
