"""Smoothing kernels shared by kernel regression and density estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["KernelSpec", "EPANECHNIKOV", "GAUSSIAN", "get_kernel"]


@dataclass(frozen=True)
class KernelSpec:
    """A symmetric probability density used as a smoothing kernel.

    ``second_moment`` is ``int u^2 K(u) du``; ``support`` is the radius of
    the support (``inf`` for the Gaussian).
    """

    name: str
    second_moment: float
    support: float

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.name == "epanechnikov":
            return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)
        return np.exp(-0.5 * u * u) / np.sqrt(2.0 * np.pi)


EPANECHNIKOV = KernelSpec("epanechnikov", 0.2, 1.0)
GAUSSIAN = KernelSpec("gaussian", 1.0, np.inf)

_KERNELS = {k.name: k for k in (EPANECHNIKOV, GAUSSIAN)}


def get_kernel(kernel) -> KernelSpec:
    if isinstance(kernel, KernelSpec):
        return kernel
    try:
        return _KERNELS[str(kernel).lower()]
    except KeyError:
        raise ValueError(f"unknown kernel {kernel!r}; choose from {sorted(_KERNELS)}") from None
