"""Long-memory error paths and the Gaussian scale family.

Three backends produce unit-variance error sequences:

* ``ma``  -- truncated linear process ``eps_i = sd * sum_{k<=M} c_k eta_{i-k}``
  with ``c_0 = 1`` and ``c_k = k^{-(alpha+1)/2}``.  The standard normal
  innovations are kept on the path because second-order sums need them.
* ``fgn`` -- exact fractional Gaussian noise with Hurst index ``1 - alpha/2``
  drawn by circulant embedding (Davies-Harte).
* ``iid`` -- standard normal white noise.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.fft as sfft
from scipy.special import ndtr

from .streams import RngStream

__all__ = [
    "Backend",
    "LrdSpec",
    "ErrorPath",
    "DistributionSpec",
    "CirculantEmbeddingError",
    "default_truncation",
    "ma_coefficients",
    "make_spec",
    "gen_ma_path",
    "gen_fgn_path",
    "gen_iid_path",
    "generate_path",
    "gaussian_family",
    "fgn_autocovariance",
    "ma_autocovariance",
    "embedding_eigenvalues",
]

_DIRECT_SUM_LIMIT = 200_000  # n*M below this -> direct convolution


class Backend(str, enum.Enum):
    MA = "ma"
    FGN = "fgn"
    IID = "iid"


class CirculantEmbeddingError(RuntimeError):
    def __init__(self, min_eigenvalue: float):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(
            f"circulant embedding is not nonnegative definite (min eigenvalue {min_eigenvalue:.3e})"
        )


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def default_truncation(n: int) -> int:
    return max(10 * int(n), 10_000)


@functools.lru_cache(maxsize=64)
def _coefficients(alpha: float, m: int) -> tuple[np.ndarray, float]:
    c = np.ones(m + 1)
    if m:
        c[1:] = np.arange(1, m + 1, dtype=float) ** (-(alpha + 1.0) / 2.0)
    c.setflags(write=False)
    return c, float(1.0 / np.sqrt(np.dot(c, c)))


def ma_coefficients(alpha: float, m: int) -> tuple[np.ndarray, float]:
    """MA weights ``c_0..c_m`` and the innovation scale giving unit variance.

    ``m = 0`` is accepted and yields white noise (``c = [1]``, scale 1).
    The returned array is read-only and shared between calls.
    """
    _check_alpha(alpha)
    if m < 0:
        raise ValueError("truncation must be nonnegative")
    return _coefficients(float(alpha), int(m))


@dataclass(frozen=True)
class LrdSpec:
    """Error-process generator description.

    ``alpha`` is ``None`` only for the ``iid`` backend.  ``truncation_m`` is
    only meaningful for ``ma``.
    """

    alpha: Optional[float]
    backend: Backend = Backend.MA
    truncation_m: int = 10_000

    def __post_init__(self):
        object.__setattr__(self, "backend", Backend(self.backend))
        if self.backend is Backend.IID:
            if self.alpha is not None:
                _check_alpha(self.alpha)
        else:
            if self.alpha is None:
                raise ValueError(f"backend {self.backend.value} needs alpha")
            _check_alpha(self.alpha)
        if self.backend is Backend.MA and self.truncation_m < 0:
            raise ValueError("truncation_m must be nonnegative")

    @property
    def coefficients(self) -> np.ndarray:
        return ma_coefficients(self.alpha, self.truncation_m)[0]

    @property
    def innovation_sd(self) -> float:
        if self.backend is not Backend.MA:
            return 1.0
        return ma_coefficients(self.alpha, self.truncation_m)[1]

    @property
    def hurst(self) -> float:
        return 0.5 if self.alpha is None else 1.0 - self.alpha / 2.0

    def to_dict(self) -> dict:
        d = {"alpha": self.alpha, "backend": self.backend.value}
        if self.backend is Backend.MA:
            d["truncation_m"] = self.truncation_m
            d["innovation_sd"] = self.innovation_sd
        return d


def make_spec(alpha, backend="ma", n: Optional[int] = None, truncation_m: Optional[int] = None) -> LrdSpec:
    """Build a spec, defaulting the MA truncation to ``max(10 n, 10^4)``."""
    backend = Backend(backend)
    if truncation_m is None:
        truncation_m = default_truncation(n) if n is not None else 10_000
    return LrdSpec(alpha=alpha, backend=backend, truncation_m=truncation_m)


@dataclass(frozen=True)
class ErrorPath:
    """A realized error sequence.

    ``innovations`` holds the *standard* normal draws ``eta_{1-M}..eta_n``
    (length ``n + M``); the innovations of the linear process are these
    times ``spec.innovation_sd``.
    """

    values: np.ndarray
    spec: LrdSpec
    innovations: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def has_innovations(self) -> bool:
        return self.innovations is not None

    def scaled_innovations(self) -> np.ndarray:
        """Innovations ``eta_1..eta_n`` on the scale of the linear process."""
        if self.innovations is None:
            raise ValueError(f"{self.spec.backend.value} paths carry no innovations")
        return self.spec.innovation_sd * self.innovations[self.spec.truncation_m:]

    def reconstruct(self) -> np.ndarray:
        """Recompute the values from the stored innovations by direct summation."""
        if self.innovations is None:
            raise ValueError(f"{self.spec.backend.value} paths carry no innovations")
        c = self.spec.coefficients
        full = np.convolve(self.innovations, c)
        m = self.spec.truncation_m
        return self.spec.innovation_sd * full[m:m + self.n]


def _linear_filter(eta: np.ndarray, spec: LrdSpec, n: int, method: str) -> np.ndarray:
    # out[i] = sum_k c_k eta[i + M - k],  i = 0..n-1
    m = spec.truncation_m
    if method == "auto":
        method = "direct" if n * (m + 1) <= _DIRECT_SUM_LIMIT else "fft"
    if method == "direct":
        return np.convolve(eta, spec.coefficients, mode="valid")
    if method != "fft":
        raise ValueError(f"unknown convolution method {method!r}")
    # circular length >= n + M keeps indices M..M+n-1 free of wraparound
    size = sfft.next_fast_len(n + m, real=True)
    out = sfft.irfft(sfft.rfft(eta, size) * _coefficient_spectrum(spec.alpha, m, size), size)
    return out[m:m + n]


@functools.lru_cache(maxsize=16)
def _coefficient_spectrum(alpha: float, m: int, size: int) -> np.ndarray:
    spectrum = sfft.rfft(_coefficients(alpha, m)[0], size)
    spectrum.setflags(write=False)
    return spectrum


def gen_ma_path(
    spec: LrdSpec,
    n: int,
    stream: Optional[RngStream] = None,
    *,
    innovations: Optional[np.ndarray] = None,
    method: str = "auto",
) -> ErrorPath:
    """Draw a truncated linear-process path.

    Pass ``innovations`` (length ``n + M``) instead of ``stream`` to filter
    a fixed innovation vector.  ``method`` is ``"fft"``, ``"direct"`` or
    ``"auto"``.
    """
    if spec.backend is not Backend.MA:
        raise ValueError("gen_ma_path needs an 'ma' spec")
    m = spec.truncation_m
    if innovations is None:
        if stream is None:
            raise ValueError("need a stream or explicit innovations")
        innovations = stream.standard_normal(n + m)
    else:
        innovations = np.asarray(innovations, dtype=float)
        if innovations.shape != (n + m,):
            raise ValueError(f"innovations must have length n + M = {n + m}")
    if n == 0:
        values = np.zeros(0)
    else:
        values = spec.innovation_sd * _linear_filter(innovations, spec, n, method)
    return ErrorPath(values=values, spec=spec, innovations=innovations)


def fgn_autocovariance(hurst: float, lags) -> np.ndarray:
    k = np.abs(np.asarray(lags, dtype=float))
    two_h = 2.0 * hurst
    return 0.5 * (np.abs(k + 1) ** two_h - 2.0 * k ** two_h + np.abs(k - 1) ** two_h)


def ma_autocovariance(spec: LrdSpec, max_lag: int) -> np.ndarray:
    """Exact autocovariances ``gamma(0..max_lag)`` of the truncated MA process."""
    c = spec.coefficients
    size = sfft.next_fast_len(2 * len(c), real=True)
    fc = sfft.rfft(c, size)
    acf = sfft.irfft(fc * np.conj(fc), size)[: max_lag + 1]
    if max_lag + 1 > len(c):
        acf = np.concatenate([acf[: len(c)], np.zeros(max_lag + 1 - len(c))])
    return spec.innovation_sd ** 2 * acf


@functools.lru_cache(maxsize=32)
def _embedding_eigenvalues(hurst: float, n: int) -> np.ndarray:
    row = fgn_autocovariance(hurst, np.arange(n + 1))
    row = np.concatenate([row, row[-2:0:-1]])
    lam = sfft.fft(row).real
    lam.setflags(write=False)
    return lam


def embedding_eigenvalues(alpha: float, n: int) -> np.ndarray:
    """Eigenvalues of the size-``2n`` circulant embedding of the fGn covariance."""
    _check_alpha(alpha)
    return _embedding_eigenvalues(1.0 - alpha / 2.0, int(n))


def gen_fgn_path(alpha: float, n: int, stream: RngStream, tol: float = 1e-10) -> ErrorPath:
    """Exact unit-variance fGn path with Hurst index ``1 - alpha/2``."""
    _check_alpha(alpha)
    spec = LrdSpec(alpha=alpha, backend=Backend.FGN)
    if n == 0:
        return ErrorPath(values=np.zeros(0), spec=spec)
    if n == 1:
        return ErrorPath(values=stream.standard_normal(1), spec=spec)
    lam = _embedding_eigenvalues(spec.hurst, int(n))
    lo = float(lam.min())
    if lo < -tol * float(lam.max()):
        raise CirculantEmbeddingError(lo)
    size = len(lam)
    z = stream.standard_normal(size) + 1j * stream.standard_normal(size)
    w = sfft.fft(np.sqrt(np.clip(lam, 0.0, None) / size) * z)
    return ErrorPath(values=np.ascontiguousarray(w.real[:n]), spec=spec)


def gen_iid_path(n: int, stream: RngStream) -> ErrorPath:
    return ErrorPath(values=stream.standard_normal(n), spec=LrdSpec(alpha=None, backend=Backend.IID))


def generate_path(spec: LrdSpec, n: int, stream: RngStream) -> ErrorPath:
    if spec.backend is Backend.MA:
        return gen_ma_path(spec, n, stream)
    if spec.backend is Backend.FGN:
        return gen_fgn_path(spec.alpha, n, stream)
    return gen_iid_path(n, stream)


_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class DistributionSpec:
    """Centered Gaussian with scale ``theta``: ``F(x) = Phi(x / theta)``."""

    theta: float = 1.0
    family: str = "gaussian"

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")

    def cdf(self, x):
        return ndtr(np.asarray(x, dtype=float) / self.theta)

    def pdf(self, x):
        z = np.asarray(x, dtype=float) / self.theta
        return _INV_SQRT_2PI * np.exp(-0.5 * z * z) / self.theta

    def pdf1(self, x):
        z = np.asarray(x, dtype=float) / self.theta
        return -z * self.pdf(x) / self.theta

    def pdf2(self, x):
        z = np.asarray(x, dtype=float) / self.theta
        return (z * z - 1.0) * self.pdf(x) / self.theta ** 2

    def derivative(self, r: int, x):
        """``r``-th derivative of the CDF (``r = 0`` is the CDF itself)."""
        return (self.cdf, self.pdf, self.pdf1, self.pdf2)[r](x)


def gaussian_family(theta: float) -> DistributionSpec:
    return DistributionSpec(theta=float(theta))
