"""Deterministic, splittable random streams for Monte Carlo replications.

A stream is a pure function of ``(master_seed, stream_id)``.  The bit
generator is Philox-4x64, a counter-based generator whose 128-bit key is
built from the two integers, so no stream shares state with another and
the mapping does not depend on the order in which streams are created.

Gaussian variates come from numpy's ziggurat transform
(``Generator.standard_normal``); that choice is fixed so published CSVs
stay bit-reproducible.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

__all__ = [
    "StreamKey",
    "RngStream",
    "make_stream",
    "named_stream_id",
    "sample_std_normal",
]

_MASK64 = (1 << 64) - 1

RngStream = np.random.Generator


@dataclass(frozen=True)
class StreamKey:
    master_seed: int
    stream_id: int

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= int(value) <= _MASK64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value}")


def make_stream(key: StreamKey) -> RngStream:
    """Return a fresh generator for ``key``."""
    philox_key = (int(key.master_seed) << 64) | int(key.stream_id)
    return np.random.Generator(np.random.Philox(key=philox_key))


def named_stream_id(*parts) -> int:
    """Stable 64-bit id for a named sub-experiment, e.g. ``("table1", "alpha=0.2", 17)``."""
    text = "\x1f".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


def sample_std_normal(stream: RngStream, n: int) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return stream.standard_normal(n)
