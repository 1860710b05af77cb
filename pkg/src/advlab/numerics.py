"""Box-constrained vector arithmetic, deterministic random streams, and
numerically stable primitives shared by every other module.

State vectors live in the unit box [0, 1]^d and are plain float64 numpy
arrays; functions here accept either a single vector of shape (d,) or a
batch with shape (..., d) and broadcast over the leading axes.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp as _scipy_logsumexp

# Identifier of the pinned random-bit algorithm; recorded in every output
# artifact so runs stay attributable to an exact generator.
GENERATOR_ID = "numpy-philox4x64-seedseq-v1"


def as_state(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a float64 state array, optionally checking the last axis."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim == 0:
        raise ValueError("state vector must have at least one coordinate")
    if dim is not None and v.shape[-1] != dim:
        raise ValueError(f"expected dimension {dim}, got {v.shape[-1]}")
    return v


def project_box(v) -> np.ndarray:
    """Clamp every coordinate to [0, 1]. Idempotent; rejects non-finite input."""
    v = as_state(v)
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot project non-finite coordinates")
    return np.clip(v, 0.0, 1.0)


def in_box(v) -> bool:
    v = as_state(v)
    return bool(np.all(v >= 0.0) and np.all(v <= 1.0))


def log_sum_exp(values) -> float:
    """log(sum(exp(values))) without overflow for |v| up to ~700."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("log_sum_exp of an empty sequence")
    return float(_scipy_logsumexp(v))


class RngStream:
    """Deterministic random stream keyed by (seed, stream_id).

    Two streams constructed with the same key produce bitwise-equal draw
    sequences on any platform. Streams are single-owner: hand each worker
    its own stream_id instead of sharing one instance.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self._gen = np.random.Generator(np.random.Philox(ss))

    def normal(self, size=None):
        return self._gen.standard_normal(size)

    def uniform(self, size=None):
        return self._gen.random(size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size=size)

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"
