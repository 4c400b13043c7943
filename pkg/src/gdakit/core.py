"""Dense float64 vectors and reproducible counter-based random streams.

Everything downstream assumes 64-bit floats and finite entries; the helpers
here are where those assumptions are enforced.
"""
from __future__ import annotations

import numpy as np


class GdakitError(Exception):
    """Base class for all library errors."""


class DimensionError(GdakitError):
    """Operand shapes or lengths do not line up."""


class ParameterError(GdakitError):
    """A scalar argument is outside its documented domain."""


class ConstructionError(GdakitError):
    """Problem ingredients violate a structural precondition."""


class CapabilityError(GdakitError):
    """The requested operation needs a feature this problem does not have."""


class OracleViolation(GdakitError):
    """A stochastic-oracle consistency check failed; message names the check."""


class ConstraintError(GdakitError):
    """A step-size/probability constraint is violated; message lists the bound."""


class InsufficientDataError(GdakitError):
    """Not enough logged data to compute the requested summary."""


class DivergenceError(GdakitError):
    """A probe or run blew past the divergence guard."""


def as_vec(values, *, what: str = "vector") -> np.ndarray:
    """Coerce to a 1-d float64 array and verify every entry is finite."""
    a = np.asarray(values, dtype=np.float64)
    if a.ndim != 1:
        raise DimensionError(f"{what}: expected 1-d, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ParameterError(f"{what}: non-finite entries")
    return a


def check_finite(a: np.ndarray, what: str = "array") -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise ParameterError(f"{what}: non-finite entries")
    return a


def dot(a, b) -> float:
    """Inner product of two equal-length vectors."""
    va, vb = as_vec(a, what="dot lhs"), as_vec(b, what="dot rhs")
    if va.shape != vb.shape:
        raise DimensionError(f"dot: length mismatch {va.shape[0]} vs {vb.shape[0]}")
    return float(va @ vb)


def norm2(a) -> float:
    """Euclidean norm."""
    va = as_vec(a, what="norm2 arg")
    return float(np.linalg.norm(va))


class RngStream:
    """Reproducible random stream keyed by (base_seed, stream_id).

    Backed by the Philox counter-based generator: two streams built from the
    same key produce identical draw sequences, streams with different ids are
    statistically independent, and results do not depend on thread scheduling
    or platform.
    """

    __slots__ = ("base_seed", "stream_id", "_gen")

    def __init__(self, base_seed: int, stream_id: int = 0):
        self.base_seed = int(base_seed)
        self.stream_id = int(stream_id)
        key = np.array(
            [self.base_seed & 0xFFFFFFFFFFFFFFFF, self.stream_id & 0xFFFFFFFFFFFFFFFF],
            dtype=np.uint64,
        )
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def child(self, stream_id: int) -> "RngStream":
        """Fresh independent stream under the same base seed."""
        return RngStream(self.base_seed, stream_id)

    def gauss(self, dim: int, std: float = 1.0) -> np.ndarray:
        """i.i.d. N(0, std^2) vector; std = 0 returns zeros without consuming state."""
        if dim < 0:
            raise ParameterError(f"gauss: dim must be >= 0, got {dim}")
        if std < 0 or not np.isfinite(std):
            raise ParameterError(f"gauss: std must be finite and >= 0, got {std}")
        if std == 0.0:
            return np.zeros(dim)
        return std * self._gen.standard_normal(dim)

    def standard_normal(self, shape) -> np.ndarray:
        return self._gen.standard_normal(shape)

    def uniform(self) -> float:
        return float(self._gen.random())

    def bernoulli(self, p: float) -> bool:
        if not (0.0 <= p <= 1.0):
            raise ParameterError(f"bernoulli: p must lie in [0, 1], got {p}")
        return self._gen.random() < p

    def integers(self, low: int, high: int | None = None, size=None) -> np.ndarray:
        return self._gen.integers(low, high, size=size)


def gauss_vec(rng: RngStream, dim: int, std: float) -> np.ndarray:
    """Draw an i.i.d. Gaussian vector from the stream (see RngStream.gauss)."""
    return rng.gauss(dim, std)
