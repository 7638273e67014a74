"""Low-rank CPD lookup tensors and input discretization.

A CPD tensor of order ``M`` and rank ``R`` is stored as ``M`` factor matrices
``A_m`` of shape ``(I_m, R)``; the entry at index ``(i_1, ..., i_M)`` is
``sum_r prod_m A_m[i_m, r]``.

Public functions take 1-based indices and 1-based mode numbers, the
convention used by the discretizer.  The adaptive filters work on 0-based
arrays internally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from operator import add, mul
from typing import Sequence

import numpy as np

__all__ = [
    "CapacityError",
    "CpdTensor",
    "Discretizer",
    "discretize",
    "cpd_eval",
    "hadamard_excluding",
    "dense_materialize",
]

DENSE_LIMIT = 10**6


class CapacityError(ValueError):
    """Raised when a dense materialization would exceed the size guard."""


@dataclass
class CpdTensor:
    """Rank-``R`` CPD tensor over a real or complex field.

    Factors live in one zero-padded stack ``data`` of shape
    ``(M, max(I_m), R)``; :attr:`factors` returns views into it so that
    in-place updates through either are visible to both.
    """

    data: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        self.dims = tuple(int(i) for i in self.dims)
        if self.data.ndim != 3 or self.data.shape[0] != len(self.dims):
            raise ValueError("data must have shape (M, max(I_m), R)")
        if min(self.dims) < 1 or max(self.dims) > self.data.shape[1]:
            raise ValueError(f"invalid mode sizes {self.dims}")
        if self.data.shape[2] < 1:
            raise ValueError("rank must be positive")

    @classmethod
    def from_factors(cls, factors: Sequence[np.ndarray]) -> "CpdTensor":
        factors = [np.atleast_2d(np.asarray(a)) for a in factors]
        if not factors:
            raise ValueError("need at least one factor matrix")
        rank = factors[0].shape[1]
        if any(a.ndim != 2 or a.shape[1] != rank for a in factors):
            raise ValueError("all factor matrices must be 2-D with the same number of columns")
        dtype = np.result_type(np.float64, *factors)
        dims = tuple(a.shape[0] for a in factors)
        data = np.zeros((len(factors), max(dims), rank), dtype=dtype)
        for m, a in enumerate(factors):
            data[m, : a.shape[0]] = a
        return cls(data, dims)

    @classmethod
    def random(
        cls,
        dims: Sequence[int],
        rank: int,
        rng=None,
        complex_valued: bool = False,
        low: float = 0.9,
        high: float = 1.1,
    ) -> "CpdTensor":
        """Factors drawn i.i.d. uniform on ``[low, high]``.

        Complex tensors draw real and imaginary parts independently from the
        same interval.
        """
        rng = np.random.default_rng(rng)
        dims = tuple(int(i) for i in dims)
        shape = (len(dims), max(dims), rank)
        data = rng.uniform(low, high, size=shape)
        if complex_valued:
            data = data + 1j * rng.uniform(low, high, size=shape)
        for m, i in enumerate(dims):
            data[m, i:] = 0
        return cls(data, dims)

    @classmethod
    def zeros(cls, dims: Sequence[int], rank: int, complex_valued: bool = False) -> "CpdTensor":
        dims = tuple(int(i) for i in dims)
        dtype = np.complex128 if complex_valued else np.float64
        return cls(np.zeros((len(dims), max(dims), rank), dtype=dtype), dims)

    @property
    def order(self) -> int:
        return len(self.dims)

    @property
    def rank(self) -> int:
        return self.data.shape[2]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.data)

    @property
    def factors(self) -> list[np.ndarray]:
        return [self.data[m, :i] for m, i in enumerate(self.dims)]

    def copy(self) -> "CpdTensor":
        return CpdTensor(self.data.copy(), self.dims)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.data)))


@dataclass(frozen=True)
class Discretizer:
    """Uniform binning ``floor(x / delta_x) + n_bins / 2``, clamped to ``[1, n_bins]``."""

    delta_x: float
    n_bins: int

    def __post_init__(self):
        if not (self.delta_x > 0 and math.isfinite(self.delta_x)):
            raise ValueError(f"delta_x must be positive and finite, got {self.delta_x}")
        if self.n_bins < 2 or self.n_bins % 2:
            raise ValueError(f"n_bins must be a positive even integer, got {self.n_bins}")

    @classmethod
    def covering(cls, half_width: float, n_bins: int) -> "Discretizer":
        """Bin width ``2 * half_width / n_bins``, so the unclamped bins cover roughly ``[-half_width, half_width)``."""
        return cls(2.0 * half_width / n_bins, n_bins)

    def raw(self, x):
        """Unclamped bin number; monotone non-decreasing in ``x``."""
        return np.floor(np.asarray(x, dtype=np.float64) / self.delta_x).astype(np.int64) + self.n_bins // 2

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if not np.all(np.isfinite(x)):
            raise ValueError("cannot discretize non-finite input")
        out = np.clip(self.raw(x), 1, self.n_bins)
        return int(out) if out.ndim == 0 else out


def discretize(x: float, d: Discretizer) -> int:
    """1-based bin index of a real sample."""
    return d(x)


def _check_index(t: CpdTensor, idx) -> tuple[int, ...]:
    idx = tuple(int(i) for i in idx)
    if len(idx) != t.order:
        raise IndexError(f"index has {len(idx)} entries, tensor has order {t.order}")
    for m, (i, size) in enumerate(zip(idx, t.dims)):
        if not 1 <= i <= size:
            raise IndexError(f"index {i} out of range [1, {size}] in mode {m + 1}")
    return idx


def cpd_eval(t: CpdTensor, idx) -> complex | float:
    """Entry ``sum_r prod_m A_m[i_m, r]`` at a 1-based index.

    Plain left-to-right products and sums, so the routine also runs on
    object arrays (used by the operation counter in :mod:`cxtlms.complexity`).
    """
    idx = _check_index(t, idx)
    rows = [t.data[m, i - 1] for m, i in enumerate(idx)]
    terms = [reduce(mul, (row[r] for row in rows)) for r in range(t.rank)]
    return reduce(add, terms)


def hadamard_excluding(t: CpdTensor, idx, m_prime: int) -> np.ndarray:
    """Element-wise product of the indexed factor rows of every mode except ``m_prime`` (1-based)."""
    if not 1 <= m_prime <= t.order:
        raise ValueError(f"mode {m_prime} out of range [1, {t.order}]")
    idx = _check_index(t, idx)
    out = np.ones(t.rank, dtype=t.data.dtype)
    for m, i in enumerate(idx):
        if m != m_prime - 1:
            out = out * t.data[m, i - 1]
    return out


def dense_materialize(t: CpdTensor, limit: int = DENSE_LIMIT) -> np.ndarray:
    """Full ``I_1 x ... x I_M`` array of the tensor."""
    size = math.prod(t.dims)
    if size > limit:
        raise CapacityError(f"dense tensor would hold {size} entries (limit {limit})")
    factors = t.factors
    acc = factors[0]
    for a in factors[1:]:
        # (..., R) x (I_m, R) -> (..., I_m, R)
        acc = acc[..., None, :] * a
    return acc.sum(axis=-1)
