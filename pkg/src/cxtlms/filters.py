"""Normalized LMS and complex LMS weight updates.

The output convention is ``y_hat = w^T z`` (no conjugation of the weights),
and the normalized update is::

    w <- w + mu * e * conj(z) / (eps + z^H z)

For real data this is ordinary NLMS.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

__all__ = ["LmsState", "lms_predict", "clms_update", "nlms_update"]


@dataclass
class LmsState:
    weights: np.ndarray
    step_size: float
    eps: float = 1e-12

    def __post_init__(self):
        self.weights = np.atleast_1d(np.asarray(self.weights))
        if self.weights.ndim != 1 or self.weights.size < 1:
            raise ValueError("weights must be a non-empty vector")
        if not 0 < self.step_size <= 1:
            raise ValueError(f"step size must lie in (0, 1], got {self.step_size}")
        if self.eps < 0:
            raise ValueError("eps must be non-negative")

    @classmethod
    def zeros(cls, n_taps: int, step_size: float, eps: float = 1e-12, complex_valued: bool = False):
        dtype = np.complex128 if complex_valued else np.float64
        return cls(np.zeros(n_taps, dtype=dtype), step_size, eps)

    @property
    def n_taps(self) -> int:
        return self.weights.size


@njit(cache=True)
def clms_kernel(w, mu, eps, e, z):
    """``w += mu * e * conj(z) / (eps + z^H z)`` in place."""
    norm = 0.0
    for p in range(z.shape[0]):
        norm += z[p].real * z[p].real + z[p].imag * z[p].imag
    g = mu * e / (eps + norm)
    for p in range(z.shape[0]):
        w[p] += g * np.conj(z[p])


def _check_dim(s: LmsState, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z)
    if z.shape != s.weights.shape:
        raise ValueError(f"expected a length-{s.n_taps} regressor, got shape {z.shape}")
    return z


def lms_predict(s: LmsState, z) -> complex | float:
    z = _check_dim(s, z)
    return np.dot(s.weights, z)


def clms_update(s: LmsState, e, z) -> LmsState:
    """In-place normalized CLMS step; returns ``s``."""
    z = _check_dim(s, z)
    if np.iscomplexobj(e) or np.iscomplexobj(z) or np.iscomplexobj(s.weights):
        s.weights = s.weights.astype(np.complex128, copy=False)
        z = z.astype(np.complex128, copy=False)
        e = complex(e)
    else:
        s.weights = s.weights.astype(np.float64, copy=False)
        z = z.astype(np.float64, copy=False)
        e = float(e)
    clms_kernel(s.weights, float(s.step_size), float(s.eps), e, z)
    return s


def nlms_update(s: LmsState, e: float, z) -> LmsState:
    """Real NLMS step (``clms_update`` restricted to real data)."""
    if np.iscomplexobj(e) or np.iscomplexobj(z):
        raise TypeError("nlms_update expects real error and regressor")
    return clms_update(s, e, z)
