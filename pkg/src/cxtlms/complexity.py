"""Arithmetic cost of the complex tensor-LMS estimators.

``complexity_estimate`` evaluates the closed-form per-sample operation counts
(multiplications, additions, divisions) for the forward and update passes.
``count_forward`` measures the forward pass instead: it runs the reference
routines :func:`cxtlms.tensor.cpd_eval` and :func:`cxtlms.filters.lms_predict`
on :class:`Counted` scalars that tally every real operation.

Counting convention: a complex product costs 4 real multiplications and 2
additions, a complex sum 2 additions, a real-by-complex product 2
multiplications.  Assembling ``z_re + j z_im`` from two real numbers is free.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .filters import LmsState, lms_predict
from .tensor import CpdTensor, cpd_eval

__all__ = ["OpCount", "complexity_estimate", "Counted", "OpCounter", "count_forward", "ARCH_LABELS"]

ARCH_LABELS = {"tlms2r": "TLMS-2R", "ttlms": "TTLMS", "ctlms": "CTLMS"}


class OpCount(NamedTuple):
    mult: int
    add: int
    div: int


def complexity_estimate(arch: str, P: int, R: int, M: int, I_m: int) -> dict[str, OpCount]:
    """Closed-form ``{"forward": ..., "backward": ...}`` operation counts per sample."""
    if min(P, R, M, I_m) < 1:
        raise ValueError("all parameters must be positive")
    if arch == "tlms2r":
        fwd = OpCount(2 * P + 2 * R * (M - 1), 2 * P + 2 * R - 4, 0)
        bwd = OpCount(2 * M * R * (P * (M - 1) + I_m) + 4 * P * (M + 1) + 2,
                      4 * P + 2 * M * R * I_m * (P + 1),
                      2 + 2 * M)
    elif arch == "ttlms":
        fwd = OpCount(4 * P + 2 * R * (M - 1), 4 * P + 2 * R - 4, 0)
        bwd = OpCount(2 * M * R * (P * (M - 1) + I_m) + 4 * P * (M + 2) + 4,
                      12 * P + 2 * M * R * I_m * (P + 1) + 2,
                      1 + 2 * M)
    elif arch == "ctlms":
        fwd = OpCount(4 * P + 4 * R * (M - 1), 6 * P + 2 * R * (M + 1) - 8, 0)
        bwd = OpCount(4 * M * R * (P * (M - 1) + I_m) + 8 * P * (M + 1) + 4,
                      2 * M * R * (P * (M - 1) + 2 * I_m * (P + 1)) + 4 * P * (M + 1) + 2,
                      1 + M)
    else:
        raise ValueError(f"unknown architecture {arch!r}")
    return {"forward": fwd, "backward": bwd}


@dataclass
class OpCounter:
    mult: int = 0
    add: int = 0
    div: int = 0

    def as_count(self) -> OpCount:
        return OpCount(self.mult, self.add, self.div)


class Counted:
    """Scalar wrapper that charges each arithmetic operation to an :class:`OpCounter`."""

    __slots__ = ("value", "counter")

    def __init__(self, value, counter: OpCounter):
        self.value = value
        self.counter = counter

    @property
    def is_complex(self) -> bool:
        return isinstance(self.value, complex)

    def _other(self, other):
        return other.value if isinstance(other, Counted) else other

    def __mul__(self, other):
        b = self._other(other)
        n_complex = self.is_complex + isinstance(b, complex)
        if n_complex == 2:
            self.counter.mult += 4
            self.counter.add += 2
        else:
            self.counter.mult += 1 + n_complex
        return Counted(self.value * b, self.counter)

    __rmul__ = __mul__

    def __add__(self, other):
        b = self._other(other)
        self.counter.add += 2 if self.is_complex and isinstance(b, complex) else 1
        return Counted(self.value + b, self.counter)

    __radd__ = __add__

    def __truediv__(self, other):
        self.counter.div += 1
        return Counted(self.value / self._other(other), self.counter)

    def __repr__(self):
        return f"Counted({self.value!r})"


def _counted(values, counter) -> np.ndarray:
    out = np.empty(np.shape(values), dtype=object)
    for k, v in np.ndenumerate(values):
        out[k] = Counted(complex(v) if np.iscomplexobj(values) else float(v), counter)
    return out


def _tensor(rng, R, M, complex_valued, counter, n_bins=4) -> CpdTensor:
    t = CpdTensor.random((n_bins,) * M, R, rng, complex_valued=complex_valued)
    return CpdTensor(_counted(t.data, counter), t.dims)


def count_forward(arch: str, P: int, R: int, M: int, seed=0) -> OpCount:
    """Operations spent by one forward pass (new tensor output plus filter output)."""
    rng = np.random.default_rng(seed)
    counter = OpCounter()
    idx = (1,) * M
    if arch == "tlms2r":
        for _ in range(2):
            t = _tensor(rng, R, M, False, counter)
            z = _counted(rng.standard_normal(P), counter)
            z[0] = cpd_eval(t, idx)
            lms_predict(LmsState(_counted(rng.standard_normal(P), counter), 0.5), z)
    elif arch == "ttlms":
        parts = []
        for _ in range(2):
            t = _tensor(rng, R, M, False, counter)
            parts.append(cpd_eval(t, idx))
        z = _counted(rng.standard_normal(P) + 1j * rng.standard_normal(P), counter)
        z[0] = Counted(complex(parts[0].value, parts[1].value), counter)
        w = _counted(rng.standard_normal(P) + 1j * rng.standard_normal(P), counter)
        lms_predict(LmsState(w, 0.5), z)
    elif arch == "ctlms":
        t = _tensor(rng, R, M, True, counter)
        z = _counted(rng.standard_normal(P) + 1j * rng.standard_normal(P), counter)
        z[0] = cpd_eval(t, idx)
        w = _counted(rng.standard_normal(P) + 1j * rng.standard_normal(P), counter)
        lms_predict(LmsState(w, 0.5), z)
    else:
        raise ValueError(f"unknown architecture {arch!r}")
    return counter.as_count()
