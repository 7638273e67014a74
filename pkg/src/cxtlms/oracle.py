"""Brute-force gradient checks for the tensor updates.

The reference cost recomputes each tap's tensor output by dense
materialization, with only the factor of the differentiated mode free and
the other modes pinned to the rows the tap cached when it entered the delay
line.  Central finite differences of that cost are compared against the
increment an estimator actually applies, ``delta_A / mu``.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from .architectures import CTLMS, TLMS, TLMS2R, TTLMS
from .tensor import CpdTensor, Discretizer, dense_materialize

__all__ = [
    "GradCheckReport",
    "fd_gradient_real",
    "fd_gradient_wirtinger",
    "dense_reference_cost",
    "random_small_state",
    "implemented_direction",
    "oracle_direction",
    "check_architecture",
    "GRADCHECK_ARCHS",
]

GRADCHECK_ARCHS = ("tlms", "tlms2r", "ttlms", "ctlms")


@dataclass
class GradCheckReport:
    max_rel_error: float
    worst: tuple
    """``(state, path, mode)`` of the worst comparison."""
    h: float
    n_checks: int = 0

    def passed(self, tol: float = 1e-6) -> bool:
        return self.max_rel_error <= tol


def fd_gradient_real(cost, A, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar cost with respect to a real array."""
    A = np.array(A, dtype=np.float64)
    g = np.zeros_like(A)
    for k in np.ndindex(A.shape):
        orig = A[k]
        A[k] = orig + h
        up = cost(A)
        A[k] = orig - h
        down = cost(A)
        A[k] = orig
        g[k] = (up - down) / (2 * h)
    return g


def fd_gradient_wirtinger(cost, A, h: float = 1e-5) -> np.ndarray:
    """``dJ/dA* = (dJ/dRe A + j dJ/dIm A) / 2`` by central differences."""
    A = np.array(A, dtype=np.complex128)
    g_re = fd_gradient_real(lambda B: cost(B + 1j * A.imag), A.real, h)
    g_im = fd_gradient_real(lambda B: cost(A.real + 1j * B), A.imag, h)
    return 0.5 * (g_re + 1j * g_im)


def _ztilde(tdl, factor, m_prime):
    """Tap outputs with mode ``m_prime`` (0-based) taken from ``factor``."""
    P, M, _ = tdl.rows.shape
    out = np.zeros(P, dtype=np.result_type(factor, tdl.rows))
    for p in range(P):
        mats = [factor if m == m_prime else tdl.rows[p, m][None, :] for m in range(M)]
        dense = dense_materialize(CpdTensor.from_factors(mats))
        lookup = tuple(tdl.idx[p, m] if m == m_prime else 0 for m in range(M))
        out[p] = dense[lookup]
    return out


def dense_reference_cost(est, y, m_prime: int = 1, factor=None, path: int = 0) -> float:
    """Squared error magnitude with one factor matrix replaced by ``factor``.

    ``m_prime`` is 1-based; ``path`` selects the real (0) or imaginary (1)
    tensor for the two-tensor estimators.  With ``factor=None`` the current
    factor is used, which reproduces the estimator's own ``|e|^2`` as long as
    no update has run since the taps were pushed.
    """
    if isinstance(est, TLMS2R):
        sub = (est.real_path, est.imag_path)[path]
        return dense_reference_cost(sub, (np.real(y), np.imag(y))[path], m_prime, factor)
    m = m_prime - 1
    if isinstance(est, TTLMS):
        tensors, tdls = est.tensors, (est.tdl_re, est.tdl_im)
        if factor is None:
            factor = tensors[path].factors[m]
        parts = [tdls[0].z, tdls[1].z]
        parts[path] = _ztilde(tdls[path], factor, m)
        z = parts[0] + 1j * parts[1]
    elif isinstance(est, TLMS):
        if factor is None:
            factor = est.tensor.factors[m]
        z = _ztilde(est.tdl, factor, m)
    else:
        raise TypeError(f"unsupported estimator {type(est).__name__}")
    e = y - np.sum(est.lms.weights * z)
    return float(np.abs(e) ** 2)


def random_small_state(arch: str, rng, max_taps: int = 4, max_rank: int = 3, max_bins: int = 8):
    """Estimator with random factors and weights and a delay line filled by forward passes only."""
    rng = np.random.default_rng(rng)
    P = int(rng.integers(1, max_taps + 1))
    R = int(rng.integers(1, max_rank + 1))
    n_bins = int(rng.choice(np.arange(2, max_bins + 1, 2)))
    disc = Discretizer(1.0, n_bins)
    complex_tensor = arch == "ctlms"
    n_tensors = 2 if arch in ("tlms2r", "ttlms") else 1
    tensors = []
    for _ in range(n_tensors):
        data = rng.standard_normal((2, n_bins, R))
        if complex_tensor:
            data = data + 1j * rng.standard_normal((2, n_bins, R))
        tensors.append(CpdTensor(data, (n_bins, n_bins)))
    kw = dict(mu_tensor=0.5, mu_lms=0.5)
    if arch == "tlms":
        est = TLMS(P, R, disc, order=2, tensor=tensors[0], **kw)
    elif arch == "ctlms":
        est = CTLMS(P, R, disc, tensor=tensors[0], **kw)
    elif arch == "tlms2r":
        est = TLMS2R(P, R, disc, tensors=tensors, **kw)
    else:
        est = TTLMS(P, R, disc, tensors=tensors, **kw)
    weights = [est.real_path.lms, est.imag_path.lms] if arch == "tlms2r" else [est.lms]
    for lms in weights:
        w = rng.standard_normal(P)
        if np.iscomplexobj(lms.weights):
            w = w + 1j * rng.standard_normal(P)
        lms.weights[:] = w
    for _ in range(P):
        est.forward(rng.integers(1, n_bins + 1, size=2))
    y = rng.standard_normal() if arch == "tlms" else complex(*rng.standard_normal(2))
    return est, y


def _paths(est) -> int:
    return 2 if isinstance(est, (TLMS2R, TTLMS)) else 1


def implemented_direction(est, y) -> np.ndarray:
    """``delta_A / mu`` per ``(path, mode)`` from one real update on a copy of ``est``."""
    trial = copy.deepcopy(est)
    before = [t.copy() for t in trial.tensors]
    trial.update(y - trial.output())
    mus = trial._diag.reshape(_paths(trial), trial.order, 3)[..., 1]
    out = {}
    for path, (old, new) in enumerate(zip(before, trial.tensors)):
        for m in range(trial.order):
            out[path, m] = (new.factors[m] - old.factors[m]) / mus[path, m]
    return out


def oracle_direction(est, y, path: int, m_prime: int, h: float = 1e-5) -> np.ndarray:
    """Steepest-descent direction of the reference cost: ``-dJ/dA`` or ``-2 dJ/dA*``."""
    tensor = est.tensors[path]
    A = tensor.factors[m_prime - 1]

    def cost(B):
        return dense_reference_cost(est, y, m_prime, B, path)

    if tensor.is_complex:
        return -2.0 * fd_gradient_wirtinger(cost, A, h)
    return -fd_gradient_real(cost, A, h)


def check_architecture(arch: str, n_states: int = 100, seed=0, h: float = 1e-5) -> GradCheckReport:
    """Compare implemented and finite-difference directions over random small states."""
    rng = np.random.default_rng(seed)
    worst, worst_at, n = 0.0, None, 0
    for s in range(n_states):
        est, y = random_small_state(arch, rng)
        impl = implemented_direction(est, y)
        for (path, m), g_impl in impl.items():
            g_fd = oracle_direction(est, y, path, m + 1, h)
            err = np.linalg.norm(g_impl - g_fd) / max(np.linalg.norm(g_fd), 1e-30)
            n += 1
            if err > worst or worst_at is None:
                worst, worst_at = err, (s, path, m + 1)
    return GradCheckReport(float(worst), worst_at, h, n)
