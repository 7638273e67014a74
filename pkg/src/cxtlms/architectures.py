"""Tensor-LMS estimators for Hammerstein system identification.

Four estimators share one skeleton: a CPD lookup tensor maps a discretized
input to a scalar, a tapped delay line (TDL) keeps the last ``P`` tensor
outputs, and a normalized (C)LMS filter combines them.

``TLMS``
    Real tensor, real NLMS (the real-valued baseline).
``TLMS2R``
    Two independent real TLMS pipelines for the real and imaginary paths.
``TTLMS``
    Two real tensors forming ``z = z_re + j z_im`` and one complex CLMS.
``CTLMS``
    One complex tensor and one complex CLMS; the tensor follows the
    Wirtinger gradient ``A <- A + 2 mu e conj(S)``.

Per sample the order is fixed: forward pass, error with pre-update state,
S-matrices for every mode, all tensor updates, then the LMS update.  The TDL
caches the factor rows each tap saw when it entered the line, and the
S-matrices are built from those cached rows.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .filters import LmsState, clms_kernel
from .tensor import CpdTensor, Discretizer

__all__ = [
    "NumericalError",
    "StepOutput",
    "RunTrace",
    "TapDelayLine",
    "TLMS",
    "TLMS2R",
    "TTLMS",
    "CTLMS",
    "ARCHITECTURES",
    "c2r_split",
    "tensor_step_size",
    "aposteriori_error_estimate",
]


class NumericalError(FloatingPointError):
    """Non-finite value inside an estimator."""

    def __init__(self, arch: str, sample: int, what: str = "error"):
        super().__init__(f"{arch}: non-finite {what} at sample {sample}")
        self.arch = arch
        self.sample = sample


def c2r_split(x) -> np.ndarray:
    """``[Re x, Im x]`` as a real vector (works elementwise on arrays)."""
    x = np.asarray(x)
    return np.stack([x.real, x.imag], axis=-1).astype(np.float64)


def tensor_step_size(S, mu_bar: float, eps: float) -> float:
    """Normalized tensor step ``mu_bar / (eps + ||S||_F^2)``."""
    S = np.asarray(S)
    return mu_bar / (eps + float(np.vdot(S, S).real))


def aposteriori_error_estimate(e, mu, S):
    """First-order prediction ``(1 - 2 mu ||S||_F^2) e`` of the next error."""
    S = np.asarray(S)
    return (1.0 - 2.0 * mu * float(np.vdot(S, S).real)) * e


# --------------------------------------------------------------------------
# kernels


@njit(cache=True)
def _tap_value(rows):
    # same association order as tensor.cpd_eval
    M, R = rows.shape
    z = rows[0, 0]
    for m in range(1, M):
        z = z * rows[m, 0]
    for r in range(1, R):
        t = rows[0, r]
        for m in range(1, M):
            t = t * rows[m, r]
        z = z + t
    return z


@njit(cache=True)
def _push(data, tdl_idx, tdl_rows, tdl_z, idx):
    P = tdl_z.shape[0]
    M, _, R = data.shape
    for p in range(P - 1, 0, -1):
        tdl_idx[p, :] = tdl_idx[p - 1, :]
        tdl_rows[p, :, :] = tdl_rows[p - 1, :, :]
        tdl_z[p] = tdl_z[p - 1]
    for m in range(M):
        tdl_idx[0, m] = idx[m]
        for r in range(R):
            tdl_rows[0, m, r] = data[m, idx[m], r]
    tdl_z[0] = _tap_value(tdl_rows[0])
    return tdl_z[0]


@njit(cache=True)
def _dot(w, z):
    acc = w[0] * z[0]
    for p in range(1, z.shape[0]):
        acc = acc + w[p] * z[p]
    return acc


@njit(cache=True)
def _build_s(tdl_idx, tdl_rows, coeffs, mp, out):
    P, M, R = tdl_rows.shape
    out[:, :] = 0
    for p in range(P):
        i = tdl_idx[p, mp]
        for r in range(R):
            h = coeffs[p]
            for m in range(M):
                if m != mp:
                    h = h * tdl_rows[p, m, r]
            out[i, r] += h


@njit(cache=True)
def _frob2(s):
    acc = 0.0
    for i in range(s.shape[0]):
        for r in range(s.shape[1]):
            acc += s[i, r].real * s[i, r].real + s[i, r].imag * s[i, r].imag
    return acc


@njit(cache=True)
def _record(diag, m, nrm, mu):
    diag[m, 0] = nrm
    diag[m, 1] = mu
    diag[m, 2] = abs(1.0 - 2.0 * mu * nrm)


@njit(cache=True)
def _worst_factor(diag):
    worst = 0.0
    for k in range(diag.shape[0]):
        if diag[k, 0] > 0.0 and diag[k, 2] > worst:
            worst = diag[k, 2]
    return worst


@njit(cache=True)
def _tlms_forward(data, tdl_idx, tdl_rows, tdl_z, w, idx):
    _push(data, tdl_idx, tdl_rows, tdl_z, idx)
    return _dot(w, tdl_z)


@njit(cache=True)
def _tlms_update(data, tdl_idx, tdl_rows, tdl_z, w, e, mu_ten, mu_lms, eps, s_buf, diag):
    # real TLMS and CTLMS share this: A += 2 mu e conj(S), conj is a no-op on reals
    M, I, R = data.shape
    for m in range(M):
        _build_s(tdl_idx, tdl_rows, w, m, s_buf[m])
    for m in range(M):
        nrm = _frob2(s_buf[m])
        mu = mu_ten / (eps + nrm)
        _record(diag, m, nrm, mu)
        g = 2.0 * mu * e
        for i in range(I):
            for r in range(R):
                data[m, i, r] += g * np.conj(s_buf[m, i, r])
    clms_kernel(w, mu_lms, eps, e, tdl_z)


@njit(cache=True)
def _tlms_run(data, tdl_idx, tdl_rows, tdl_z, w, idx_seq, y_seq, mu_ten, mu_lms, eps,
              s_buf, diag, yhat_out, stab_out):
    for n in range(y_seq.shape[0]):
        yhat = _tlms_forward(data, tdl_idx, tdl_rows, tdl_z, w, idx_seq[n])
        e = y_seq[n] - yhat
        if not (np.isfinite(e.real) and np.isfinite(e.imag)):
            return n
        _tlms_update(data, tdl_idx, tdl_rows, tdl_z, w, e, mu_ten, mu_lms, eps, s_buf, diag)
        yhat_out[n] = yhat
        stab_out[n] = _worst_factor(diag)
    return -1


@njit(cache=True)
def _ttlms_forward(data_re, data_im, idx_re, rows_re, z_re, idx_im, rows_im, z_im, zbuf, w, idx):
    _push(data_re, idx_re, rows_re, z_re, idx)
    _push(data_im, idx_im, rows_im, z_im, idx)
    for p in range(zbuf.shape[0]):
        zbuf[p] = complex(z_re[p], z_im[p])
    return _dot(w, zbuf)


@njit(cache=True)
def _ttlms_update(data_re, data_im, idx_re, rows_re, idx_im, rows_im, zbuf, w, e,
                  mu_ten, mu_lms, eps, s_buf, diag):
    M, I, R = data_re.shape
    wc = np.conj(w)
    for m in range(M):
        _build_s(idx_re, rows_re, wc, m, s_buf[0, m])
        _build_s(idx_im, rows_im, wc, m, s_buf[1, m])
    for m in range(M):
        nrm = _frob2(s_buf[0, m])
        mu = mu_ten / (eps + nrm)
        _record(diag, m, nrm, mu)
        g_re = 2.0 * mu
        nrm = _frob2(s_buf[1, m])
        mu = mu_ten / (eps + nrm)
        _record(diag, M + m, nrm, mu)
        g_im = 2.0 * mu
        for i in range(I):
            for r in range(R):
                data_re[m, i, r] += g_re * (e * s_buf[0, m, i, r]).real
                data_im[m, i, r] += g_im * (e * s_buf[1, m, i, r]).imag
    clms_kernel(w, mu_lms, eps, e, zbuf)


@njit(cache=True)
def _ttlms_run(data_re, data_im, idx_re, rows_re, z_re, idx_im, rows_im, z_im, zbuf, w,
               idx_seq, y_seq, mu_ten, mu_lms, eps, s_buf, diag, yhat_out, stab_out):
    for n in range(y_seq.shape[0]):
        yhat = _ttlms_forward(data_re, data_im, idx_re, rows_re, z_re, idx_im, rows_im, z_im,
                              zbuf, w, idx_seq[n])
        e = y_seq[n] - yhat
        if not (np.isfinite(e.real) and np.isfinite(e.imag)):
            return n
        _ttlms_update(data_re, data_im, idx_re, rows_re, idx_im, rows_im, zbuf, w, e,
                      mu_ten, mu_lms, eps, s_buf, diag)
        yhat_out[n] = yhat
        stab_out[n] = _worst_factor(diag)
    return -1


# --------------------------------------------------------------------------
# python-side state


@dataclass
class StepOutput:
    estimate: complex
    error: complex
    s_norm_sq: np.ndarray
    """Squared Frobenius norm of each S-matrix, shape ``(paths, M)``."""
    step_sizes: np.ndarray
    """Normalized tensor step size per path and mode."""
    stability: np.ndarray
    """``|1 - 2 mu ||S||_F^2|`` per path and mode."""


@dataclass
class RunTrace:
    estimates: np.ndarray
    stability: np.ndarray
    """Largest ``|1 - 2 mu ||S||_F^2|`` over modes with ``S != 0`` at each sample (0 if none)."""

    @property
    def violations(self) -> int:
        return int(np.count_nonzero(self.stability >= 1.0))


class TapDelayLine:
    """Newest-first buffer of tap indices (0-based), cached factor rows and tensor outputs.

    Zero-padded at construction, so the first ``P - 1`` samples see empty taps.
    """

    def __init__(self, n_taps: int, order: int, rank: int, dtype=np.float64):
        if n_taps < 1:
            raise ValueError("the delay line needs at least one tap")
        self.idx = np.zeros((n_taps, order), dtype=np.int64)
        self.rows = np.zeros((n_taps, order, rank), dtype=dtype)
        self.z = np.zeros(n_taps, dtype=dtype)

    @property
    def depth(self) -> int:
        return self.z.shape[0]


def _check_mu(name, value):
    if not 0 < value < 1:
        raise ValueError(f"{name} must lie in (0, 1), got {value}")
    return float(value)


class _Base:
    name = "base"
    n_paths = 1

    def __init__(self, n_taps, discretizer, mu_tensor, mu_lms, eps):
        self.discretizer = discretizer
        self.n_taps = int(n_taps)
        self.mu_tensor = _check_mu("mu_tensor", mu_tensor)
        self.mu_lms = _check_mu("mu_lms", mu_lms)
        self.eps = float(eps)

    def index(self, x) -> np.ndarray:
        """1-based index vector of a complex input sample."""
        return self.discretizer(c2r_split(x))

    def _indices0(self, x_seq) -> np.ndarray:
        return np.ascontiguousarray(self.discretizer(c2r_split(x_seq)) - 1, dtype=np.int64)

    def _idx0(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64) - 1
        if idx.shape != (self.order,):
            raise IndexError(f"expected {self.order} indices, got shape {idx.shape}")
        if np.any(idx < 0) or np.any(idx >= np.asarray(self.dims)):
            raise IndexError(f"index {idx + 1} out of range for dims {self.dims}")
        return idx

    def step(self, x, y) -> StepOutput:
        yhat = self.forward(self.index(x))
        e = y - yhat
        if not np.isfinite(e):
            raise NumericalError(self.name, -1)
        self.update(e)
        return self._output(yhat, e)

    def _output(self, yhat, e) -> StepOutput:
        d = self._diag.reshape(self.n_paths, self.order, 3)
        return StepOutput(yhat, e, d[..., 0].copy(), d[..., 1].copy(), d[..., 2].copy())

    def _check_finite(self, bad: int, n: int):
        if bad >= 0:
            raise NumericalError(self.name, bad)
        if not all(np.all(np.isfinite(a)) for a in self.state_matrices().values()):
            raise NumericalError(self.name, n - 1, "state")


class TLMS(_Base):
    """Real tensor followed by a real NLMS filter.

    ``step`` takes a length-``M`` real vector of samples, each discretized into
    one tensor index.
    """

    name = "tlms"
    _complex = False

    def __init__(self, n_taps: int, rank: int, discretizer: Discretizer, mu_tensor: float,
                 mu_lms: float, order: int = 2, eps: float = 1e-12, rng=None,
                 tensor: CpdTensor | None = None):
        super().__init__(n_taps, discretizer, mu_tensor, mu_lms, eps)
        if tensor is None:
            tensor = CpdTensor.random((discretizer.n_bins,) * order, rank, rng,
                                      complex_valued=self._complex)
        dtype = np.complex128 if self._complex else np.float64
        if tensor.rank != rank or tensor.order != order:
            raise ValueError("tensor shape does not match rank/order")
        tensor.data = np.ascontiguousarray(tensor.data, dtype=dtype)
        self.tensor = tensor
        self.lms = LmsState.zeros(n_taps, mu_lms, eps, complex_valued=self._complex)
        self.tdl = TapDelayLine(n_taps, order, rank, dtype)
        self._s = np.zeros_like(tensor.data)
        self._diag = np.zeros((order, 3))

    @property
    def order(self) -> int:
        return self.tensor.order

    @property
    def dims(self) -> tuple[int, ...]:
        return self.tensor.dims

    @property
    def tensors(self) -> list[CpdTensor]:
        return [self.tensor]

    def index(self, x) -> np.ndarray:
        return self.discretizer(np.asarray(x, dtype=np.float64))

    def _indices0(self, x_seq) -> np.ndarray:
        return np.ascontiguousarray(self.discretizer(np.asarray(x_seq, dtype=np.float64)) - 1)

    def _scalar(self, v):
        return complex(v) if self._complex else float(v)

    def forward(self, idx) -> complex | float:
        """Push a 1-based index vector into the delay line and return ``w^T z``."""
        t = self.tdl
        return _tlms_forward(self.tensor.data, t.idx, t.rows, t.z, self.lms.weights, self._idx0(idx))

    def output(self) -> complex | float:
        """``w^T z`` over the current delay line, without pushing a new tap."""
        return _dot(self.lms.weights, self.tdl.z)

    def update(self, e) -> None:
        t = self.tdl
        _tlms_update(self.tensor.data, t.idx, t.rows, t.z, self.lms.weights, self._scalar(e),
                     self.mu_tensor, self.mu_lms, self.eps, self._s, self._diag)

    def build_S(self, m_prime: int, path: int = 0) -> np.ndarray:
        """S-matrix of mode ``m_prime`` (1-based) for the current delay line."""
        if path != 0 or not 1 <= m_prime <= self.order:
            raise ValueError(f"invalid path/mode ({path}, {m_prime})")
        out = np.zeros_like(self._s[0])
        t = self.tdl
        _build_s(t.idx, t.rows, self.lms.weights, m_prime - 1, out)
        return out[: self.dims[m_prime - 1]]

    def run(self, x_seq, y_seq) -> RunTrace:
        idx = self._indices0(x_seq)
        y = np.ascontiguousarray(y_seq, dtype=np.complex128 if self._complex else np.float64)
        yhat = np.zeros(y.shape[0], dtype=y.dtype)
        stab = np.zeros(y.shape[0])
        t = self.tdl
        bad = _tlms_run(self.tensor.data, t.idx, t.rows, t.z, self.lms.weights, idx, y,
                        self.mu_tensor, self.mu_lms, self.eps, self._s, self._diag, yhat, stab)
        self._check_finite(bad, y.shape[0])
        return RunTrace(yhat, stab)

    def state_matrices(self) -> dict[str, np.ndarray]:
        out = {f"A{m + 1}": a for m, a in enumerate(self.tensor.factors)}
        out["w"] = self.lms.weights[:, None]
        return out


class CTLMS(TLMS):
    """Complex tensor and complex CLMS on the stacked ``[Re x, Im x]`` index."""

    name = "ctlms"
    _complex = True

    def __init__(self, n_taps: int, rank: int, discretizer: Discretizer, mu_tensor: float,
                 mu_lms: float, eps: float = 1e-12, rng=None, tensor: CpdTensor | None = None):
        super().__init__(n_taps, rank, discretizer, mu_tensor, mu_lms, order=2, eps=eps,
                         rng=rng, tensor=tensor)

    index = _Base.index
    _indices0 = _Base._indices0


class TLMS2R(_Base):
    """Two independent real TLMS pipelines, one per quadrature component.

    Both see the same index vector; the real path learns ``Re y`` and the
    imaginary path ``Im y``.
    """

    name = "tlms2r"
    n_paths = 2

    def __init__(self, n_taps: int, rank: int, discretizer: Discretizer, mu_tensor: float,
                 mu_lms: float, eps: float = 1e-12, rng=None,
                 tensors: Sequence[CpdTensor] | None = None):
        super().__init__(n_taps, discretizer, mu_tensor, mu_lms, eps)
        rng = np.random.default_rng(rng)
        tensors = tensors or [None, None]
        self.real_path, self.imag_path = (
            TLMS(n_taps, rank, discretizer, mu_tensor, mu_lms, order=2, eps=eps, rng=rng, tensor=t)
            for t in tensors
        )
        self.real_path.name, self.imag_path.name = f"{self.name}/re", f"{self.name}/im"

    order = property(lambda self: 2)
    dims = property(lambda self: self.real_path.dims)

    @property
    def _diag(self):
        return np.concatenate([self.real_path._diag, self.imag_path._diag])

    @property
    def tensors(self) -> list[CpdTensor]:
        return [self.real_path.tensor, self.imag_path.tensor]

    def forward(self, idx) -> complex:
        return complex(self.real_path.forward(idx), self.imag_path.forward(idx))

    def output(self) -> complex:
        return complex(self.real_path.output(), self.imag_path.output())

    def update(self, e) -> None:
        self.real_path.update(e.real)
        self.imag_path.update(e.imag)

    def build_S(self, m_prime: int, path: int = 0) -> np.ndarray:
        return (self.real_path, self.imag_path)[path].build_S(m_prime)

    def run(self, x_seq, y_seq) -> RunTrace:
        x = np.stack([np.real(x_seq), np.imag(x_seq)], axis=-1)
        y = np.asarray(y_seq)
        re = self.real_path.run(x, y.real)
        im = self.imag_path.run(x, y.imag)
        return RunTrace(re.estimates + 1j * im.estimates, np.maximum(re.stability, im.stability))

    def state_matrices(self) -> dict[str, np.ndarray]:
        out = {f"re_{k}": v for k, v in self.real_path.state_matrices().items()}
        out.update({f"im_{k}": v for k, v in self.imag_path.state_matrices().items()})
        return out


class TTLMS(_Base):
    """Two real tensors (real and imaginary parts of ``z``) feeding one complex CLMS.

    Tensor updates follow the negative gradient of ``|e|^2`` with respect to
    each real factor: ``2 mu Re{e S}`` for the real-part tensor and
    ``2 mu Im{e S}`` for the imaginary-part tensor, with ``S`` built from
    ``conj(w)``.
    """

    name = "ttlms"
    n_paths = 2

    def __init__(self, n_taps: int, rank: int, discretizer: Discretizer, mu_tensor: float,
                 mu_lms: float, eps: float = 1e-12, rng=None,
                 tensors: Sequence[CpdTensor] | None = None):
        super().__init__(n_taps, discretizer, mu_tensor, mu_lms, eps)
        rng = np.random.default_rng(rng)
        dims = (discretizer.n_bins,) * 2
        if tensors is None:
            tensors = [CpdTensor.random(dims, rank, rng) for _ in range(2)]
        for t in tensors:
            t.data = np.ascontiguousarray(t.data, dtype=np.float64)
        self.tensor_re, self.tensor_im = tensors
        self.lms = LmsState.zeros(n_taps, mu_lms, eps, complex_valued=True)
        self.tdl_re = TapDelayLine(n_taps, 2, rank)
        self.tdl_im = TapDelayLine(n_taps, 2, rank)
        self._z = np.zeros(n_taps, dtype=np.complex128)
        self._s = np.zeros((2,) + self.tensor_re.data.shape, dtype=np.complex128)
        self._diag = np.zeros((4, 3))

    order = property(lambda self: 2)
    dims = property(lambda self: self.tensor_re.dims)

    @property
    def tensors(self) -> list[CpdTensor]:
        return [self.tensor_re, self.tensor_im]

    def _args(self):
        a, b = self.tdl_re, self.tdl_im
        return (self.tensor_re.data, self.tensor_im.data, a.idx, a.rows, a.z, b.idx, b.rows, b.z,
                self._z, self.lms.weights)

    def forward(self, idx) -> complex:
        return _ttlms_forward(*self._args(), self._idx0(idx))

    def output(self) -> complex:
        return _dot(self.lms.weights, self._z)

    def update(self, e) -> None:
        a, b = self.tdl_re, self.tdl_im
        _ttlms_update(self.tensor_re.data, self.tensor_im.data, a.idx, a.rows, b.idx, b.rows,
                      self._z, self.lms.weights, complex(e), self.mu_tensor, self.mu_lms, self.eps,
                      self._s, self._diag)

    def build_S(self, m_prime: int, path: int = 0) -> np.ndarray:
        if path not in (0, 1) or not 1 <= m_prime <= 2:
            raise ValueError(f"invalid path/mode ({path}, {m_prime})")
        t = (self.tdl_re, self.tdl_im)[path]
        out = np.zeros_like(self._s[0, 0])
        _build_s(t.idx, t.rows, np.conj(self.lms.weights), m_prime - 1, out)
        return out[: self.dims[m_prime - 1]]

    def run(self, x_seq, y_seq) -> RunTrace:
        idx = self._indices0(x_seq)
        y = np.ascontiguousarray(y_seq, dtype=np.complex128)
        yhat = np.zeros(y.shape[0], dtype=np.complex128)
        stab = np.zeros(y.shape[0])
        bad = _ttlms_run(*self._args(), idx, y, self.mu_tensor, self.mu_lms, self.eps,
                         self._s, self._diag, yhat, stab)
        self._check_finite(bad, y.shape[0])
        return RunTrace(yhat, stab)

    def state_matrices(self) -> dict[str, np.ndarray]:
        out = {f"re_A{m + 1}": a for m, a in enumerate(self.tensor_re.factors)}
        out.update({f"im_A{m + 1}": a for m, a in enumerate(self.tensor_im.factors)})
        out["w"] = self.lms.weights[:, None]
        return out


ARCHITECTURES = {"tlms2r": TLMS2R, "ttlms": TTLMS, "ctlms": CTLMS}
