"""Transmitter-harmonics identification scenario.

A colored complex excitation passes a memoryless PA model
``x**2 / (1 + |x|)`` and a complex FIR "duplexer"; the result plus complex
white noise is the signal each estimator has to identify.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from functools import partial

import numpy as np
from scipy.signal import lfilter

from .architectures import ARCHITECTURES, NumericalError
from .tensor import Discretizer

__all__ = [
    "ScenarioConfig",
    "DuplexerResponse",
    "RunResult",
    "MonteCarloResult",
    "gen_colored_noise",
    "pa_nonlinearity",
    "synth_duplexer",
    "simulate_target",
    "mse_curve",
    "moving_average",
    "build_estimator",
    "simulate_run",
    "run_monte_carlo",
]

logger = logging.getLogger(__name__)

MSE_FLOOR_DB = -320.0
ARCH_ORDER = ("tlms2r", "ttlms", "ctlms")


def _default_mu_tensor():
    return {"tlms2r": 0.009, "ttlms": 0.009, "ctlms": 0.075}


def _default_mu_lms():
    return {"tlms2r": 0.009, "ttlms": 0.005, "ctlms": 0.009}


@dataclass
class ScenarioConfig:
    n_taps: int = 16
    rank: int = 10
    order: int = 2
    n_bins: int = 32
    delta_x: float = 0.25
    ar_coeff: float = 0.9
    snr_db: float = 10.0
    n_samples: int = 100_000
    n_runs: int = 20
    mu_tensor: dict = field(default_factory=_default_mu_tensor)
    mu_lms: dict = field(default_factory=_default_mu_lms)
    eps: float = 1e-12
    duplexer_decay: float = 4.0
    seed: int = 0
    smoothing: int = 512
    steady_fraction: float = 0.1

    def __post_init__(self):
        if self.order != 2:
            raise ValueError("complex architectures use order 2 (real and imaginary part)")
        if not 0 <= self.ar_coeff < 1:
            raise ValueError(f"ar_coeff must lie in [0, 1), got {self.ar_coeff}")
        if self.n_runs < 1 or self.n_samples < 1 or self.n_taps < 1 or self.rank < 1:
            raise ValueError("n_runs, n_samples, n_taps and rank must be positive")
        if not 0 < self.steady_fraction <= 1:
            raise ValueError("steady_fraction must lie in (0, 1]")
        for table in (self.mu_tensor, self.mu_lms):
            for arch, mu in table.items():
                if arch not in ARCHITECTURES:
                    raise ValueError(f"unknown architecture {arch!r}")
                if not 0 < mu < 1:
                    raise ValueError(f"step size for {arch} must lie in (0, 1), got {mu}")
        self.discretizer  # validates delta_x / n_bins

    @property
    def discretizer(self) -> Discretizer:
        return Discretizer(self.delta_x, self.n_bins)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class DuplexerResponse:
    taps: np.ndarray
    seed: int | None


@dataclass
class RunResult:
    desired: np.ndarray
    estimates: dict
    stability_violations: dict
    worst_stability: dict

    @property
    def squared_errors(self) -> dict:
        return {k: np.abs(self.desired - v) ** 2 for k, v in self.estimates.items()}


def gen_colored_noise(a: float, n_samples: int, seed=None) -> np.ndarray:
    """AR(1) process ``x_n = a x_{n-1} + sqrt(1 - a^2) nu_n`` with unit-variance circular ``nu``.

    Started from ``x_0 = nu_0`` so the sequence is stationary from the first sample.
    """
    if not 0 <= a < 1:
        raise ValueError(f"AR coefficient must lie in [0, 1), got {a}")
    rng = np.random.default_rng(seed)
    nu = (rng.standard_normal(n_samples) + 1j * rng.standard_normal(n_samples)) / np.sqrt(2)
    if n_samples == 0:
        return nu
    rest = lfilter([np.sqrt(1 - a * a)], [1.0, -a], nu[1:], zi=[a * nu[0]])[0]
    return np.concatenate([nu[:1], rest])


def pa_nonlinearity(x):
    """Saturating PA harmonic model ``x**2 / (1 + |x|)``."""
    return x * x / (1 + np.abs(x))


def synth_duplexer(n_taps: int, seed=None, decay: float = 4.0) -> DuplexerResponse:
    """Random complex FIR with an ``exp(-p / decay)`` envelope, unit l2 norm."""
    if n_taps < 1:
        raise ValueError("duplexer needs at least one tap")
    rng = np.random.default_rng(seed)
    taps = (rng.standard_normal(n_taps) + 1j * rng.standard_normal(n_taps)) / np.sqrt(2)
    taps *= np.exp(-np.arange(n_taps) / decay)
    taps /= np.linalg.norm(taps)
    return DuplexerResponse(taps, seed if isinstance(seed, (int, np.integer)) else None)


def simulate_target(x, h: DuplexerResponse, snr_db: float, seed=None):
    """Desired signal ``d_n = h^T [f(x_n), ..., f(x_{n-P+1})]`` and noisy observation ``y = d + eta``.

    The noise power is set from the empirical power of ``d``; ``snr_db=inf``
    disables the noise.
    """
    taps = h.taps if isinstance(h, DuplexerResponse) else np.asarray(h)
    d = lfilter(taps, [1.0], pa_nonlinearity(np.asarray(x, dtype=np.complex128)))
    if math.isinf(snr_db) and snr_db > 0:
        return d, d.copy()
    rng = np.random.default_rng(seed)
    power = np.mean(np.abs(d) ** 2) / 10 ** (snr_db / 10)
    eta = np.sqrt(power / 2) * (rng.standard_normal(d.size) + 1j * rng.standard_normal(d.size))
    return d, d + eta


def mse_curve(desired_runs, estimate_runs) -> np.ndarray:
    """Run-averaged squared error magnitude in dB, floored at -320 dB."""
    d = np.atleast_2d(np.asarray(desired_runs))
    yhat = np.atleast_2d(np.asarray(estimate_runs))
    if d.shape != yhat.shape:
        raise ValueError(f"run shapes differ: {d.shape} vs {yhat.shape}")
    return to_db(np.mean(np.abs(d - yhat) ** 2, axis=0))


def to_db(power):
    power = np.asarray(power, dtype=np.float64)
    with np.errstate(divide="ignore"):
        out = 10 * np.log10(power)
    return np.maximum(out, MSE_FLOOR_DB)


def moving_average(values, window: int) -> np.ndarray:
    """Trailing moving average; the first ``window - 1`` points average what is available."""
    values = np.asarray(values, dtype=np.float64)
    if window <= 1:
        return values.copy()
    c = np.cumsum(np.concatenate([[0.0], values]))
    n = np.arange(1, values.size + 1)
    lo = np.maximum(n - window, 0)
    return (c[n] - c[lo]) / (n - lo)


def build_estimator(arch: str, cfg: ScenarioConfig, rng=None):
    cls = ARCHITECTURES[arch]
    return cls(cfg.n_taps, cfg.rank, cfg.discretizer, cfg.mu_tensor[arch], cfg.mu_lms[arch],
               eps=cfg.eps, rng=rng)


def _run_seeds(cfg: ScenarioConfig, run: int):
    """Per-run seed sequences: excitation, duplexer, noise, then one per architecture."""
    ss = np.random.SeedSequence(cfg.seed).spawn(cfg.n_runs)[run]
    excite, dup, noise, init = ss.spawn(4)
    return excite, dup, noise, dict(zip(ARCH_ORDER, init.spawn(len(ARCH_ORDER))))


def simulate_run(cfg: ScenarioConfig, run: int, archs=ARCH_ORDER, keep_estimators: bool = False):
    """One Monte-Carlo run: every selected estimator sees the same ``(x, y)`` streams."""
    excite, dup, noise, init = _run_seeds(cfg, run)
    x = gen_colored_noise(cfg.ar_coeff, cfg.n_samples, excite)
    h = synth_duplexer(cfg.n_taps, dup, cfg.duplexer_decay)
    d, y = simulate_target(x, h, cfg.snr_db, noise)
    estimates, violations, worst, estimators = {}, {}, {}, {}
    for arch in archs:
        est = build_estimator(arch, cfg, init[arch])
        try:
            trace = est.run(x, y)
        except NumericalError as exc:
            exc.args = (f"run {run}: {exc}",)
            raise
        estimates[arch] = trace.estimates
        violations[arch] = trace.violations
        worst[arch] = float(trace.stability.max(initial=0.0))
        estimators[arch] = est
    result = RunResult(d, estimates, violations, worst)
    return (result, estimators) if keep_estimators else result


@dataclass
class MonteCarloResult:
    archs: tuple
    mse_db: dict
    """Run-averaged learning curve per architecture, in dB."""
    final_mse_db: dict
    """Per-run steady-state MSE in dB, shape ``(n_runs,)`` per architecture."""
    steady_mse_db: dict
    """Steady-state MSE of the averaged curve, in dB."""
    stability_violations: dict
    worst_stability: dict
    states: list = field(default_factory=list)
    """Final ``state_matrices()`` per run and architecture, if requested."""


def _steady(sq_err, fraction):
    n = sq_err.shape[-1]
    k = max(1, int(round(n * fraction)))
    return sq_err[..., n - k:].mean(axis=-1)


def _one_run(cfg, archs, keep_state, run):
    res, ests = simulate_run(cfg, run, archs, keep_estimators=True)
    sq = res.squared_errors
    fin = {a: _steady(v, cfg.steady_fraction) for a, v in sq.items()}
    state = {a: ests[a].state_matrices() for a in archs} if keep_state else None
    return run, sq, fin, res.stability_violations, res.worst_stability, state


def run_monte_carlo(cfg: ScenarioConfig, archs=ARCH_ORDER, jobs: int = 1,
                    keep_state: bool = False) -> MonteCarloResult:
    """Average squared errors over ``cfg.n_runs`` independent runs.

    Runs are distributed over ``jobs`` worker processes; results are absorbed
    in run order, so the output does not depend on ``jobs``.
    """
    archs = tuple(archs)
    if not archs:
        raise ValueError("select at least one architecture")
    sums = {a: np.zeros(cfg.n_samples) for a in archs}
    finals = {a: np.zeros(cfg.n_runs) for a in archs}
    violations = {a: 0 for a in archs}
    worst = {a: 0.0 for a in archs}
    states = []

    work = partial(_one_run, cfg, archs, keep_state)
    if jobs > 1:
        pool = ProcessPoolExecutor(max_workers=jobs)
        results = pool.map(work, range(cfg.n_runs))
    else:
        pool = None
        results = map(work, range(cfg.n_runs))
    try:
        for run, sq, fin, viol, wst, state in results:
            for a in archs:
                sums[a] += sq[a]
                finals[a][run] = fin[a]
                violations[a] += viol[a]
                worst[a] = max(worst[a], wst[a])
            if keep_state:
                states.append(state)
            logger.info("run %d: %s", run, {a: round(float(to_db(fin[a])), 2) for a in archs})
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    mean_sq = {a: sums[a] / cfg.n_runs for a in archs}
    return MonteCarloResult(
        archs=archs,
        mse_db={a: to_db(v) for a, v in mean_sq.items()},
        final_mse_db={a: to_db(v) for a, v in finals.items()},
        steady_mse_db={a: float(to_db(_steady(v, cfg.steady_fraction))) for a, v in mean_sq.items()},
        stability_violations=violations,
        worst_stability=worst,
        states=states,
    )
