"""Acceptance checks at the reference settings.

Each test prints one PASS/FAIL line (collected in the terminal summary) and
then asserts, so a failing criterion shows up both in the summary and as a
failed test.
"""
import copy
import os

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES

from cxtlms.architectures import CTLMS, TLMS, TLMS2R
from cxtlms.complexity import complexity_estimate, count_forward
from cxtlms.oracle import GRADCHECK_ARCHS, check_architecture
from cxtlms.scenario import ARCH_ORDER, ScenarioConfig, _run_seeds, gen_colored_noise, run_monte_carlo
from cxtlms.scenario import simulate_target, synth_duplexer
from cxtlms.tensor import CpdTensor, cpd_eval, dense_materialize

HAND_TABLE = {
    ("tlms2r", "forward"): (52, 48, 0),
    ("tlms2r", "backward"): (2114, 21824, 6),
    ("ttlms", "forward"): (84, 80, 0),
    ("ttlms", "backward"): (2180, 21954, 5),
    ("ctlms", "forward"): (104, 148, 0),
    ("ctlms", "backward"): (4228, 44354, 3),
}


def report(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def reference_run():
    cfg = ScenarioConfig()
    assert (cfg.n_runs, cfg.n_samples) == (20, 100_000)
    return run_monte_carlo(cfg, ARCH_ORDER, jobs=os.cpu_count() or 1)


class TestOrdering:
    """Steady-state MSE over the final 10% of samples, 20 runs of 10^5 samples."""

    def test_ctlms_below_ttlms(self, reference_run):
        m = reference_run.steady_mse_db
        report("ordering CTLMS < TTLMS", m["ctlms"] < m["ttlms"],
               f"CTLMS {m['ctlms']:.2f} dB, TTLMS {m['ttlms']:.2f} dB")

    def test_ttlms_below_tlms2r(self, reference_run):
        m = reference_run.steady_mse_db
        report("ordering TTLMS < TLMS-2R", m["ttlms"] < m["tlms2r"],
               f"TTLMS {m['ttlms']:.2f} dB, TLMS-2R {m['tlms2r']:.2f} dB")

    def test_ctlms_margin_over_tlms2r(self, reference_run):
        m = reference_run.steady_mse_db
        gap = m["tlms2r"] - m["ctlms"]
        report("ordering CTLMS at least 1 dB below TLMS-2R", gap >= 1.0, f"gap {gap:.2f} dB")


def test_stability_bound(reference_run):
    v, w = reference_run.stability_violations, reference_run.worst_stability
    ok = all(v[a] == 0 for a in ARCH_ORDER) and all(w[a] < 1 for a in ARCH_ORDER)
    report("stability |1 - 2 mu ||S||^2| < 1", ok,
           ", ".join(f"{a}: {v[a]} violations, worst {w[a]:.4f}" for a in ARCH_ORDER))


@pytest.mark.parametrize("arch", GRADCHECK_ARCHS)
def test_gradient_oracle(arch):
    rep = check_architecture(arch, n_states=100, seed=2024)
    report(f"gradient oracle {arch}", rep.passed(1e-6),
           f"max rel error {rep.max_rel_error:.2e} over {rep.n_checks} comparisons")


def test_cpd_dense_agreement():
    rng = np.random.default_rng(7)
    worst = 0.0
    for k in range(50):
        M = int(rng.integers(2, 5))
        dims = [int(d) for d in rng.integers(2, 9, size=M)]
        R = int(rng.integers(1, 6))
        factors = [rng.standard_normal((d, R)) for d in dims]
        if k % 2:
            factors = [f + 1j * rng.standard_normal(f.shape) for f in factors]
        t = CpdTensor.from_factors(factors)
        dense = dense_materialize(t)
        for idx in np.ndindex(*dims):
            ref = cpd_eval(t, np.array(idx) + 1)
            worst = max(worst, abs(dense[idx] - ref) / abs(ref))
    report("CPD dense vs entry evaluation", worst <= 1e-12,
           f"max rel error {worst:.2e} over 25 real and 25 complex tensors")


def test_complexity_table():
    bad = []
    for (arch, which), expected in HAND_TABLE.items():
        got = tuple(complexity_estimate(arch, 16, 10, 2, 32)[which])
        if got != expected:
            bad.append(f"{arch} {which} {got} != {expected}")
    report("complexity closed form at P=16 R=10 M=2 I=32", not bad, "; ".join(bad) or "all 18 counts exact")


@pytest.mark.parametrize("arch", ARCH_ORDER)
def test_instrumented_forward_counts(arch):
    counted = count_forward(arch, 16, 10, 2)
    formula = complexity_estimate(arch, 16, 10, 2, 32)["forward"]
    report(f"instrumented forward count {arch}", tuple(counted) == tuple(formula),
           f"counted {tuple(counted)}, formula {tuple(formula)}")


def test_scenario_calibration():
    cfg = ScenarioConfig()
    snr, rho = [], []
    for run in range(cfg.n_runs):
        excite, dup, noise, _ = _run_seeds(cfg, run)
        x = gen_colored_noise(cfg.ar_coeff, cfg.n_samples, excite)
        d, y = simulate_target(x, synth_duplexer(cfg.n_taps, dup), cfg.snr_db, noise)
        snr.append(10 * np.log10(np.mean(np.abs(d) ** 2) / np.mean(np.abs(y - d) ** 2)))
        rho.append(np.real(np.vdot(x[:-1], x[1:])) / np.vdot(x, x).real)
    snr_err = np.max(np.abs(np.array(snr) - cfg.snr_db))
    rho_err = np.max(np.abs(np.array(rho) - cfg.ar_coeff))
    report("scenario calibration", snr_err <= 0.3 and rho_err <= 0.02,
           f"worst SNR deviation {snr_err:.3f} dB, worst lag-1 deviation {rho_err:.4f} over {cfg.n_runs} runs")


class TestClosure:
    """Closure checks at the reference dimensions."""

    def _signal(self, n=20_000):
        x = gen_colored_noise(0.9, n, 31)
        d, y = simulate_target(x, synth_duplexer(16, 32), 10.0, 33)
        return x, y

    def test_ctlms_real_data(self):
        cfg = ScenarioConfig()
        x, y = self._signal()
        x, y = x.real, y.real
        t = CpdTensor.random((32, 32), cfg.rank, 5)
        ref = TLMS(16, cfg.rank, cfg.discretizer, 0.075, 0.009, tensor=t.copy())
        est = CTLMS(16, cfg.rank, cfg.discretizer, 0.075, 0.009,
                    tensor=CpdTensor(t.data.astype(complex), t.dims))
        expected = ref.run(np.stack([x, np.zeros_like(x)], axis=-1), y).estimates
        got = est.run(x, y).estimates
        err = max(np.max(np.abs(got - expected)), np.max(np.abs(est.tensor.data - ref.tensor.data)))
        report("closure CTLMS on real data equals real TLMS", err <= 1e-12, f"max deviation {err:.2e}")

    def test_tlms2r_bitwise(self):
        cfg = ScenarioConfig()
        x, y = self._signal()
        est = TLMS2R(16, cfg.rank, cfg.discretizer, 0.009, 0.009, rng=3)
        paths = [copy.deepcopy(est.real_path), copy.deepcopy(est.imag_path)]
        got = est.run(x, y).estimates
        xs = np.stack([x.real, x.imag], axis=-1)
        re = paths[0].run(xs, y.real).estimates
        im = paths[1].run(xs, y.imag).estimates
        ok = np.array_equal(got.real, re) and np.array_equal(got.imag, im)
        ok = ok and all(np.array_equal(a.tensor.data, b.tensor.data)
                        for a, b in zip(paths, (est.real_path, est.imag_path)))
        report("closure TLMS-2R equals two real TLMS runs", ok, "bitwise identical" if ok else "trajectories differ")
