import numpy as np
import pytest

from cxtlms import io
from cxtlms.cli import main
from cxtlms.scenario import ScenarioConfig

SMALL = ["--set", "n_runs=1", "--set", "n_samples=1000"]


def read_curves(path):
    rows = path.read_text().splitlines()
    out = {}
    for line in rows[1:]:
        n, arch, v = line.split(",")
        out.setdefault(arch, []).append(float(v))
    return rows[0], {k: np.array(v) for k, v in out.items()}


class TestRun:
    def test_deterministic_bytes(self, tmp_path):
        for name in ("a", "b"):
            assert main(["run", "--seed", "3", "--out", str(tmp_path / name), *SMALL]) == 0
        for f in ("mse_curves.csv", "mse_curves_smoothed.csv", "summary.csv"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_csv_schema(self, tmp_path):
        main(["run", "--out", str(tmp_path), *SMALL])
        header, curves = read_curves(tmp_path / "mse_curves.csv")
        assert header == "n,arch,mse_db"
        assert list(curves) == ["tlms2r", "ttlms", "ctlms"]
        assert all(c.size == 1000 and np.all(np.isfinite(c)) for c in curves.values())
        raw = (tmp_path / "mse_curves.csv").read_bytes()
        assert b"\r\n" not in raw
        summary = (tmp_path / "summary.csv").read_text().splitlines()
        assert summary[0] == "run,arch,final_mse_db" and len(summary) == 4

    def test_seed_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CX_TLMS_SEED", "5")
        main(["run", "--out", str(tmp_path / "env"), *SMALL])
        main(["run", "--seed", "5", "--out", str(tmp_path / "flag"), *SMALL])
        main(["run", "--seed", "6", "--out", str(tmp_path / "other"), *SMALL])
        env = (tmp_path / "env" / "summary.csv").read_bytes()
        assert env == (tmp_path / "flag" / "summary.csv").read_bytes()
        assert env != (tmp_path / "other" / "summary.csv").read_bytes()

    def test_config_file_and_override(self, tmp_path):
        cfg = tmp_path / "exp.ini"
        cfg.write_text("[scenario]\nn_runs = 1\nn_samples = 400\nmu_tensor.ctlms = 0.05\n"
                       "[experiment]\narch = ctlms\n")
        assert main(["run", "--config", str(cfg), "--arch", "ttlms", "--out", str(tmp_path / "o")]) == 0
        _, curves = read_curves(tmp_path / "o" / "mse_curves.csv")
        assert list(curves) == ["ttlms"] and curves["ttlms"].size == 400

    def test_dump_state_round_trip(self, tmp_path):
        main(["run", "--dump-state", "--arch", "all", "--out", str(tmp_path), *SMALL])
        state = tmp_path / "state" / "run000"
        names = {p.relative_to(state).as_posix() for p in state.rglob("*.csv")}
        assert {"ctlms/A1.csv", "ctlms/w.csv", "ttlms/im_A2.csv", "tlms2r/re_w.csv"} <= names
        a1 = io.read_matrix(state / "ctlms" / "A1.csv")
        assert a1.shape == (32, 10) and np.iscomplexobj(a1)
        assert (state / "ctlms" / "A1.csv").read_text().startswith("rows=32 cols=10 field=complex\n")
        assert io.read_matrix(state / "tlms2r" / "re_A2.csv").dtype == np.float64

    def test_convergence_without_noise(self, tmp_path):
        """Noiseless CTLMS: final-window MSE at least 20 dB below the initial window."""
        main(["run", "--arch", "ctlms", "--out", str(tmp_path), "--set", "snr_db=inf",
              "--set", "n_runs=1", "--set", "n_samples=10000"])
        _, curves = read_curves(tmp_path / "mse_curves.csv")
        lin = 10 ** (curves["ctlms"] / 10)
        w = lin.size // 10
        drop = 10 * np.log10(lin[:w].mean() / lin[-w:].mean())
        assert drop >= 20, f"MSE dropped by {drop:.1f} dB"


class TestExitCodes:
    @pytest.mark.parametrize("argv", [
        ["run", "--arch", "lms"],
        ["run", "--set", "n_runs=0"],
        ["run", "--set", "bogus=1"],
        ["run", "--set", "n_runs"],
        ["frobnicate"],
        ["run", "--jobs", "x"],
    ])
    def test_config_errors(self, argv, tmp_path):
        with pytest.raises(SystemExit) as info:
            code = main(argv + ["--out", str(tmp_path)] if argv[0] == "run" else argv)
            raise SystemExit(code)
        assert info.value.code == 1

    def test_bad_seed_env(self, monkeypatch, tmp_path):
        monkeypatch.setenv("CX_TLMS_SEED", "abc")
        assert main(["run", "--out", str(tmp_path), *SMALL]) == 1

    def test_io_error(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert main(["run", "--out", str(blocker / "sub"), *SMALL]) == 3

    def test_numeric_abort(self, tmp_path, monkeypatch):
        import cxtlms.scenario as sc

        real = sc.simulate_target

        def poisoned(*args, **kw):
            d, y = real(*args, **kw)
            y[123] = np.nan
            return d, y

        monkeypatch.setattr(sc, "simulate_target", poisoned)
        assert main(["run", "--out", str(tmp_path), *SMALL]) == 2
        assert not (tmp_path / "mse_curves.csv").exists()


class TestOtherCommands:
    def test_complexity(self, capsys):
        assert main(["complexity", "--count"]) == 0
        out = capsys.readouterr().out
        line = next(l for l in out.splitlines() if l.startswith("TLMS-2R") and "forward" in l)
        assert line.split()[2:5] == ["52", "48", "0"]

    def test_gradcheck(self, capsys):
        assert main(["gradcheck", "--states", "5", "--arch", "ctlms"]) == 0
        assert "PASS" in capsys.readouterr().out

    def test_gradcheck_unknown_arch(self):
        assert main(["gradcheck", "--arch", "nope"]) == 1

    def test_plotscript(self, tmp_path):
        assert main(["plotscript", "--out", str(tmp_path), "--arch", "ctlms"]) == 0
        text = (tmp_path / "plot_mse.gp").read_text()
        assert "mse_curves.csv" in text and "ctlms" in text and "ttlms" not in text


class TestIo:
    @pytest.mark.parametrize("v, text", [(0.1, "0.10000000000000001"), (1 - 2j, "1-2j"), (-3.5, "-3.5")])
    def test_format(self, v, text):
        assert io.format_value(v) == text

    def test_matrix_round_trip(self, tmp_path, rng):
        a = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        io.write_matrix(tmp_path / "m.csv", a)
        np.testing.assert_array_equal(io.read_matrix(tmp_path / "m.csv"), a)

    def test_refuses_non_finite(self, tmp_path):
        with pytest.raises(FloatingPointError):
            io.write_curves(tmp_path / "c.csv", {"ctlms": np.array([0.0, np.nan])})

    def test_settings(self):
        cfg = io.apply_settings({"snr_db": "inf", "mu_lms.ttlms": "0.01", "arch": "ctlms,ttlms", "jobs": "2"})
        assert cfg.scenario.snr_db == np.inf and cfg.scenario.mu_lms["ttlms"] == 0.01
        assert cfg.archs == ("ctlms", "ttlms") and cfg.jobs == 2
        assert ScenarioConfig().mu_lms["ttlms"] == 0.005
