"""CSV learning curves, matrix dumps, experiment config files."""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .scenario import ARCH_ORDER, ScenarioConfig

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "format_value",
    "write_curves",
    "write_summary",
    "write_matrix",
    "read_matrix",
    "dump_state",
    "gnuplot_script",
]

SEED_ENV = "CX_TLMS_SEED"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    archs: tuple = ARCH_ORDER
    out: Path = Path("results")
    jobs: int = 1
    dump_state: bool = False

    def __post_init__(self):
        if not self.archs:
            raise ConfigError("at least one architecture must be selected")
        if self.jobs < 1:
            raise ConfigError("jobs must be positive")


def parse_archs(text: str) -> tuple:
    names = [a.strip().lower() for a in str(text).split(",") if a.strip()]
    if "all" in names:
        return ARCH_ORDER
    bad = [a for a in names if a not in ARCH_ORDER]
    if bad or not names:
        raise ConfigError(f"unknown architecture(s) {bad or text!r}; choose from {ARCH_ORDER} or 'all'")
    return tuple(dict.fromkeys(names))


def _parse_bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _coerce(name: str, value: str, default):
    try:
        if isinstance(default, bool):
            return _parse_bool(value)
        if isinstance(default, int):
            return int(value)
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {value!r}") from exc


def apply_settings(settings: dict, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from flat ``key -> text`` settings.

    Scenario fields use their own names; per-architecture step sizes are
    ``mu_tensor.<arch>`` / ``mu_lms.<arch>``.  Experiment keys are ``arch``,
    ``out``, ``jobs`` and ``dump_state``.
    """
    base = base or ExperimentConfig()
    sc = {f.name: getattr(base.scenario, f.name) for f in fields(ScenarioConfig)}
    sc["mu_tensor"] = dict(sc["mu_tensor"])
    sc["mu_lms"] = dict(sc["mu_lms"])
    exp = {"archs": base.archs, "out": base.out, "jobs": base.jobs, "dump_state": base.dump_state}
    for key, value in settings.items():
        key = key.strip().lower()
        if key.startswith(("mu_tensor.", "mu_lms.")):
            table, arch = key.split(".", 1)
            if arch not in ARCH_ORDER:
                raise ConfigError(f"unknown architecture in {key!r}")
            sc[table][arch] = _coerce(key, value, 0.0)
        elif key in ("arch", "archs"):
            exp["archs"] = parse_archs(value)
        elif key == "out":
            exp["out"] = Path(value)
        elif key == "jobs":
            exp["jobs"] = _coerce(key, value, 0)
        elif key == "dump_state":
            exp["dump_state"] = _parse_bool(value)
        elif key in sc and key not in ("mu_tensor", "mu_lms"):
            sc[key] = _coerce(key, value, sc[key])
        else:
            raise ConfigError(f"unknown setting {key!r}")
    try:
        return ExperimentConfig(ScenarioConfig(**sc), **exp)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> dict:
    """Flat settings from an INI file; keys from all sections are merged."""
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_string("[__top__]\n" + fh.read())
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    settings = {}
    for section in parser.sections():
        settings.update(parser[section])
    return settings


def seed_fallback(default: int = 0) -> int:
    text = os.environ.get(SEED_ENV)
    if text is None:
        return default
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {text!r}") from exc


def format_value(v) -> str:
    """Full-precision text; complex values as ``re+imj``."""
    if isinstance(v, (complex, np.complexfloating)):
        return f"{v.real:.17g}{v.imag:+.17g}j"
    return f"{float(v):.17g}"


def _check_finite(name, values):
    if not np.all(np.isfinite(values)):
        raise FloatingPointError(f"refusing to write non-finite values for {name}")


def write_curves(path, curves: dict, header: str = "n,arch,mse_db") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for arch, curve in curves.items():
            _check_finite(arch, curve)
            fh.writelines(f"{n},{arch},{format_value(v)}\n" for n, v in enumerate(curve))


def write_summary(path, finals: dict) -> None:
    archs = list(finals)
    n_runs = len(next(iter(finals.values())))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("run,arch,final_mse_db\n")
        for run in range(n_runs):
            for arch in archs:
                _check_finite(arch, finals[arch][run])
                fh.write(f"{run},{arch},{format_value(finals[arch][run])}\n")


def write_matrix(path, a) -> None:
    a = np.atleast_2d(np.asarray(a))
    field_name = "complex" if np.iscomplexobj(a) else "real"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"rows={a.shape[0]} cols={a.shape[1]} field={field_name}\n")
        for row in a:
            fh.write(",".join(format_value(v) for v in row) + "\n")


def read_matrix(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        header = dict(item.split("=") for item in fh.readline().split())
        rows, cols = int(header["rows"]), int(header["cols"])
        conv = complex if header["field"] == "complex" else float
        data = [[conv(v) for v in line.strip().split(",")] for line in fh if line.strip()]
    a = np.array(data, dtype=np.complex128 if conv is complex else np.float64)
    if a.shape != (rows, cols):
        raise ValueError(f"{path}: header says {rows}x{cols}, found {a.shape}")
    return a


def dump_state(directory, matrices: dict) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, a in matrices.items():
        path = directory / f"{name}.csv"
        write_matrix(path, a)
        written.append(path)
    return written


def gnuplot_script(curves_csv: str, archs, title: str = "MSE learning curves") -> str:
    lines = [
        "set datafile separator ','",
        "set key top right",
        "set xlabel 'sample n'",
        "set ylabel 'MSE [dB]'",
        f"set title '{title}'",
        "set grid",
    ]
    plots = [f"'< grep \",{a},\" {curves_csv}' using 1:3 with lines title '{a}'" for a in archs]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"
