"""Command-line benchmark: ``run``, ``complexity``, ``gradcheck``, ``plotscript``.

Exit codes: 0 ok, 1 config error, 2 numeric abort, 3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io
from .architectures import NumericalError
from .complexity import ARCH_LABELS, complexity_estimate, count_forward
from .oracle import GRADCHECK_ARCHS, check_architecture
from .scenario import moving_average, run_monte_carlo

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

logger = logging.getLogger("cxtlms")


def _arch_list(values) -> str:
    return ",".join(values) if values else "all"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cxtlms", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte-Carlo learning curves")
    run.add_argument("--config", type=Path, help="INI file with scenario/experiment settings")
    run.add_argument("--seed", type=int, help="master seed (falls back to $CX_TLMS_SEED)")
    run.add_argument("--jobs", type=int, help="parallel worker processes")
    run.add_argument("--arch", action="append", help="tlms2r, ttlms, ctlms or all (repeatable)")
    run.add_argument("--out", type=Path, help="output directory")
    run.add_argument("--dump-state", action="store_true", default=None,
                     help="write final factor matrices and weights of every run")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override any config key, e.g. --set n_runs=2")

    cx = sub.add_parser("complexity", help="per-sample operation counts")
    cx.add_argument("-P", type=int, default=16, help="filter order")
    cx.add_argument("-R", type=int, default=10, help="tensor rank")
    cx.add_argument("-M", type=int, default=2, help="tensor order")
    cx.add_argument("-I", type=int, default=32, help="bins per mode")
    cx.add_argument("--count", action="store_true", help="also measure the forward pass")

    gc = sub.add_parser("gradcheck", help="finite-difference check of the tensor updates")
    gc.add_argument("--states", type=int, default=100)
    gc.add_argument("--seed", type=int)
    gc.add_argument("--tol", type=float, default=1e-6)
    gc.add_argument("--arch", action="append", help="tlms, tlms2r, ttlms, ctlms (default: all)")

    ps = sub.add_parser("plotscript", help="write a gnuplot script for the learning curves")
    ps.add_argument("--out", type=Path, default=Path("results"))
    ps.add_argument("--arch", action="append")
    return parser


def _experiment(args) -> io.ExperimentConfig:
    settings = io.load_config(args.config) if args.config else {}
    for item in args.set:
        if "=" not in item:
            raise io.ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        settings[key] = value
    if args.seed is not None:
        settings["seed"] = str(args.seed)
    elif "seed" not in settings:
        settings["seed"] = str(io.seed_fallback())
    if args.jobs is not None:
        settings["jobs"] = str(args.jobs)
    if args.arch:
        settings["arch"] = _arch_list(args.arch)
    if args.out is not None:
        settings["out"] = str(args.out)
    if args.dump_state:
        settings["dump_state"] = "true"
    return io.apply_settings(settings)


def cmd_run(args) -> int:
    cfg = _experiment(args)
    sc = cfg.scenario
    logger.info("running %s over %d runs x %d samples", cfg.archs, sc.n_runs, sc.n_samples)
    result = run_monte_carlo(sc, cfg.archs, jobs=cfg.jobs, keep_state=cfg.dump_state)
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    io.write_curves(out / "mse_curves.csv", result.mse_db)
    if sc.smoothing > 1:
        smooth = {a: moving_average(v, sc.smoothing) for a, v in result.mse_db.items()}
        io.write_curves(out / "mse_curves_smoothed.csv", smooth)
    io.write_summary(out / "summary.csv", result.final_mse_db)
    if cfg.dump_state:
        for run, states in enumerate(result.states):
            for arch, matrices in states.items():
                io.dump_state(out / "state" / f"run{run:03d}" / arch, matrices)
    print(f"{'arch':<8} {'steady MSE [dB]':>16} {'stability violations':>21}")
    for a in cfg.archs:
        print(f"{a:<8} {result.steady_mse_db[a]:>16.2f} {result.stability_violations[a]:>21d}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_complexity(args) -> int:
    header = f"{'arch':<8} {'pass':<9} {'mult':>7} {'add':>7} {'div':>5}"
    if args.count:
        header += f"   {'counted (mult, add, div)':>26}"
    print(f"P={args.P} R={args.R} M={args.M} I_m={args.I}")
    print(header)
    for arch, label in ARCH_LABELS.items():
        est = complexity_estimate(arch, args.P, args.R, args.M, args.I)
        for which in ("forward", "backward"):
            c = est[which]
            line = f"{label:<8} {which:<9} {c.mult:>7} {c.add:>7} {c.div:>5}"
            if args.count and which == "forward":
                line += f"   {str(tuple(count_forward(arch, args.P, args.R, args.M))):>26}"
            print(line)
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    seed = args.seed if args.seed is not None else io.seed_fallback()
    archs = args.arch or list(GRADCHECK_ARCHS)
    status = EXIT_OK
    for arch in archs:
        if arch not in GRADCHECK_ARCHS:
            raise io.ConfigError(f"unknown architecture {arch!r}")
        rep = check_architecture(arch, args.states, seed)
        ok = rep.passed(args.tol)
        print(f"{arch:<8} max rel err {rep.max_rel_error:.3e} over {rep.n_checks} checks "
              f"(worst state/path/mode {rep.worst}) {'PASS' if ok else 'FAIL'}")
        if not ok:
            status = EXIT_NUMERIC
    return status


def cmd_plotscript(args) -> int:
    archs = io.parse_archs(_arch_list(args.arch))
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / "plot_mse.gp"
    path.write_text(io.gnuplot_script("mse_curves.csv", archs), encoding="utf-8")
    print(f"wrote {path}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "complexity": cmd_complexity, "gradcheck": cmd_gradcheck,
            "plotscript": cmd_plotscript}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except io.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError) as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
