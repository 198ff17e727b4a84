"""Command line driver.

Subcommands
-----------
defaults   print the default experiment config (YAML) to stdout
simulate   build the scene and operator, write the corrupted phase history
autofocus  reconstruct a previously simulated phase history
evaluate   recompute the report from artifacts on disk
run        simulate + autofocus + evaluate in one go

Examples
--------
  sarfocus defaults > experiment.yaml
  sarfocus run --config experiment.yaml --out results/
  sarfocus run --config experiment.yaml --engine cfba --seed 7 --trace

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .autofocus import run_autofocus
from .errors import ConfigurationError, NumericError
from .fileio import (
    read_angles_csv,
    read_complex_csv,
    write_angles_csv,
    write_complex_csv,
    write_pgm,
    write_report_csv,
    write_trace_csv,
)
from .harness import (
    build_autofocus_config,
    config_to_yaml,
    default_config,
    load_config,
    run_experiment,
    simulate,
    _report,
)
from .cfba import estimate_lipschitz
from .forward_model import PhaseErrorVector
from .metrics import cost_J, entropy, mse

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _apply_overrides(cfg, args):
    """--engine/--seed/--out narrow the loaded config."""
    from dataclasses import replace

    if getattr(args, "engine", None):
        cfg = replace(
            cfg, autofocus=replace(cfg.autofocus, engine=args.engine, compare_engines=False)
        )
    if getattr(args, "seed", None) is not None:
        cfg = replace(
            cfg,
            phase_error=replace(cfg.phase_error, seed=args.seed),
            noise=replace(cfg.noise, seed=args.seed + 1),
        )
    if getattr(args, "out", None):
        cfg = replace(cfg, outputs=args.out)
    return cfg


def _load(args):
    cfg = load_config(args.config) if args.config else default_config()
    return _apply_overrides(cfg, args)


def cmd_defaults(args) -> int:
    sys.stdout.write(config_to_yaml(default_config()))
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load(args)
    out = Path(cfg.outputs)
    out.mkdir(parents=True, exist_ok=True)
    data = simulate(cfg)
    rows, cols = data.shape
    n = data.C.n_pixels
    ground_truth = data.C.entries.conj().T @ data.g_clean / n
    write_complex_csv(out / "scene.csv", data.f_true)
    write_complex_csv(out / "phase_history.csv", data.g)
    write_angles_csv(out / "phase_errors_true.csv", data.phi_true.angles)
    write_complex_csv(out / "ground_truth.csv", ground_truth)
    write_pgm(out / "ground_truth.pgm",
              np.abs(ground_truth).reshape(rows, cols, order="F"), cfg.contrast)
    print(f"wrote phase history ({len(data.g)} samples, sigma={data.sigma:.6g}) to {out}")
    return EXIT_OK


def cmd_autofocus(args) -> int:
    cfg = _load(args)
    out = Path(cfg.outputs)
    g = read_complex_csv(out / "phase_history.csv")
    data = simulate(cfg)  # rebuild the operator; seeds make this consistent
    if len(g) != data.C.n_rows:
        raise ConfigurationError(
            f"phase history in {out} has {len(g)} samples for an operator with "
            f"{data.C.n_rows} rows; config and artifacts disagree"
        )
    lipschitz = estimate_lipschitz(data.C, iters=60, seed=0)
    rows, cols = data.shape
    for engine in cfg.autofocus.engines():
        af_cfg = build_autofocus_config(cfg, engine, lipschitz)
        result = run_autofocus(data.C, g, af_cfg)
        engine_dir = out / engine
        engine_dir.mkdir(exist_ok=True)
        write_complex_csv(engine_dir / "f_hat.csv", result.f_hat)
        write_pgm(engine_dir / "f_hat.pgm",
                  np.abs(result.f_hat).reshape(rows, cols, order="F"), cfg.contrast)
        write_angles_csv(engine_dir / "phi_hat.csv", result.phi_hat.angles)
        write_trace_csv(engine_dir / "trace.csv", result.trace)
        print(f"{engine}: {result.iterations} outer iterations, "
              f"final cost {result.trace.rows[-1].cost:.6e}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _load(args)
    out = Path(cfg.outputs)
    ground_truth = read_complex_csv(out / "ground_truth.csv")
    data = simulate(cfg)
    lipschitz = estimate_lipschitz(data.C, iters=60, seed=0)
    spec = cfg.autofocus.regularizer.resolve(lipschitz)
    g = read_complex_csv(out / "phase_history.csv")
    baseline = data.C.entries.conj().T @ g / data.C.n_pixels
    zero_phi = PhaseErrorVector(angles=np.zeros(data.C.num_apertures))
    reports = {
        "adjoint": _report(
            baseline, ground_truth, cost_J(data.C, zero_phi, baseline, g, spec), 0
        )
    }
    for engine in cfg.autofocus.engines():
        f_path = out / engine / "f_hat.csv"
        if not f_path.exists():
            continue
        f_hat = read_complex_csv(f_path)
        phi_hat = PhaseErrorVector(angles=read_angles_csv(out / engine / "phi_hat.csv"))
        reports[engine] = _report(
            f_hat, ground_truth, cost_J(data.C, phi_hat, f_hat, g, spec), -1
        )
    write_report_csv(out / "report.csv", reports)
    for method, rep in reports.items():
        print(f"{method:10s} mse={rep.mse:.4e} entropy={rep.entropy:.4f}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load(args)
    reports, results = run_experiment(cfg, trace_inner=args.trace)
    for method, rep in reports.items():
        print(f"{method:10s} mse={rep.mse:.4e} mse_raw={rep.mse_raw:.4e} "
              f"entropy={rep.entropy:.4f} iters={rep.iterations}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sarfocus",
        description="Spotlight-SAR reconstruction with joint phase-error estimation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_config=True):
        p.add_argument("--config", help="experiment config (YAML)", default=None)
        p.add_argument("--engine", choices=("cfba", "wama"), default=None,
                       help="run a single engine instead of both")
        p.add_argument("--seed", type=int, default=None,
                       help="override phase-error seed (noise seed becomes seed+1)")
        p.add_argument("--out", default=None, help="output directory")

    sub.add_parser("defaults", help="print the default config")
    for name, fn in (("simulate", None), ("autofocus", None), ("evaluate", None)):
        p = sub.add_parser(name, help=f"{name} stage")
        add_common(p)
    p_run = sub.add_parser("run", help="simulate + autofocus + evaluate")
    add_common(p_run)
    p_run.add_argument("--trace", action="store_true",
                       help="also write inner-iteration traces")
    return parser


COMMANDS = {
    "defaults": cmd_defaults,
    "simulate": cmd_simulate,
    "autofocus": cmd_autofocus,
    "evaluate": cmd_evaluate,
    "run": cmd_run,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
