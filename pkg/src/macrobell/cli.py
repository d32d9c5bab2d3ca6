"""Command-line entry point.

Exit codes: 0 success, 1 check failure or I/O error, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Callable, Optional, Sequence

from macrobell import bell, chsh, experiment
from macrobell.checks import run_algebra_suite
from macrobell.clifford import UnitVector
from macrobell.errors import DomainError
from macrobell.report import (
    RENDERERS,
    SIMULATE_COLUMNS,
    Report,
    RunManifest,
    output_targets,
    read_manifest,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SE_BAND = 5.0


class UsageError(Exception):
    pass


def parse_angles(text: str) -> tuple[float, ...]:
    """Parse ``"0,90,180"``, ``"0..180:30"`` or a comma-separated mix, in degrees."""
    angles: list[float] = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            raise argparse.ArgumentTypeError(f"empty entry in angle list {text!r}")
        try:
            if ".." in item:
                span, _, step_text = item.partition(":")
                start_text, _, end_text = span.partition("..")
                start, end = float(start_text), float(end_text)
                step = float(step_text) if step_text else 1.0
                if step <= 0 or end < start:
                    raise ValueError
                count = int(math.floor((end - start) / step + 1e-9)) + 1
                angles.extend(start + k * step for k in range(count))
            else:
                angles.append(float(item))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad angle specification {item!r}") from None
    for t in angles:
        if not (math.isfinite(t) and 0.0 <= t <= 180.0):
            raise argparse.ArgumentTypeError(f"angle {t} outside [0, 180] degrees")
    return tuple(angles)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


# ----------------------------------------------------------------------------
# runners: resolved config dict -> Report


def run_predict(config: dict, workers: int = 1) -> Report:
    model = config["model"]
    column = "E_linear_eq3" if model == "linear" else "E_cosine_eq5"
    fn = bell.analytic_correlation_linear if model == "linear" else chsh.analytic_correlation_cosine
    a = UnitVector.from_angle(0.0)
    rows = []
    for t in config["angles_deg"]:
        b = UnitVector.from_angle(t)
        rows.append({"angle_deg": float(t), "a_dot_b": a.dot(b), column: fn(a, b)})
    return Report(("angle_deg", "a_dot_b", column), rows, {"model": model})


def _experiment_config(config: dict) -> experiment.ExperimentConfig:
    fields = experiment.ExperimentConfig.__dataclass_fields__
    return experiment.ExperimentConfig.from_dict({k: v for k, v in config.items() if k in fields})


def run_simulate(config: dict, workers: int = 1) -> Report:
    cfg = _experiment_config(config)
    result = experiment.compare_predictions(cfg, workers)
    rows = [
        {
            "angle_deg": r.angle_deg,
            "a_dot_b": r.a_dot_b,
            "E_empirical": r.e_empirical,
            "E_linear_eq3": r.e_linear,
            "E_cosine_eq5": r.e_cosine,
            "std_error": r.std_error,
            "trials": r.trials,
        }
        for r in result.rows
    ]
    summary = dict(result.summary())
    summary["consistent_within_5se"] = [
        name
        for name, sigma in (("linear", result.max_sigma_linear), ("cosine", result.max_sigma_cosine))
        if sigma <= SE_BAND
    ]
    return Report(SIMULATE_COLUMNS, rows, summary)


CHSH_COLUMNS = (
    "source", "a_deg", "a_prime_deg", "b_deg", "b_prime_deg",
    "E_ab", "E_ab_prime", "E_a_prime_b", "E_a_prime_b_prime",
    "chsh", "abs_chsh", "combined_se", "grid_abs_chsh", "refined", "trials",
)


def run_chsh(config: dict, workers: int = 1) -> Report:
    source = config["source"]
    trials = None
    if source == "linear":
        src = chsh.linear_source()
    elif source == "cosine":
        src = chsh.cosine_source()
    else:
        cfg = _experiment_config(config)
        ensemble = experiment.generate_ensemble(cfg, workers)
        src = chsh.empirical_source(ensemble, cfg.tie_eps)
        trials = cfg.trials
    scan = chsh.ScanSpec(step_deg=config["step_deg"], refine=config["refine"])
    result = chsh.max_abs_chsh(src, scan)
    best = result.best
    se = best.combined_error
    row = dict(zip(CHSH_COLUMNS[:5], (src.kind, *result.angles_deg)))
    row.update(zip(CHSH_COLUMNS[5:9], best.terms))
    row.update(
        chsh=best.value, abs_chsh=best.abs_value, combined_se=se,
        grid_abs_chsh=result.grid_value, refined=result.refined, trials=trials,
    )
    summary = {"max_abs_chsh": best.abs_value, "local_bound": 2.0, "quantum_bound": 2.0 * math.sqrt(2.0)}
    if se is not None:
        summary["within_local_bound_5se"] = best.abs_value <= 2.0 + SE_BAND * se
    return Report(CHSH_COLUMNS, [row], summary)


def run_algebra_check(config: dict, workers: int = 1) -> Report:
    results = run_algebra_suite(config["count"], config["seed"])
    rows = [
        {"check": r.name, "passed": r.passed, "max_error": r.max_error, "tolerance": r.tolerance,
         "cases": r.cases, "identity": r.identity}
        for r in results
    ]
    return Report(("check", "passed", "max_error", "tolerance", "cases", "identity"), rows,
                  {"all_passed": all(r.passed for r in results)})


RUNNERS: dict[str, Callable[[dict, int], Report]] = {
    "predict": run_predict,
    "simulate": run_simulate,
    "chsh": run_chsh,
    "algebra-check": run_algebra_check,
}


# ----------------------------------------------------------------------------


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", metavar="PATH", help="write here instead of stdout")
    p.add_argument("--format", choices=sorted(RENDERERS), help="csv or json (default: from suffix, else both)")


def _add_ensemble(p: argparse.ArgumentParser, trials_default: int) -> None:
    p.add_argument("--trials", type=_positive_int, default=trials_default)
    p.add_argument("--seed", type=_seed, default=0, help="master seed for the recorded ensemble")
    p.add_argument("--mode", choices=("continuous", "discrete"), default="continuous")
    p.add_argument("--lattice-size", type=_positive_int, default=experiment.DEFAULT_LATTICE_SIZE)
    p.add_argument("--threads", type=_positive_int, default=1, help="worker threads; never changes results")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="macrobell", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="tabulate an analytic correlation curve")
    p.add_argument("--model", choices=("linear", "cosine"), required=True)
    p.add_argument("--angles", type=parse_angles, default=experiment.DEFAULT_ANGLES)
    _add_output(p)

    p = sub.add_parser("simulate", help="run the recorded-ensemble experiment")
    _add_ensemble(p, 10**6)
    p.add_argument("--settings-seed", type=_seed, default=1)
    p.add_argument("--settings-mode", choices=("angles", "random"), default="angles")
    p.add_argument("--angles", type=parse_angles, default=experiment.DEFAULT_ANGLES)
    _add_output(p)

    p = sub.add_parser("chsh", help="maximize |CHSH| over coplanar settings")
    p.add_argument("--source", choices=("linear", "cosine", "empirical"), required=True)
    p.add_argument("--step", type=float, default=1.0, help="grid step in degrees")
    p.add_argument("--no-refine", action="store_true", help="skip golden-section polishing")
    _add_ensemble(p, 10**6)
    _add_output(p)

    p = sub.add_parser("algebra-check", help="randomized Cl(3,0) identity suite")
    p.add_argument("--count", type=_positive_int, default=10_000)
    p.add_argument("--seed", type=_seed, default=0)
    _add_output(p)

    p = sub.add_parser("replay", help="re-run from the manifest embedded in a report")
    p.add_argument("report", help="CSV or JSON report written by this tool")
    p.add_argument("--threads", type=_positive_int, default=1)
    _add_output(p)
    return parser


def resolve(args: argparse.Namespace) -> RunManifest:
    """Turn parsed flags into the manifest that fully determines the run."""
    cmd = args.command
    if cmd == "predict":
        return RunManifest(cmd, {"model": args.model, "angles_deg": list(args.angles)})
    if cmd == "algebra-check":
        return RunManifest(cmd, {"count": args.count, "seed": args.seed}, {"seed": args.seed})
    ensemble = {
        "trials": args.trials, "seed": args.seed, "mode": args.mode,
        "lattice_size": args.lattice_size,
    }
    if cmd == "simulate":
        cfg = experiment.ExperimentConfig(
            **ensemble, settings_seed=args.settings_seed, settings_mode=args.settings_mode,
            angles_deg=args.angles,
        )
        return RunManifest(cmd, cfg.to_dict(), {"seed": cfg.seed, "settings_seed": cfg.settings_seed})
    config = {"source": args.source, "step_deg": args.step, "refine": not args.no_refine}
    seeds = {}
    if args.source == "empirical":
        cfg = experiment.ExperimentConfig(**ensemble)
        config.update(cfg.to_dict())
        seeds = {"seed": cfg.seed}
    return RunManifest(cmd, config, seeds)


def emit(report: Report, manifest: RunManifest, output: Optional[str], fmt: Optional[str]) -> None:
    for path, kind in output_targets(output, fmt):
        text = RENDERERS[kind](report, manifest)
        if path is None:
            sys.stdout.write(text)
        else:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="") as fh:
                fh.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            manifest = read_manifest(args.report)
        else:
            manifest = resolve(args)
        report = RUNNERS[manifest.subcommand](manifest.config, getattr(args, "threads", 1))
    except (DomainError, KeyError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"macrobell: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"macrobell: error: {exc}", file=sys.stderr)
        return EXIT_FAIL

    if manifest.subcommand == "algebra-check" and args.output is None:
        for row in report.rows:
            status = "PASS" if row["passed"] else "FAIL"
            print(f"{status} {row['check']:<22} max_err={row['max_error']:.3e} n={row['cases']}  {row['identity']}")
    else:
        try:
            emit(report, manifest, args.output, args.format)
        except OSError as exc:
            print(f"macrobell: error: {exc}", file=sys.stderr)
            return EXIT_FAIL
    if manifest.subcommand == "algebra-check" and not report.summary["all_passed"]:
        failed = [r["check"] for r in report.rows if not r["passed"]]
        print(f"macrobell: violated identities: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def run() -> None:
    sys.exit(main())
