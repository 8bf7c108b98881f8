"""Command-line front end: ``sfr {score,anneal,fit,simulate,describe}``.

All data goes to ``--output`` (default stdout); diagnostics go to stderr.
Exit status is 0 on success, 1 for invalid input or flags and 2 when a
computation fails.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import platform
import sys
from collections.abc import Sequence

import numpy as np

from . import __version__, tabular
from .annealing import AnnealingConfig, anneal, anneal_with_bootstrap, covariate_balance
from .baselines import RansacConfig
from .core import Dataset
from .data_io import DESCRIBE_HEADER, CsvSchema, describe, load_csv
from .errors import ComputationError, SFRError, ValidationError
from .fitting import ESTIMATORS, FitTable, WeightScheme, fit_table_compare
from .scoring import ReliabilityScores, ScoringConfig, score_sample, score_sample_exhaustive
from .simulation import MetricsTable, ScenarioConfig, run_benchmark

DEFAULT_SEED = 42
EXIT_OK, EXIT_INVALID, EXIT_COMPUTATION = 0, 1, 2

log = logging.getLogger("sfr")


class UsageError(ValidationError):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    """Argument parser whose errors use the package's validation exit code."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _csv_list(text: str) -> list[str]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a comma-separated list")
    return items


def _common(p: argparse.ArgumentParser, data: bool = True) -> None:
    if data:
        p.add_argument("--data", required=True, help="input CSV file")
        p.add_argument("--outcome", required=True, help="outcome column")
        p.add_argument("--features", required=True, type=_csv_list, help="comma-separated feature columns")
        p.add_argument("--delimiter", default=",")
        p.add_argument("--no-header", action="store_true", help="columns are zero-based positions")
        p.add_argument("--na-policy", choices=("reject", "drop_rows"), default="reject")
    p.add_argument("--intercept", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"random seed (default {DEFAULT_SEED})")
    p.add_argument("--iterations", type=int, default=1000, help="scoring sub-samples S")
    p.add_argument("--subsample-size", type=int, default=None, help="eta (default: coefficients + 1)")
    p.add_argument("--bootstrap", type=int, default=1000, help="bootstrap replicates B")
    p.add_argument("--output", default="-", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "table", "json"), default="csv")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default all cores)")
    p.add_argument("--verbose", "-v", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sfr", description="Sample fit reliability scoring and robust regression.")
    parser.add_argument("--version", action="version", version=f"sfr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("score", help="per-row reliability scores")
    _common(p)
    p.add_argument("--loss", choices=("absolute", "squared"), default="absolute")
    p.add_argument("--exhaustive", action="store_true", help="enumerate every sub-sample")

    p = sub.add_parser("anneal", help="coefficient path while dropping low-score rows")
    _common(p)
    p.add_argument("--share", type=float, default=0.10, help="largest share of rows to drop")
    p.add_argument("--steps", type=int, default=None, help="evaluation points including 0")
    p.add_argument("--target", default=None, help="coefficient name (default: last)")
    p.add_argument("--ci", choices=("normal", "percentile"), default="normal")
    p.add_argument("--balance", action="store_true", help="report covariate balance of dropped rows on stderr")

    p = sub.add_parser("fit", help="coefficient table for one or more estimators")
    _common(p)
    p.add_argument("--estimators", type=_csv_list, default=list(ESTIMATORS))
    p.add_argument("--weights", choices=("squared", "identity"), default="squared")
    p.add_argument("--ci", choices=("normal", "percentile"), default="normal")

    p = sub.add_parser("simulate", help="Monte Carlo comparison on a synthetic scenario")
    _common(p, data=False)
    p.add_argument("--scenario", type=int, required=True, choices=(1, 2, 3, 4))
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--alpha", type=float, default=0.05, help="outlier share")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--estimators", type=_csv_list, default=list(ESTIMATORS))
    p.add_argument("--variance-convention", choices=("sd", "variance"), default="sd")
    p.add_argument("--dump-draws", default=None, help="write per-replication slope estimates to this CSV")

    p = sub.add_parser("describe", help="summary statistics of the selected columns")
    _common(p)
    return parser


def _load(args) -> Dataset:
    schema = CsvSchema(
        args.outcome, tuple(args.features), args.delimiter, not args.no_header, args.na_policy
    )
    return load_csv(args.data, schema, add_intercept=args.intercept)


def _scoring(args, parallel: bool = False, **kw) -> ScoringConfig:
    # Outside `score` the scorer runs inside threaded resampling loops, so it stays serial.
    return ScoringConfig(
        iterations=args.iterations,
        subsample_size=args.subsample_size,
        seed=args.seed,
        n_jobs=_jobs(args) if parallel else 1,
        **kw,
    )


def _jobs(args) -> int:
    return 0 if args.threads is None else args.threads


def _check_counts(args) -> None:
    if args.bootstrap < 0:
        raise ValidationError("--bootstrap must be >= 0")
    if args.threads is not None and args.threads < 1:
        raise ValidationError("--threads must be >= 1")


def _meta(args, argv: Sequence[str]) -> dict:
    return {
        "command": args.command,
        "argv": list(argv),
        "seed": args.seed,
        "versions": {"sfr": __version__, "numpy": np.__version__, "python": platform.python_version()},
    }


def _render(args, argv, header, records, text: str | None = None) -> str:
    if args.format == "json":
        return tabular.json_document(_meta(args, argv), records)
    if args.format == "table":
        if text is not None:
            return text
        return tabular.text_table(header, [[r[h] for h in header] for r in records])
    return tabular.csv_text(header, records)


def _cmd_score(args, argv) -> str:
    data = _load(args)
    cfg = _scoring(args, parallel=True, loss=args.loss)
    scores: ReliabilityScores = score_sample_exhaustive(data, cfg) if args.exhaustive else score_sample(data, cfg)
    log.info("scored %d rows over %d effective sub-samples", data.n, scores.effective_iterations)
    return _render(args, argv, ReliabilityScores.HEADER, scores.rows())


def _cmd_anneal(args, argv) -> str:
    data = _load(args)
    target = None
    if args.target is not None:
        if args.target not in data.coef_names:
            raise ValidationError(f"--target {args.target!r} is not one of {', '.join(data.coef_names)}")
        target = data.coef_names.index(args.target)
    cfg = AnnealingConfig(
        share=args.share,
        n_steps=args.steps,
        bootstrap_b=args.bootstrap,
        seed=args.seed,
        target_coefficient=target,
        ci_method=args.ci,
        n_jobs=_jobs(args),
    )
    scoring = _scoring(args)
    if args.bootstrap == 0:
        path = anneal(data, score_sample(data, scoring), cfg)
    else:
        path = anneal_with_bootstrap(data, scoring, cfg)
    if args.balance:
        d = path.steps[-1].n_dropped
        rows = covariate_balance(data, path.dropped_order, d)
        header = ("feature", "mean_dropped", "mean_kept", "smd")
        print(f"covariate balance after dropping {d} rows", file=sys.stderr)
        print(tabular.text_table(header, [[r[h] for h in header] for r in rows]), file=sys.stderr, end="")
    return _render(args, argv, path.HEADER, path.records())


def _cmd_fit(args, argv) -> str:
    data = _load(args)
    if args.bootstrap < 2:
        raise ValidationError("fit needs --bootstrap >= 2")
    table: FitTable = fit_table_compare(
        data,
        args.estimators,
        bootstrap_b=args.bootstrap,
        seed=args.seed,
        scoring_config=_scoring(args),
        scheme=WeightScheme(args.weights),
        ransac_config=RansacConfig(seed=args.seed),
        ci_method=args.ci,
        n_jobs=_jobs(args),
    )
    return _render(args, argv, table.HEADER, table.records(), table.to_text())


def _cmd_simulate(args, argv) -> str:
    config = ScenarioConfig(
        args.scenario,
        n=args.n,
        outlier_share=args.alpha,
        replications=args.reps,
        seed=args.seed,
        variance_convention=args.variance_convention,
        add_intercept=args.intercept,
    )
    for name in args.estimators:
        if name not in ESTIMATORS:
            raise ValidationError(f"unknown estimator {name!r}; choose from {', '.join(ESTIMATORS)}")
    table: MetricsTable = run_benchmark(config, args.estimators, scoring_config=_scoring(args), n_jobs=_jobs(args))
    for name, count in table.failures.items():
        if count:
            log.warning("%s failed in %d of %d replications", name, count, config.replications)
    if args.dump_draws:
        tabular.to_csv(args.dump_draws, ("replication", *table.estimators), table.draws_records())
    return _render(args, argv, table.HEADER, table.records(), table.to_text())


def _cmd_describe(args, argv) -> str:
    data = _load(args)
    return _render(args, argv, DESCRIBE_HEADER, describe(data))


COMMANDS = {
    "score": _cmd_score,
    "anneal": _cmd_anneal,
    "fit": _cmd_fit,
    "simulate": _cmd_simulate,
    "describe": _cmd_describe,
}


def run(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, run the subcommand and return the exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        _check_counts(args)
        text = COMMANDS[args.command](args, argv)
        if args.output == "-":
            sys.stdout.write(text)
        else:
            with open(args.output, "w", newline="") as fh:
                fh.write(text)
    except ComputationError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION
    except SFRError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def main() -> None:
    with contextlib.suppress(BrokenPipeError):
        sys.exit(run())
