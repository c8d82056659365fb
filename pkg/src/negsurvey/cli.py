"""``negsurvey`` command line: design -> simulate -> estimate -> report.

Exit codes: 0 success, 2 validation failure, 3 singular design, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io as nio
from .design import TieBreakModel, custom_design, two_option_design, uniform_design
from .errors import SingularDesignError
from .estimation import estimate_pi
from .privacy import privacy_report
from .simulation import (
    DEFAULT_SEED,
    PopulationDistribution,
    RandomSource,
    make_scheme,
    monte_carlo,
    run_survey,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SINGULAR = 3
EXIT_IO = 4

log = logging.getLogger("negsurvey")


class CLIError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from exc


def _read_json(path):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise CLIError(f"{path}: invalid JSON ({exc})", EXIT_VALIDATION) from exc


def _load_design(path):
    data = _read_json(path)
    if not isinstance(data, dict):
        raise CLIError(f"{path}: expected a design JSON object", EXIT_VALIDATION)
    return nio.design_from_dict(data)


def _emit(text: str, output) -> None:
    if output is None or str(output) == "-":
        sys.stdout.write(text)
        return
    try:
        Path(output).write_text(text)
    except OSError as exc:
        raise CLIError(f"cannot write {output}: {exc.strerror}", EXIT_IO) from exc


def _check_distinct(args, *inputs) -> None:
    out = getattr(args, "output", None)
    if out is None or out == "-":
        return
    for p in inputs:
        if p is not None and Path(p).resolve() == Path(out).resolve():
            raise CLIError(f"output path {out} is also an input", EXIT_VALIDATION)


def _labels(text):
    return None if text is None else [x.strip() for x in text.split(",")]


def _tie_from_args(args, t):
    if getattr(args, "tie_table", None):
        return TieBreakModel.custom(_read_json(args.tie_table))
    return nio.parse_tie(args.tie, t)


def cmd_design(args) -> int:
    _check_distinct(args, args.matrix, args.tie_table)
    labels = _labels(args.labels)
    if args.scheme == "uniform":
        design = uniform_design(_require(args.t, "--t"), labels)
    elif args.scheme == "two-option":
        t = _require(args.t, "--t")
        design = two_option_design(t, _tie_from_args(args, t) if t >= 3 else None, labels)
    else:
        data = _read_json(_require(args.matrix, "--matrix"))
        if isinstance(data, dict):
            design = nio.design_from_dict({**data, **({"labels": labels} if labels else {})})
        else:
            design = custom_design(data, labels)
    _emit(nio.dumps(nio.design_to_dict(design)), args.output)
    return EXIT_OK


def _require(value, flag):
    if value is None:
        raise CLIError(f"{flag} is required", EXIT_VALIDATION)
    return value


def _distribution(args):
    if args.pi is not None:
        return nio.parse_distribution(args.pi)
    if args.pi_file is not None:
        return nio.parse_distribution(_read_text(args.pi_file).strip().replace("\n", ","))
    raise CLIError("supply the population with --pi or --pi-file", EXIT_VALIDATION)


def cmd_simulate(args) -> int:
    _check_distinct(args, args.design, args.pi_file)
    design = _load_design(args.design) if args.design else None
    pi = _distribution(args)
    kind = args.scheme.replace("-", "_")
    if kind == "design" and design is None:
        raise CLIError("--scheme design needs --design", EXIT_VALIDATION)
    t = design.t if design is not None else _require(args.t, "--t")
    if pi.size != t:
        raise CLIError(f"population has {pi.size} categories, design has t={t}", EXIT_VALIDATION)
    tie = _tie_from_args(args, t) if kind == "two_option" else None
    scheme = make_scheme(kind, t, tie=tie, design=design)
    labels = design.labels if design is not None else None
    if args.n < 1:
        raise CLIError("--n must be at least 1", EXIT_VALIDATION)
    result = run_survey(
        PopulationDistribution(pi), scheme, args.n, RandomSource(args.seed, args.stream),
        trace=args.trace is not None,
    )
    _emit(nio.tally_to_csv(result.tally, labels), args.output)
    if args.trace is not None:
        _emit(nio.traces_to_csv(result.traces, t, labels), args.trace)
    return EXIT_OK


def cmd_estimate(args) -> int:
    _check_distinct(args, args.design, args.tally)
    design = _load_design(args.design)
    tally = nio.tally_from_csv(_read_text(args.tally), design)
    if args.intervals and tally.n < 2:
        raise CLIError(f"intervals need n >= 2 respondents, tally has n={tally.n}", EXIT_VALIDATION)
    est = estimate_pi(design, tally, level=args.level, project=args.project)
    d = nio.estimate_to_dict(est)
    if args.intervals is False:
        d["intervals"] = None
    if "warnings" in d:
        for w in d["warnings"]:
            log.warning(w)
    _emit(nio.dumps(d), args.output)
    return EXIT_OK


def cmd_privacy(args) -> int:
    _check_distinct(args, args.design)
    prior = nio.parse_distribution(args.p)
    design = _load_design(args.design) if args.design else None
    pi = None
    if design is not None:
        pi = nio.parse_distribution(args.pi) if args.pi else prior
    report = privacy_report(prior, design, pi)
    _emit(nio.dumps(nio.privacy_report_to_dict(report)), args.output)
    return EXIT_OK


def cmd_experiment(args) -> int:
    _check_distinct(args, args.config)
    cfg = nio.experiment_config_from_dict(_read_json(args.config))
    seed = cfg.seed if args.seed is None else args.seed
    scheme = make_scheme(cfg.scheme, cfg.t, tie=cfg.tie)
    summary = monte_carlo(
        PopulationDistribution(cfg.pi), scheme, cfg.n, cfg.replicates,
        seed=seed, level=args.level, workers=args.workers,
    )
    _emit(nio.dumps(nio.summary_to_dict(summary)), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="negsurvey", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def out(p):
        p.add_argument("-o", "--output", help="output path (default: stdout)")

    p = sub.add_parser("design", help="write a design matrix JSON")
    p.add_argument("--scheme", choices=["uniform", "two-option", "custom"], default="uniform")
    p.add_argument("--t", type=int)
    p.add_argument("--tie", default="uniform", choices=["uniform", "first-index", "first_index"])
    p.add_argument("--tie-table", help="JSON file with a t x t tie-break table")
    p.add_argument("--matrix", help="JSON file with a design (custom scheme)")
    p.add_argument("--labels", help="comma-separated category names")
    out(p)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="simulate a negative survey, write a tally CSV")
    p.add_argument("--design", help="design JSON file")
    p.add_argument("--scheme", choices=["design", "die", "two-option"], default="design")
    p.add_argument("--t", type=int, help="category count when no design file is given")
    p.add_argument("--tie", default="uniform", choices=["uniform", "first-index", "first_index"])
    p.add_argument("--tie-table")
    p.add_argument("--pi", help="comma-separated population proportions")
    p.add_argument("--pi-file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--trace", help="also write per-respondent traces to this CSV")
    out(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate proportions from a tally")
    p.add_argument("--design", required=True)
    p.add_argument("--tally", required=True)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--project", action="store_true", help="add a simplex-projected estimate")
    p.add_argument("--intervals", action=argparse.BooleanOptionalAction, default=None)
    out(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("privacy", help="information surrendered per questionnaire")
    p.add_argument("--p", required=True, help="comma-separated prior")
    p.add_argument("--design")
    p.add_argument("--pi", help="population for the selection weights (default: the prior)")
    out(p)
    p.set_defaults(func=cmd_privacy)

    p = sub.add_parser("experiment", help="Monte Carlo study of the estimator")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--workers", type=int, default=1)
    out(p)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="negsurvey: %(levelname)s: %(message)s",
    )
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"negsurvey: error: {exc}", file=sys.stderr)
        return exc.code
    except SingularDesignError as exc:
        print(f"negsurvey: error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except OSError as exc:
        print(f"negsurvey: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:  # ValidationError and malformed numeric input
        print(f"negsurvey: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
