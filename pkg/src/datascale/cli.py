"""Command-line interface.

Subcommands cover fitting (``fit``, ``fit-shared``, ``fit-joint``,
``fit-tail``, ``fit-linear``), analysis of fit reports (``analyze``,
``report``), Monte Carlo exponent uncertainty (``mc``), synthetic-curve
generation (``simulate``) and the corpus toolbox (``corpus corrupt``,
``corpus filter``, ``corpus sample``).

Exit codes: 0 on success, 2 on any validation or usage error, 3 when a fit
did not converge (the report is still written) or Monte Carlo produced no
usable replicate.  Every randomized command requires an explicit ``--seed``
so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .analysis import (
    McConfig,
    asymptotic_loss,
    data_equivalence_factor,
    marginal_value,
    mc_uncertainty,
    transition_point,
)
from .core import JointLawParams, PowerLaw
from .corpus import (
    DEFAULT_PROBS,
    REPLACEMENT_ALPHABET,
    CorruptionSpec,
    corrupt_chars,
    delete_words,
    filter_top_fraction,
    read_pairs,
    sample_subset,
    shuffle_pairs,
    write_pairs,
)
from .errors import DataScaleError, MonteCarloError, ParseError, SchemaError
from .fitting import FitConfig, fit_joint, fit_linear, fit_shared, fit_single, fit_tail
from .observations import format_observations, load_observations, simulate, simulate_joint
from .reports import (
    build_fit_report,
    build_joint_report,
    build_linear_report,
    build_shared_report,
    build_tail_report,
    dumps_report,
    format_table,
    law_from_report,
    load_report,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_CONVERGENCE = 3


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fit_config(args) -> FitConfig:
    return FitConfig(
        loss_space=args.loss_space,
        max_iters=args.max_iters,
        rel_tol=args.rel_tol,
        n_restarts=args.n_restarts,
        seed=args.seed,
    )


def _add_fit_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="observation CSV")
    parser.add_argument("--seed", type=int, required=True, help="seed for restart perturbations")
    parser.add_argument("--loss-space", choices=("log", "linear"), default="log")
    parser.add_argument("--max-iters", type=int, default=2000)
    parser.add_argument("--rel-tol", type=float, default=1e-10)
    parser.add_argument("--n-restarts", type=int, default=8)
    parser.add_argument(
        "--raw-counts",
        action="store_true",
        help="size column is named 'd' and holds raw pair counts; divide by 1e6",
    )
    parser.add_argument("--output", help="write the JSON report here instead of stdout")


def _select_condition(table, condition: str | None):
    groups = table.by_condition()
    if condition is not None:
        if condition not in groups:
            raise SchemaError(f"condition {condition!r} not present in {table.source_path}")
        return groups[condition]
    if len(groups) != 1:
        raise SchemaError(
            f"file holds {len(groups)} conditions ({', '.join(sorted(groups))}); pass --condition"
        )
    return next(iter(groups.values()))


def _parse_shape(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise SchemaError(f"bad shape {text!r}; expected N_ENCxN_DEC, e.g. 100000000x50000000")
    try:
        return (int(parts[0]), int(parts[1]))
    except ValueError:
        raise SchemaError(f"bad shape {text!r}; counts must be integers") from None


def _parse_grid(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise SchemaError(f"bad d grid {text!r}; expected comma-separated numbers") from None


# ---------------------------------------------------------------------------
# Fit commands
# ---------------------------------------------------------------------------


def cmd_fit(args) -> int:
    table = load_observations(args.input, raw_counts=args.raw_counts)
    obs = _select_condition(table, args.condition)
    cfg = _fit_config(args)
    result = fit_single(obs, cfg)
    _emit(dumps_report(build_fit_report(result, obs, cfg, args.input)), args.output)
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def cmd_fit_shared(args) -> int:
    table = load_observations(args.input, raw_counts=args.raw_counts)
    groups = table.by_condition()
    cfg = _fit_config(args)
    result = fit_shared(groups, cfg)
    _emit(dumps_report(build_shared_report(result, groups, cfg, args.input)), args.output)
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def cmd_fit_joint(args) -> int:
    table = load_observations(args.input, raw_counts=args.raw_counts)
    cfg = _fit_config(args)
    hold_out = [_parse_shape(s) for s in args.hold_out or []]
    fixed = (args.beta, args.p_e, args.p_d, args.l_inf)
    result = fit_joint(table.rows, fixed, cfg, hold_out=hold_out)
    _emit(
        dumps_report(build_joint_report(result, table.rows, cfg, args.input, hold_out)),
        args.output,
    )
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def cmd_fit_tail(args) -> int:
    table = load_observations(args.input, raw_counts=args.raw_counts)
    obs = _select_condition(table, args.condition)
    cfg = _fit_config(args)
    result = fit_tail(obs, args.d_min, cfg)
    subset = [o for o in obs if o.d_millions >= args.d_min]
    _emit(
        dumps_report(build_tail_report(result, subset, args.d_min, cfg, args.input)),
        args.output,
    )
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def cmd_fit_linear(args) -> int:
    import csv

    xs, ys = [], []
    with open(args.input, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in (args.x_column, args.y_column):
            if column not in header:
                raise ParseError(f"missing column {column!r}", line=1)
        for line, record in enumerate(reader, start=2):
            try:
                xs.append(float(record[args.x_column]))
                ys.append(float(record[args.y_column]))
            except (TypeError, ValueError):
                raise ParseError("non-numeric value", line=line) from None
    fit = fit_linear(xs, ys)
    _emit(
        dumps_report(
            build_linear_report(fit, xs, ys, args.input, args.x_column, args.y_column)
        ),
        args.output,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# Analysis commands
# ---------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    if args.equivalence:
        path_a, path_b = args.equivalence
        law_a = law_from_report(load_report(path_a), args.condition_a)
        law_b = law_from_report(load_report(path_b), args.condition_b)
        factor = data_equivalence_factor(law_a, law_b)
        _emit(repr(factor) + "\n", args.output)
        return EXIT_OK
    if not args.report:
        raise SchemaError("pass a report path or --equivalence FIT1 FIT2")
    report = load_report(args.report)

    def block(law: PowerLaw) -> dict:
        out = {
            "asymptotic_loss": asymptotic_loss(law),
            "transition_point": transition_point(law),
        }
        if args.marginal_at:
            out["marginal_value"] = [[d, marginal_value(law, d)] for d in args.marginal_at]
        return out

    if report["kind"] == "fit_shared" and args.condition is None:
        payload = {
            "p": report["p"],
            "per_condition": {
                label: block(law_from_report(report, label))
                for label in sorted(report["per_condition"])
            },
        }
    else:
        payload = block(law_from_report(report, args.condition))
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.output)
    return EXIT_OK


def cmd_report(args) -> int:
    _emit(format_table(load_report(args.report)), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Monte Carlo and simulation
# ---------------------------------------------------------------------------


def cmd_mc(args) -> int:
    table = load_observations(args.input, raw_counts=args.raw_counts)
    obs = _select_condition(table, args.condition)
    cfg_fit = FitConfig(
        loss_space=args.loss_space,
        max_iters=args.max_iters,
        rel_tol=args.rel_tol,
        n_restarts=args.n_restarts,
        seed=args.fit_seed,
    )
    cfg_mc = McConfig(noise_frac=args.noise_frac, n_reps=args.n_reps, seed=args.seed)
    summary = mc_uncertainty(obs, cfg_fit, cfg_mc)
    payload = {
        "schema": 1,
        "kind": "mc",
        "mean_p": summary.mean_p,
        "std_p": summary.std_p,
        "quantiles": {
            "q05": summary.quantiles[0],
            "q50": summary.quantiles[1],
            "q95": summary.quantiles[2],
        },
        "n_converged": summary.n_converged,
        "n_reps": args.n_reps,
        "noise_frac": args.noise_frac,
        "provenance": {"input": args.input, "seed": args.seed, "tool_version": __version__},
    }
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    grid = _parse_grid(args.d_grid)
    if args.joint:
        for name in ("beta", "p_e", "p_d", "l_inf", "shapes"):
            if getattr(args, name) is None:
                raise SchemaError(f"--joint requires --{name.replace('_', '-')}")
        params = JointLawParams(
            alpha=args.alpha,
            p=args.p,
            beta=args.beta,
            p_e=args.p_e,
            p_d=args.p_d,
            l_inf=args.l_inf,
        )
        shapes = [_parse_shape(s) for s in args.shapes.split(",")]
        table = simulate_joint(params, shapes, grid, args.noise_frac, args.seed)
    else:
        if args.c is None:
            raise SchemaError("--c is required unless --joint is given")
        law = PowerLaw(alpha=args.alpha, c=args.c, p=args.p)
        table = simulate(law, grid, args.noise_frac, args.seed, condition=args.condition)
    _emit(format_observations(table), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Corpus commands
# ---------------------------------------------------------------------------


def cmd_corpus_corrupt(args) -> int:
    if args.kind != "pair_shuffle" and args.side is None:
        raise SchemaError(f"--side is required for kind {args.kind}")
    prob = DEFAULT_PROBS[args.kind] if args.prob is None else args.prob
    spec = CorruptionSpec(
        kind=args.kind, side=args.side or "source", prob=prob, seed=args.seed
    )
    pairs = read_pairs(args.input)
    if args.kind == "char_noise":
        out = corrupt_chars(pairs, spec)
    elif args.kind == "word_delete":
        out = delete_words(pairs, spec)
    else:
        out = shuffle_pairs(list(pairs), spec)
    write_pairs(args.output, out)
    return EXIT_OK


def cmd_corpus_filter(args) -> int:
    write_pairs(args.output, filter_top_fraction(list(read_pairs(args.input)), args.fraction))
    return EXIT_OK


def cmd_corpus_sample(args) -> int:
    write_pairs(args.output, sample_subset(read_pairs(args.input), args.size, args.seed))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="datascale",
        description="Fit, analyze and stress-test data scaling curves; "
        "corrupt, filter and sample parallel corpora deterministically.",
    )
    parser.add_argument("--version", action="version", version=f"datascale {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit one condition's power law")
    _add_fit_options(p)
    p.add_argument("--condition", help="condition to fit when the file holds several")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("fit-shared", help="fit all conditions with a common exponent")
    _add_fit_options(p)
    p.set_defaults(func=cmd_fit_shared)

    p = sub.add_parser("fit-joint", help="fit (alpha, p) of the joint data/parameter law")
    _add_fit_options(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--p-e", type=float, required=True, dest="p_e")
    p.add_argument("--p-d", type=float, required=True, dest="p_d")
    p.add_argument("--l-inf", type=float, required=True, dest="l_inf")
    p.add_argument(
        "--hold-out",
        action="append",
        metavar="N_ENCxN_DEC",
        help="exclude a parameter-count shape from fitting (repeatable)",
    )
    p.set_defaults(func=cmd_fit_joint)

    p = sub.add_parser("fit-tail", help="fit the large-data tail law gamma*(1/d)^q + b")
    _add_fit_options(p)
    p.add_argument("--d-min", type=float, required=True, help="smallest size (millions) to include")
    p.add_argument("--condition", help="condition to fit when the file holds several")
    p.set_defaults(func=cmd_fit_tail)

    p = sub.add_parser("fit-linear", help="ordinary least squares between two CSV columns")
    p.add_argument("--input", required=True)
    p.add_argument("--x-column", required=True)
    p.add_argument("--y-column", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_fit_linear)

    p = sub.add_parser("analyze", help="derive regime quantities from a fit report")
    p.add_argument("report", nargs="?", help="fit report JSON")
    p.add_argument("--condition", help="condition selector for shared reports")
    p.add_argument(
        "--marginal-at",
        type=float,
        action="append",
        metavar="D",
        help="also report the marginal value of data at this size (repeatable)",
    )
    p.add_argument(
        "--equivalence",
        nargs=2,
        metavar=("FIT1", "FIT2"),
        help="print the data-equivalence factor between two fit reports",
    )
    p.add_argument("--condition-a", help="condition selector for FIT1 when shared")
    p.add_argument("--condition-b", help="condition selector for FIT2 when shared")
    p.add_argument("--output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("mc", help="Monte Carlo uncertainty of the fitted exponent")
    p.add_argument("--input", required=True)
    p.add_argument("--seed", type=int, required=True, help="Monte Carlo master seed")
    p.add_argument("--noise-frac", type=float, default=0.02)
    p.add_argument("--n-reps", type=int, default=1000)
    p.add_argument("--condition")
    p.add_argument("--raw-counts", action="store_true")
    p.add_argument("--loss-space", choices=("log", "linear"), default="log")
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--n-restarts", type=int, default=8)
    p.add_argument("--fit-seed", type=int, default=0, help="seed for each replicate's fit")
    p.add_argument("--output")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("simulate", help="generate synthetic observations from a law")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--d-grid", required=True, help="comma-separated sizes in millions")
    p.add_argument("--noise-frac", type=float, default=0.0)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--c", type=float, help="capacity constant (plain law)")
    p.add_argument("--condition", default="simulated")
    p.add_argument("--joint", action="store_true", help="simulate the joint law instead")
    p.add_argument("--beta", type=float)
    p.add_argument("--p-e", type=float, dest="p_e")
    p.add_argument("--p-d", type=float, dest="p_d")
    p.add_argument("--l-inf", type=float, dest="l_inf")
    p.add_argument("--shapes", help="comma-separated N_ENCxN_DEC shapes for --joint")
    p.add_argument("--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="render a fit report as a plot-ready CSV table")
    p.add_argument("--report", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_report)

    corpus = sub.add_parser("corpus", help="deterministic parallel-corpus operations")
    corpus_sub = corpus.add_subparsers(dest="corpus_command", required=True)

    alphabet_help = REPLACEMENT_ALPHABET.replace("%", "%%")
    p = corpus_sub.add_parser(
        "corrupt",
        help="inject character, word or pair-alignment noise",
        description=(
            "Apply one noise kind to a TAB-separated corpus. char_noise replaces "
            "each character of the chosen side with probability PROB (default 0.1) "
            f"by a symbol from the 94-character alphabet {alphabet_help} ; "
            "word_delete drops each whitespace-delimited word with probability "
            "PROB (default 0.15); pair_shuffle rotates the targets of a PROB "
            "(default 0.1) fraction of pairs so their alignment is destroyed."
        ),
    )
    p.add_argument("--kind", choices=("char_noise", "word_delete", "pair_shuffle"), required=True)
    p.add_argument("--side", choices=("source", "target"), help="side to corrupt")
    p.add_argument("--prob", type=float, help="per-unit probability (default depends on kind)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_corpus_corrupt)

    p = corpus_sub.add_parser("filter", help="keep the top-scoring fraction of pairs")
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_corpus_filter)

    p = corpus_sub.add_parser("sample", help="uniform subsample without replacement")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_corpus_sample)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MonteCarloError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except DataScaleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
