"""fso-tp: transmission-probability sweeps, Monte Carlo validation and quadrature dumps.

Examples:

    fso-tp sweep --config fig3 --target tplr --var theta-d \
        --range 1e-13:1e-10:20:log --methods ghq,asymptotic
    fso-tp mc-validate --config fig8 --target tpre --mc-samples 1000000
    fso-tp nodes --kind legendre --order 2

Exit codes: 0 success, 1 usage or configuration error, 2 validation failure.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import NoReturn

from dotenv import load_dotenv

from src import commands
from src.commands import MonteCarloSpec, SweepRange, SweepSpec, SweepVariable, Target
from src.config import ConfigError, load_scenario
from src.numerics.quadrature import DEFAULT_HERMITE_ORDER, DEFAULT_LEGENDRE_ORDER, RuleKind

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = float(raw)
    except ValueError:
        raise UsageError(f"{name} must be a number, got {raw!r}") from None
    if value != int(value):
        raise UsageError(f"{name} must be an integer, got {raw!r}")
    return int(value)


def _count(text: str) -> int:
    """Accept 1000000 as well as 1e6."""
    value = float(text)
    if value != int(value):
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(value)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        required=True,
        help="Scenario file path or shipped preset name (e.g. fig3, fig8, fig9).",
    )
    parser.add_argument(
        "--target",
        required=True,
        choices=[t.value for t in Target],
        help="Transmission probability to evaluate.",
    )
    parser.add_argument("--order", type=int, help="Quadrature order N.")
    parser.add_argument("--mc-samples", type=_count, help="Monte Carlo sample count.")
    parser.add_argument("--seed", type=int, help="Monte Carlo seed.")
    parser.add_argument("--workers", type=int, help="Parallel workers.")
    parser.add_argument("--out", type=Path, help="Write output to PATH instead of stdout.")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="fso-tp",
        description="Transmission probabilities of FSO/QKD links under Beckmann pointing errors",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Log diagnostics to stderr.")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="Evaluate methods over a parameter grid and emit CSV.")
    _add_common(sweep)
    sweep.add_argument(
        "--var",
        required=True,
        choices=[v.value for v in SweepVariable],
        help="Swept quantity.",
    )
    sweep.add_argument(
        "--range",
        required=True,
        type=SweepRange.parse,
        help="start:stop:count[:log]",
    )
    sweep.add_argument(
        "--methods",
        help="Comma-separated methods (default: ghq, or quadrature for tpre-rayleigh).",
    )

    validate = sub.add_parser("mc-validate", help="Compare one analytic value against Monte Carlo.")
    _add_common(validate)
    validate.add_argument("--method", help="Analytic method to validate.")

    nodes = sub.add_parser("nodes", help="Dump a Gaussian quadrature rule as CSV.")
    nodes.add_argument(
        "--kind",
        default=RuleKind.HERMITE.value,
        choices=[k.value for k in RuleKind],
        help="Rule family.",
    )
    nodes.add_argument("--order", type=int, help="Number of nodes.")
    nodes.add_argument("--out", type=Path, help="Write output to PATH instead of stdout.")
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")
        logger.info("Wrote %s", out)


def _order(args: argparse.Namespace, target: Target) -> int:
    if args.order is not None:
        return args.order
    if target is Target.TPRE_RAYLEIGH:
        return _env_int("FSO_TP_LEGENDRE_ORDER", DEFAULT_LEGENDRE_ORDER)
    return _env_int("FSO_TP_HERMITE_ORDER", DEFAULT_HERMITE_ORDER)


def _mc(args: argparse.Namespace, required: bool) -> MonteCarloSpec | None:
    if args.mc_samples is None and not required:
        return None
    n_samples = args.mc_samples or _env_int("FSO_TP_MC_SAMPLES", 10_000_000)
    seed = args.seed if args.seed is not None else _env_int("FSO_TP_SEED", 0)
    return MonteCarloSpec(n_samples, seed)


def _workers(args: argparse.Namespace) -> int:
    return args.workers if args.workers is not None else _env_int("FSO_TP_WORKERS", 1)


def _run(args: argparse.Namespace) -> int:
    if args.command == "nodes":
        kind = RuleKind(args.kind)
        default = DEFAULT_HERMITE_ORDER if kind is RuleKind.HERMITE else DEFAULT_LEGENDRE_ORDER
        order = args.order if args.order is not None else default
        _emit(commands.dump_nodes(kind, order), args.out)
        return EXIT_OK

    target = Target(args.target)
    scenario = load_scenario(args.config)

    if args.command == "sweep":
        if args.methods:
            methods = args.methods.split(",")
        else:
            methods = [next(iter(commands.EVALUATORS[target]))]
        spec = SweepSpec(
            target=target,
            sweep_variable=SweepVariable(args.var),
            range=args.range,
            methods=tuple(m.strip() for m in methods),
            scenario=scenario,
            quadrature_order=_order(args, target),
            mc=_mc(args, required=False),
            workers=_workers(args),
        )
        _emit(commands.run_sweep(spec), args.out)
        return EXIT_OK

    mc = _mc(args, required=True)
    assert mc is not None
    report = commands.run_mc_validate(
        scenario,
        target,
        mc,
        method=args.method,
        order=_order(args, target),
        workers=_workers(args),
    )
    _emit(report.render(), args.out)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        return _run(args)
    except (ConfigError, UsageError, ValueError, OSError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
