#!/usr/bin/env python3
"""
Coded-Cache command-line front end.

Commands: rates, simulate, gap-sweep, region, check-all.
Results go to stdout as sorted-key JSON (or CSV with --format csv); logs go
to stderr. Exit codes: 0 success, 1 bad arguments or configuration,
2 a scientific invariant or theorem check failed.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import pandas as pd
from loguru import logger
from pydantic import ValidationError

from app.config import settings
from app.errors import ConfigError, InvariantViolation
from app.log import configure_logging
from app.models.bounds import Regime
from app.models.network import NetworkConfig
from app.models.region import SchemeKind
from app.records import (
    NetworkParams,
    OutputRecord,
    compare_results,
    fig3_results,
    frontier_results,
    rates_results,
    scheme_id,
    simulate_results,
)
from app.services import acceptance_service, gap_service, region_service

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INVARIANT = 2


class ArgumentParser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; here 2 is reserved for invariant failures."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


# ========== Output ==========

def emit(record: OutputRecord) -> None:
    sys.stdout.write(json.dumps(record.model_dump(mode="json"), sort_keys=True, indent=2) + "\n")


def emit_csv(text: str) -> None:
    sys.stdout.write(text)


def _network(args: argparse.Namespace) -> NetworkParams:
    return NetworkParams(n=args.n, k1=args.k1, k2=args.k2, m1=args.m1, m2=args.m2)


def _parameters(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("handler", "log_level", "threads")}


def _read_demands(value: Optional[str]) -> Optional[str]:
    """A path to a file of comma/whitespace separated indices, or the value itself."""
    if value is None or value == "uniform-random":
        return value
    path = Path(value)
    if path.is_file():
        return ",".join(path.read_text(encoding="utf-8").split())
    return value


# ========== Commands ==========

def cmd_rates(args: argparse.Namespace) -> int:
    config = _network(args).to_config()
    scheme = scheme_id(args.scheme, args.alpha, args.beta)
    results = rates_results(config, scheme)
    if args.format == "csv":
        emit_csv(region_service.to_csv(pd.DataFrame([results])))
        return EXIT_OK
    emit(OutputRecord(command="rates", parameters=_parameters(args), results=results))
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _network(args).to_config()
    scheme = scheme_id(args.scheme, args.alpha, args.beta)
    results = simulate_results(
        config,
        scheme,
        args.file_bits,
        args.seed,
        _read_demands(args.demands),
        transcripts=args.transcripts,
    )
    emit(OutputRecord(command="simulate", parameters=_parameters(args), results=results, seed=args.seed))
    return EXIT_OK


def cmd_gap_sweep(args: argparse.Namespace) -> int:
    template = NetworkConfig(
        library_size=args.n,
        helper_count=args.k1,
        users_per_helper=args.k2,
        helper_memory=0.0,
        user_memory=0.0,
    )
    regime = Regime(args.regime) if args.regime else None
    result = gap_service.sweep(template, args.grid, regime=regime, case=args.case, threads=args.threads)
    summary = result.summary

    if args.format == "csv":
        emit_csv(gap_service.sweep_csv(result))
        sys.stdout.write(f"# summary: {json.dumps(summary.model_dump(mode='json'), sort_keys=True)}\n")
    else:
        emit(OutputRecord(
            command="gap-sweep",
            parameters=_parameters(args),
            results={
                "summary": {**summary.model_dump(mode="json"), "passed": summary.passed},
                "rows": [gap_service.report_row(r) for r in result.reports],
            },
        ))

    if not summary.passed:
        logger.error(
            f"Gap sweep failed: theorem={summary.theorem_failures} case={summary.case_failures} "
            f"envelope={summary.envelope_failures}"
        )
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_region(args: argparse.Namespace) -> int:
    config = _network(args).to_config()

    if args.fig3:
        if args.format == "csv":
            values = args.values or region_service.FIG3_DEFAULT_VALUES
            rows = region_service.fig3_table(config, args.fig3, args.fixed, values)
            emit_csv(region_service.to_csv(region_service.fig3_frame(rows, args.fig3, args.fixed)))
        else:
            results = fig3_results(config, args.fig3, args.fixed, args.values)
            emit(OutputRecord(command="region", parameters=_parameters(args), results=results))
        return EXIT_OK

    if args.compare:
        if args.format == "csv":
            hybrid = region_service.frontier(config, SchemeKind.HYBRID, args.grid, threads=args.threads)
            generalized = region_service.frontier(config, SchemeKind.GENERALIZED, args.grid, threads=args.threads)
            emit_csv(region_service.to_csv(region_service.frontier_frame(hybrid, generalized)))
        else:
            results = compare_results(config, args.grid, threads=args.threads)
            emit(OutputRecord(command="region", parameters=_parameters(args), results=results))
        return EXIT_OK

    scheme = SchemeKind(args.scheme)
    if args.format == "csv":
        frontier = region_service.frontier(config, scheme, args.grid, threads=args.threads)
        emit_csv(region_service.to_csv(region_service.frontier_frame(frontier)))
        return EXIT_OK
    emit(OutputRecord(
        command="region",
        parameters=_parameters(args),
        results=frontier_results(config, scheme, args.grid, threads=args.threads),
    ))
    return EXIT_OK


def cmd_check_all(args: argparse.Namespace) -> int:
    options = acceptance_service.AcceptanceOptions(
        seed=args.seed,
        samples=args.samples,
        region_configs=args.region_configs,
        region_resolution=args.region_resolution,
        decode_trials=args.trials,
        convergence_file_bits=args.file_bits,
        sweep_grid=args.grid,
        threads=args.threads,
    )
    results = acceptance_service.run_all(options)
    for result in results:
        sys.stdout.write(json.dumps(result.model_dump(mode="json"), sort_keys=True) + "\n")
    failed = [r.criterion for r in results if not r.passed]
    if failed:
        logger.error(f"Acceptance criteria failed: {failed}")
        return EXIT_INVARIANT
    logger.success(f"All {len(results)} acceptance criteria passed")
    return EXIT_OK


# ========== Parser ==========

def _add_topology(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=int, required=True, help="Library size N")
    parser.add_argument("--k1", type=int, required=True, help="Number of helpers K1")
    parser.add_argument("--k2", type=int, required=True, help="Users per helper K2")


def _add_memories(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--m1", type=float, required=True, help="Helper memory M1 (files)")
    parser.add_argument("--m2", type=float, required=True, help="User memory M2 (files)")


def _add_scheme(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scheme", choices=[k.value for k in SchemeKind], default=SchemeKind.SC.value)
    parser.add_argument("--alpha", type=float, default=None, help="File share of the S&C subsystem")
    parser.add_argument("--beta", type=float, default=None, help="User-memory share of the S&C subsystem")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="coded-cache", description="Two-layer decentralized coded caching toolkit")
    parser.add_argument("--log-level", default=None, help="loguru level for stderr (default from settings)")
    common = ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--threads", type=int, default=settings.threads, help="Worker threads (CODED_CACHE_THREADS)")

    commands = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    rates = commands.add_parser("rates", parents=[common], help="Closed-form (r1, r2) of one scheme")
    _add_topology(rates)
    _add_memories(rates)
    _add_scheme(rates)
    rates.set_defaults(handler=cmd_rates)

    simulate = commands.add_parser("simulate", parents=[common], help="Bit-level placement, delivery and decoding")
    _add_topology(simulate)
    _add_memories(simulate)
    _add_scheme(simulate)
    simulate.add_argument("--file-bits", type=int, default=settings.default_file_bits, help="F, bits per file")
    simulate.add_argument("--seed", type=int, default=settings.default_seed)
    simulate.add_argument(
        "--demands", default=None, help="'uniform-random', comma-separated indices (i-major), or a file of indices"
    )
    simulate.add_argument("--transcripts", action="store_true", help="Include one record per delivered message")
    simulate.set_defaults(handler=cmd_simulate)

    sweep = commands.add_parser("gap-sweep", parents=[common], help="Order-optimality checks over an (M1, M2) grid")
    _add_topology(sweep)
    sweep.add_argument("--grid", type=int, default=settings.gap_grid, help="Points per memory axis")
    sweep.add_argument("--regime", choices=[r.value for r in Regime], default=None)
    sweep.add_argument("--case", default=None, help="Case letter or full key such as II.I.C")
    sweep.set_defaults(handler=cmd_gap_sweep)

    region = commands.add_parser("region", parents=[common], help="Achievable-region frontiers")
    _add_topology(region)
    _add_memories(region)
    region.add_argument("--scheme", choices=[SchemeKind.HYBRID.value, SchemeKind.GENERALIZED.value], default="hybrid")
    region.add_argument("--grid", type=int, default=settings.frontier_resolution, help="Points per share axis")
    mode = region.add_mutually_exclusive_group()
    mode.add_argument("--compare", action="store_true", help="Hybrid vs generalized dominance")
    mode.add_argument("--fig3", choices=["alpha", "beta"], default=None, help="Vary one share, hold the other")
    region.add_argument("--fixed", type=float, default=0.5, help="Value of the share held fixed in --fig3 mode")
    region.add_argument("--values", type=float, nargs="+", default=None, help="Varied share values for --fig3")
    region.set_defaults(handler=cmd_region)

    check = commands.add_parser("check-all", parents=[common], help="Run every acceptance check at desk scale")
    check.add_argument("--seed", type=int, default=0)
    check.add_argument("--samples", type=int, default=10_000, help="Random configs for identity and oracle checks")
    check.add_argument("--region-configs", type=int, default=100)
    check.add_argument("--region-resolution", type=int, default=101)
    check.add_argument("--trials", type=int, default=100, help="Decode trials per scheme")
    check.add_argument("--file-bits", type=int, default=1_000_000, help="F for the convergence check")
    check.add_argument("--grid", type=int, default=settings.gap_grid)
    check.set_defaults(handler=cmd_check_all)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except ConfigError as exc:
        logger.error(exc.message)
        sys.stderr.write(json.dumps(exc.to_dict(), sort_keys=True) + "\n")
        return EXIT_CONFIG
    except ValidationError as exc:
        logger.error(f"Invalid arguments: {exc}")
        return EXIT_CONFIG
    except InvariantViolation as exc:
        logger.error(exc.message)
        sys.stderr.write(json.dumps(exc.to_dict(), sort_keys=True) + "\n")
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
