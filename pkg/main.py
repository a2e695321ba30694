r"""
DonorQCA - Optically gated donor-chain quantum cellular automaton simulator

Entry point: device parameters, ensemble runs, oracle comparison and tomography.

Usage:
    python main.py params --device data/reference_device.json
    python main.py run --device reference --program ramsey --molecules 10000 --t2 5
    python main.py compare --device selective --program ca_step
    python main.py tomo --device reference --program shift_and_read --molecules 1000
    python main.py demo                 List the canned demos
    python main.py demo hahn_echo       Run a demo on its own device preset

Exit codes: 0 success, 2 configuration error, 3 program format error,
4 infeasible selectivity, 1 other simulation error, 130 interrupted.
The seed defaults to 20050101; DONORQCA_SEED overrides it unless --seed is given.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from rich.console import Console
from rich.logging import RichHandler

console = Console()

BANNER = r"""
   ____                        ___   ____    _
  |  _ \  ___  _ __   ___  _ _/ _ \ / ___|  / \
  | | | |/ _ \| '_ \ / _ \| '_| | | | |     / _ \
  | |_| | (_) | | | | (_) | | | |_| | |___ / ___ \
  |____/ \___/|_| |_|\___/|_|  \__\_\\____/_/   \_\
  Donor-chain quantum cellular automaton simulator v1.0
"""

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_PROGRAM = 3
EXIT_SELECTIVITY = 4
EXIT_INTERRUPTED = 130


def _add_run_options(parser: argparse.ArgumentParser, with_program: bool = True) -> None:
    parser.add_argument("--device", type=str, default=None, metavar="FILE",
                        help="Device JSON file or preset name: reference, selective (default: reference)")
    if with_program:
        parser.add_argument("--program", type=str, default=None, metavar="FILE",
                            help="Program JSON file or demo name (default: empty program)")
    parser.add_argument("--molecules", type=int, default=None, metavar="N",
                        help="Ensemble size (default: 1000)")
    parser.add_argument("--seed", type=int, default=None,
                        help="Master RNG seed (default: $DONORQCA_SEED or 20050101)")
    parser.add_argument("--dt", type=float, default=None, metavar="NS",
                        help="Integration step in ns (default: event duration / 2000)")
    parser.add_argument("--out", type=str, default=None, metavar="DIR",
                        help="Output directory (default: results)")
    parser.add_argument("--format", type=str, default=None, metavar="LIST",
                        help="Comma-separated output formats: csv,json (default: both)")
    parser.add_argument("--workers", type=int, default=None, metavar="N",
                        help="Worker threads for the ensemble (default: 1)")
    parser.add_argument("--level", type=str, default=None, choices=["pulse", "oracle"],
                        help="Simulation level (default: pulse)")
    parser.add_argument("--t2", type=float, default=None, metavar="US",
                        help="T2 in μs applied to every cell type")
    parser.add_argument("--observable", type=str, action="append", default=None, metavar="OBS",
                        help="Observable such as Z0 or X2Z3 (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="DonorQCA - Donor-chain quantum cellular automaton simulator",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging on stderr")
    parser.add_argument("--quiet", "-q", action="store_true", help="No banner and no progress bars")
    sub = parser.add_subparsers(dest="command", required=True)

    p_params = sub.add_parser("params", help="Print the derived device-parameter table")
    p_params.add_argument("--device", type=str, default=None, metavar="FILE",
                          help="Device JSON file or preset name (default: reference)")
    p_params.add_argument("--out", type=str, default=None, metavar="DIR",
                          help="Also write params.json into DIR")

    _add_run_options(sub.add_parser("run", help="Run a program over the noisy ensemble"))
    _add_run_options(sub.add_parser("compare", help="Oracle-vs-pulse fidelity of a program"))
    _add_run_options(sub.add_parser("tomo", help="Tomography of the D cell after a program"))

    p_demo = sub.add_parser("demo", help="List or run the canned demo programs")
    p_demo.add_argument("name", nargs="?", default=None, help="Demo to run")
    p_demo.add_argument("--mode", type=str, default="run", choices=["run", "compare", "tomo"],
                        help="What to do with the demo program (default: run)")
    p_demo.add_argument("--save-program", type=str, default=None, metavar="FILE",
                        help="Write the demo program as JSON")
    _add_run_options(p_demo, with_program=False)
    return parser


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=verbose)],
        force=True,
    )


def cmd_params(args) -> int:
    from config import load_device
    from device_params import parameter_table
    from report import show_param_table
    from runner import write_json

    spec = load_device(args.device or "reference")
    rows = parameter_table(spec)
    show_param_table(rows)
    if args.out:
        path = write_json(Path(args.out) / "params.json",
                          {"device": spec.pattern_string, "rows": [r.to_dict() for r in rows]})
        console.print(f"  Output: [cyan]{path}[/]")
    return EXIT_OK


def _execute(mode: str, cfg, quiet: bool) -> int:
    from report import show_compare_report, show_run_report, show_tomography
    from runner import execute_compare, execute_run, execute_tomo

    progress_console = None if quiet else console
    if mode == "run":
        outcome = execute_run(cfg, progress_console)
        show_run_report(outcome.summary, outcome.summary.get("final", {}), outcome.files,
                        outcome.duration_s)
    elif mode == "compare":
        report, files = execute_compare(cfg, progress_console)
        show_compare_report(report, files)
    else:
        result, files = execute_tomo(cfg, progress_console)
        show_tomography(result, files)
    return EXIT_OK


def cmd_demo(args) -> int:
    import demos
    from config import load_device, run_config_from_args
    from programs import save_program
    from report import show_demo_list

    if args.name is None:
        show_demo_list(demos.ALL_DEMOS)
        return EXIT_OK
    demo = demos.get_demo(args.name)
    if demo is None:
        console.print(f"[red]Unknown demo '{args.name}'. "
                      f"Available: {', '.join(demos.get_demo_names())}[/]")
        return EXIT_FAILURE
    if args.device is None:
        args.device = demo.device
    args.program = demo.name
    if args.save_program:
        save_program(demo.build(load_device(args.device)), args.save_program)
        console.print(f"  Program: [cyan]{args.save_program}[/]")
    console.print(f"[cyan]Demo: [bold]{demo.display_name}[/] — {demo.description}[/]")
    return _execute(args.mode, run_config_from_args(args), args.quiet)


def main(argv: Optional[List[str]] = None) -> int:
    from models import ConfigError, InfeasibleSelectivityError, ProgramFormatError, QcaError
    from report import show_error

    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    if not args.quiet:
        console.print(f"[bold cyan]{BANNER}[/]")

    try:
        if args.command == "params":
            return cmd_params(args)
        if args.command == "demo":
            return cmd_demo(args)
        from config import run_config_from_args
        return _execute(args.command, run_config_from_args(args), args.quiet)
    except ConfigError as exc:
        show_error(exc)
        return EXIT_CONFIG
    except ProgramFormatError as exc:
        show_error(exc)
        return EXIT_PROGRAM
    except InfeasibleSelectivityError as exc:
        show_error(exc)
        return EXIT_SELECTIVITY
    except (QcaError, ValueError) as exc:
        show_error(exc)
        return EXIT_FAILURE


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted. Partial results were not written.[/]")
        sys.exit(EXIT_INTERRUPTED)
