"""Command line entry point: `python -m app analyze data.csv`.

Exit codes: 0 when the battery ran without severe flags, 2 when at least one
severe flag was raised, 1 on any execution error.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from .core.config import load_settings
from .core.errors import ForensicsError
from .core.logging import configure_logging
from .models.dataset import CATEGORIES, CalibrationScale
from .services.battery import run_battery, simulation_config_for
from .services.dataset_loader import filter_points, load_dataset
from .services.digit_forensics import DigitPosition
from .services.report_writer import ReportFormat, emit_plot_data, emit_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SEVERE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="comet-forensics",
        description="Forensic statistics for duplicate-slide comet assay counts",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="Run the full forensic battery on a CSV file")
    analyze.add_argument("dataset", type=Path, help="CSV with header label,A,B,C,D,E; two rows per point")
    analyze.add_argument("--scale", help="Comma-separated damage factors for A-E (default 2.5,12.5,30,67.5,97.5)")
    analyze.add_argument("--population-size", type=int, help="Cells in the reconstructed population")
    analyze.add_argument("--cells-per-slide", type=int, help="Cells scored per slide")
    analyze.add_argument("--replicates", type=int, help="Simulated datasets to aggregate over")
    analyze.add_argument("--seed", type=int, help="Simulation seed (env DEFAULT_SEED)")
    analyze.add_argument("--alpha", type=float, help="Significance level for raising flags")
    analyze.add_argument("--digit-column", choices=CATEGORIES, type=str.upper, help="Count column for digit tests")
    analyze.add_argument(
        "--digit-position", choices=[p.value for p in DigitPosition], help="Digit analysed in each count"
    )
    analyze.add_argument("--label-filter", help="Only analyse points whose label starts with this prefix")
    analyze.add_argument("--report", type=Path, help="Also write the structured report to this file")
    analyze.add_argument("--plots", type=Path, help="Existing directory for fig1.csv / fig2.csv plot data")
    analyze.add_argument(
        "--format", choices=[f.value for f in ReportFormat], default=ReportFormat.TEXT.value,
        help="Report format on stdout",
    )
    analyze.add_argument("--config", type=Path, help="Settings file in .env format")
    analyze.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    return parser


def analyze(args: argparse.Namespace) -> int:
    conf = load_settings(args.config)
    configure_logging(args.log_level or conf.LOG_LEVEL)

    scale = CalibrationScale.parse(args.scale) if args.scale else CalibrationScale(weights=conf.DEFAULT_SCALE)
    try:
        dataset = load_dataset(args.dataset, scale)
    except OSError as exc:
        raise ForensicsError(f"cannot read {args.dataset}: {exc.strerror}", module="data-model")
    if args.label_filter:
        dataset = filter_points(dataset, args.label_filter)
        logger.info("Label filter %r kept %d points", args.label_filter, len(dataset.points))

    cfg = simulation_config_for(
        dataset,
        seed=args.seed,
        replicates=args.replicates,
        population_size=args.population_size,
        cells_per_slide=args.cells_per_slide,
        config=conf,
    )
    report = run_battery(
        dataset,
        cfg,
        args.alpha if args.alpha is not None else conf.ALPHA,
        digit_column=args.digit_column,
        digit_position=args.digit_position,
        config=conf,
    )

    sys.stdout.write(emit_report(report, ReportFormat(args.format)).decode("utf-8"))
    if args.report:
        try:
            args.report.write_bytes(emit_report(report, ReportFormat.STRUCTURED))
        except OSError as exc:
            raise ForensicsError(f"cannot write report {args.report}: {exc.strerror}", module="report-cli")
    if args.plots:
        emit_plot_data(report, args.plots, conf.PLOT_CATEGORIES)
    return EXIT_SEVERE if report.has_severe else EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return analyze(args)
    except ForensicsError as exc:
        print(f"error [{exc.module}]: {exc.args[0]}", file=sys.stderr)
    except (ValidationError, ValueError) as exc:
        print(f"error [report-cli]: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
