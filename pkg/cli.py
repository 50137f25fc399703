#!/usr/bin/env python3
"""
LLAssist command-line client

Examples:
    # Check that the inputs parse (no backend calls)
    python cli.py validate --articles scopus.csv --questions rq.txt

    # Screen a corpus with the built-in mock backend
    python cli.py screen --articles scopus.csv --questions rq.txt --backend mock --out runs/mock

    # Continue after a backend outage
    python cli.py screen --articles scopus.csv --questions rq.txt --backend gpt --out runs/gpt --resume

    # Aggregate one or more runs
    python cli.py report --results runs/*/results.json --out report --by-year

Exit codes: 0 success, 1 input or configuration error, 2 backend unavailable (resumable)
"""

import argparse
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Dict, Optional, Sequence

from loguru import logger
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from app.clock import make_clock
from app.config import ScreeningConfig, Settings, load_settings
from app.errors import ConfigurationError, LLAssistError, RunHalted
from app.ingest import load_articles, load_questions
from app.logging_setup import configure_logging
from app.output import emit_csv, emit_json
from app.pipeline import ScreeningPipeline
from app.prompts import load_templates
from app.report.render import write_report
from app.report.tables import must_read_ratio, run_summary

console = Console()

CHECKPOINT_FILE = "checkpoint.jsonl"
RESULTS_JSON = "results.json"
RESULTS_CSV = "results.csv"


class UsageExitParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit 1 (exit 2 is reserved for backend halts)"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = UsageExitParser(
        prog="llassist",
        description="LLM-assisted screening of literature search results",
    )
    parser.add_argument("--config", type=Path, help="TOML config file (default: $LLASSIST_CONFIG or ./llassist.toml)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # screen
    screen = subparsers.add_parser("screen", help="Screen articles against research questions")
    screen.add_argument("--articles", type=Path, required=True, help="Search-results CSV export")
    screen.add_argument("--questions", type=Path, required=True, help="Research questions, one per line")
    screen.add_argument("--backend", required=True, help="Backend name from the config file (built-in: mock)")
    screen.add_argument("--out", type=Path, required=True, help="Output directory")
    screen.add_argument("--threshold", type=float, help="Score threshold for the derived flags (default 0.7)")
    screen.add_argument("--mapping", type=Path, help="TOML file mapping fields to CSV column names")
    screen.add_argument("--workers", type=_positive_int, help="Articles processed concurrently")
    screen.add_argument("--resume", action="store_true", help="Continue from the checkpoint in --out")

    # report
    report = subparsers.add_parser("report", help="Aggregate tables and charts over results files")
    report.add_argument("--results", type=Path, nargs="+", required=True, help="results.json files")
    report.add_argument("--out", type=Path, required=True, help="Report directory")
    report.add_argument("--bins", type=_positive_int, default=10, help="Score histogram bins (default 10)")
    report.add_argument("--by-year", action="store_true", help="Break decision counts down by year")

    # validate
    validate = subparsers.add_parser("validate", help="Parse inputs and print counts and warnings")
    validate.add_argument("--articles", type=Path, required=True)
    validate.add_argument("--questions", type=Path, required=True)
    validate.add_argument("--mapping", type=Path)

    return parser


def read_mapping_file(path: Path) -> Dict[str, str]:
    """Column override file: either flat `field = "Column"` pairs or a [mapping] table"""
    try:
        with open(path, "rb") as f:
            document = tomllib.load(f)
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise ConfigurationError(f"Cannot read mapping file {path}: {e}") from e
    table = document.get("mapping", document)
    if not isinstance(table, dict) or not all(isinstance(v, str) for v in table.values()):
        raise ConfigurationError(f"Mapping file {path} must map field names to column names")
    return dict(table)


def column_override(settings: Settings, mapping_file: Optional[Path]) -> Dict[str, str]:
    override = dict(settings.mapping)
    if mapping_file is not None:
        override.update(read_mapping_file(mapping_file))
    return override


def screening_config(settings: Settings, args: argparse.Namespace) -> ScreeningConfig:
    values = settings.screening.model_dump()
    if args.threshold is not None:
        values["threshold"] = args.threshold
    if args.workers is not None:
        values["workers"] = args.workers
    try:
        return ScreeningConfig(**values)
    except ValueError as e:
        raise ConfigurationError(f"Invalid screening option: {e}") from e


def cmd_validate(settings: Settings, args: argparse.Namespace) -> int:
    articles, warnings = load_articles(args.articles, column_override(settings, args.mapping))
    questions = load_questions(args.questions)
    console.print(f"{len(articles)} articles, {len(questions)} questions", highlight=False)
    for warning in warnings:
        console.print(f"[yellow]warning[/yellow] {escape(str(warning))}", highlight=False, soft_wrap=True)
    return 0


def _print_screen_summary(results, manifest) -> None:
    ratio = must_read_ratio(results)
    summary = run_summary(results, manifest)

    table = Table(title=f"Run {manifest.run_id}", show_header=True, header_style="bold magenta")
    table.add_column("Metric", style="cyan")
    table.add_column("Value", justify="right")
    table.add_row("Articles", str(summary.articles))
    table.add_row("Must-read", f"{ratio.must_read} ({ratio.percent})")
    table.add_row("Discard", str(ratio.discard))
    table.add_row("Stage failures", str(summary.stage_failures))
    tokens = f"{summary.prompt_tokens} in / {summary.completion_tokens} out"
    table.add_row("Tokens", tokens + (" (estimated)" if summary.tokens_estimated else ""))
    table.add_row("Cost (USD)", "n/a" if summary.total_cost is None else f"{summary.total_cost:.6f}")
    console.print(table)


def cmd_screen(settings: Settings, args: argparse.Namespace) -> int:
    backend = settings.backend(args.backend)
    config = screening_config(settings, args)
    articles, warnings = load_articles(args.articles, column_override(settings, args.mapping))
    for warning in warnings:
        logger.warning(f"{args.articles}: {warning}")
    questions = load_questions(args.questions)

    out_dir: Path = args.out
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigurationError(f"Cannot create output directory {out_dir}: {e}") from e
    checkpoint = out_dir / CHECKPOINT_FILE

    pipeline = ScreeningPipeline(
        backend,
        config,
        templates=load_templates(settings.templates),
        clock=make_clock(settings.fixed_clock),
    )
    if args.resume:
        results = pipeline.resume(articles, questions, checkpoint)
    else:
        results = pipeline.run(articles, questions, checkpoint)

    emit_json(results, pipeline.manifest, out_dir / RESULTS_JSON)
    emit_csv(results, questions, out_dir / RESULTS_CSV)
    _print_screen_summary(results, pipeline.manifest)
    console.print(f"[green]✓[/green] Results written to {out_dir}")
    return 0


def cmd_report(settings: Settings, args: argparse.Namespace) -> int:
    written = write_report(args.results, args.out, bin_count=args.bins, by_year=args.by_year)
    text = args.out / "decision_table.txt"
    if text.exists():
        console.print(text.read_text(encoding="utf-8"), highlight=False, markup=False)
    console.print(f"[green]✓[/green] {len(written)} report files written to {args.out}")
    return 0


COMMANDS = {
    "screen": cmd_screen,
    "report": cmd_report,
    "validate": cmd_validate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        settings = load_settings(args.config)
        configure_logging(settings.log_level, settings.log_file)
        return COMMANDS[args.command](settings, args)
    except RunHalted as e:
        console.print(f"[red]✗ Run halted:[/red] {escape(str(e))}", highlight=False, soft_wrap=True)
        console.print("Re-run the same command with [yellow]--resume[/yellow] when the backend is back.")
        return e.exit_code
    except LLAssistError as e:
        console.print(f"[red]✗ {type(e).__name__}:[/red] {escape(str(e))}", highlight=False, soft_wrap=True)
        return e.exit_code
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted; completed articles are in the checkpoint.[/yellow]")
        return 130


if __name__ == "__main__":
    sys.exit(main())
