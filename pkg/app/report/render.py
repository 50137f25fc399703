"""
Report rendering: aligned text tables (rich), CSV tables (pandas) and SVG
charts (matplotlib) written to a report directory
"""

import io
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402
from loguru import logger  # noqa: E402
from rich.console import Console  # noqa: E402
from rich.table import Table  # noqa: E402

from app.errors import CheckpointError  # noqa: E402
from app.output.writers import load_results  # noqa: E402
from app.pipeline.manifest import RunManifest  # noqa: E402
from app.report.tables import (  # noqa: E402
    DecisionTable,
    ScoreHistogram,
    decision_agreement,
    decision_table,
    must_read_ratio,
    percentage,
    run_summary,
    score_distribution,
)
from app.screening.triage import ScreeningResult  # noqa: E402


def decision_frame(tables: Dict[str, DecisionTable]) -> pd.DataFrame:
    """Table-1 style layout: one row per run (and per year when grouped)"""
    rows = []
    for run, table in tables.items():
        for row in [table.overall] + table.by_year:
            record = {"run": run, "group": row.label, "total": row.total, "relevant_any": row.relevant_any}
            record.update({f"R_{l}": row.relevant_by_question[l] for l in table.question_labels})
            record["contributing_any"] = row.contributing_any
            record.update({f"C_{l}": row.contributing_by_question[l] for l in table.question_labels})
            record["stage_failed"] = row.stage_failed
            rows.append(record)
    return pd.DataFrame(rows)


def render_text_table(frame: pd.DataFrame, title: str) -> str:
    table = Table(title=title, show_header=True, header_style="bold")
    for column in frame.columns:
        table.add_column(str(column), justify="right" if column not in ("run", "group") else "left")
    for values in frame.astype(str).itertuples(index=False):
        table.add_row(*values)
    console = Console(record=True, width=240, file=io.StringIO(), color_system=None)
    console.print(table)
    return console.export_text()


def histogram_frame(histograms: Sequence[ScoreHistogram]) -> pd.DataFrame:
    rows = []
    for h in histograms:
        for i, count in enumerate(h.counts):
            rows.append({
                "question": h.question_label,
                "metric": h.metric,
                "bin_low": h.edges[i],
                "bin_high": h.edges[i + 1],
                "count": count,
            })
    return pd.DataFrame(rows, columns=["question", "metric", "bin_low", "bin_high", "count"])


def plot_score_histograms(histograms: Sequence[ScoreHistogram], path: Path, title: str) -> None:
    labels = list(dict.fromkeys(h.question_label for h in histograms))
    if not labels:
        return
    fig, axes = plt.subplots(len(labels), 2, figsize=(9, 2.4 * len(labels)), squeeze=False)
    for h in histograms:
        ax = axes[labels.index(h.question_label)][0 if h.metric == "relevance_score" else 1]
        widths = [h.edges[i + 1] - h.edges[i] for i in range(len(h.counts))]
        ax.bar(h.edges[:-1], h.counts, width=widths, align="edge", edgecolor="black")
        ax.set_xlim(0, 1)
        ax.set_title(f"{h.question_label} {h.metric.replace('_', ' ')}", fontsize=9)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_must_read(ratios: Dict[str, Tuple[int, int]], path: Path) -> None:
    runs = list(ratios)
    must = [ratios[r][0] for r in runs]
    discard = [ratios[r][1] for r in runs]
    fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(runs) + 2), 4))
    ax.bar(runs, must, label="must-read")
    ax.bar(runs, discard, bottom=must, label="discard")
    ax.set_ylabel("articles")
    ax.set_title("Must-read vs. discard")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _run_labels(paths: Sequence[Path]) -> List[str]:
    labels = []
    for path in paths:
        label = Path(path).stem
        while label in labels:
            label += "_"
        labels.append(label)
    return labels


def write_report(
    result_paths: Sequence[Path],
    out_dir: Path,
    bin_count: int = 10,
    by_year: bool = False,
) -> Dict[str, Path]:
    """
    Build every report for one or more results JSON files

    Returns:
        Map of artifact name -> written path
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise CheckpointError(f"Cannot create report directory {out_dir}: {e}") from e

    runs: Dict[str, Tuple[RunManifest, List[ScreeningResult]]] = {
        label: load_results(path) for label, path in zip(_run_labels(result_paths), result_paths)
    }
    written: Dict[str, Path] = {}

    def save_csv(name: str, frame: pd.DataFrame) -> None:
        path = out_dir / name
        frame.to_csv(path, index=False, lineterminator="\n")
        written[name] = path

    def save_text(name: str, text: str) -> None:
        path = out_dir / name
        path.write_text(text, encoding="utf-8")
        written[name] = path

    tables = {run: decision_table(results, by_year) for run, (_, results) in runs.items()}
    decisions = decision_frame(tables)
    save_csv("decision_table.csv", decisions)
    save_text("decision_table.txt", render_text_table(decisions, "Binary relevance and contribution decisions"))

    ratio_rows = []
    ratio_counts: Dict[str, Tuple[int, int]] = {}
    agreement_rows = []
    summary_rows = []
    for run, (manifest, results) in runs.items():
        ratio = must_read_ratio(results)
        table = tables[run]
        ratio_counts[run] = (ratio.must_read, ratio.discard)
        ratio_rows.append({
            "run": run,
            "must_read": ratio.must_read,
            "discard": ratio.discard,
            "must_read_pct": ratio.percent,
            "contributing_any_pct": percentage(table.overall.contributing_any, table.overall.total),
            "relevant_any_pct": percentage(table.overall.relevant_any, table.overall.total),
        })
        for row in decision_agreement(results):
            agreement_rows.append({"run": run, **row.model_dump()})
        summary_rows.append({"run": run, **run_summary(results, manifest).model_dump()})

        histograms = score_distribution(results, bin_count)
        save_csv(f"{run}_score_distribution.csv", histogram_frame(histograms))
        svg = out_dir / f"{run}_score_distribution.svg"
        plot_score_histograms(histograms, svg, f"Score distribution: {run}")
        if svg.exists():
            written[svg.name] = svg

    ratios = pd.DataFrame(ratio_rows)
    save_csv("must_read_ratio.csv", ratios)
    save_text("must_read_ratio.txt", render_text_table(ratios, "Must-read vs. discard"))
    plot_must_read(ratio_counts, out_dir / "must_read_ratio.svg")
    written["must_read_ratio.svg"] = out_dir / "must_read_ratio.svg"
    save_csv("decision_agreement.csv", pd.DataFrame(agreement_rows))
    summary = pd.DataFrame(summary_rows)
    save_csv("run_summary.csv", summary)
    save_text("run_summary.txt", render_text_table(summary, "Run summary"))

    logger.info(f"Wrote {len(written)} report artifacts to {out_dir}")
    return written
