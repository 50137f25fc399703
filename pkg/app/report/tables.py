"""
Aggregate analyses over screening results
Decision-count tables, score histograms, must-read ratios, model-stated vs
derived agreement and run cost/latency summaries
"""

from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel

from app.pipeline.manifest import RunManifest
from app.screening.triage import ScreeningResult


UNKNOWN_YEAR = "unknown"
METRICS = ("relevance_score", "contribution_score")


def percentage(count: int, total: int) -> str:
    """One-decimal percentage, or n/a for an empty denominator"""
    return "n/a" if total == 0 else f"{100 * count / total:.1f}%"


def question_labels_of(results: Sequence[ScreeningResult]) -> List[str]:
    return [a.question_label for a in results[0].assessments] if results else []


class DecisionRow(BaseModel):
    label: str
    total: int
    relevant_any: int
    relevant_by_question: Dict[str, int]
    contributing_any: int
    contributing_by_question: Dict[str, int]
    stage_failed: int = 0


class DecisionTable(BaseModel):
    """Binary relevance / contribution decision counts for one run"""

    question_labels: List[str]
    overall: DecisionRow
    by_year: List[DecisionRow] = []


def _flag_frame(results: Sequence[ScreeningResult], labels: List[str]) -> pd.DataFrame:
    records = []
    for result in results:
        row = {
            "year": str(result.article.year) if result.article.year is not None else UNKNOWN_YEAR,
            "failed": result.stage_failed,
        }
        by_label = {a.question_label: a for a in result.assessments}
        for label in labels:
            assessment = by_label.get(label)
            row[f"R:{label}"] = bool(assessment and assessment.is_relevant)
            row[f"C:{label}"] = bool(assessment and assessment.is_contributing)
        records.append(row)

    columns = ["year", "failed"] + [f"{k}:{l}" for l in labels for k in ("R", "C")]
    frame = pd.DataFrame(records, columns=columns)
    frame["R_any"] = frame[[f"R:{l}" for l in labels]].any(axis=1) if labels else False
    frame["C_any"] = frame[[f"C:{l}" for l in labels]].any(axis=1) if labels else False
    return frame


def _decision_row(label: str, frame: pd.DataFrame, labels: List[str]) -> DecisionRow:
    return DecisionRow(
        label=label,
        total=len(frame),
        relevant_any=int(frame["R_any"].sum()),
        relevant_by_question={l: int(frame[f"R:{l}"].sum()) for l in labels},
        contributing_any=int(frame["C_any"].sum()),
        contributing_by_question={l: int(frame[f"C:{l}"].sum()) for l in labels},
        stage_failed=int(frame["failed"].sum()),
    )


def _year_order(bucket: str):
    return (1, 0) if bucket == UNKNOWN_YEAR else (0, int(bucket))


def decision_table(
    results: Sequence[ScreeningResult],
    group_by_year: bool = False,
    label: str = "all",
) -> DecisionTable:
    """
    Count articles per decision family

    "Any" columns are per-article ORs across questions. Stage-failed
    assessments count as flag-false; the failure count is reported alongside.
    With group_by_year, one extra row per publication year plus "unknown".
    """
    labels = question_labels_of(results)
    frame = _flag_frame(results, labels)
    table = DecisionTable(question_labels=labels, overall=_decision_row(label, frame, labels))
    if group_by_year and len(frame):
        for bucket in sorted(frame["year"].unique(), key=_year_order):
            table.by_year.append(_decision_row(bucket, frame[frame["year"] == bucket], labels))
    return table


class ScoreHistogram(BaseModel):
    question_label: str
    metric: str
    edges: List[float]
    counts: List[int]


def bin_scores(scores: Sequence[float], bin_count: int) -> List[int]:
    """Equal-width bins over [0,1]; right-closed, first bin closed on both ends"""
    if bin_count < 1:
        raise ValueError("bin_count must be at least 1")
    edges = np.linspace(0.0, 1.0, bin_count + 1)
    positions = np.searchsorted(edges, np.asarray(scores, dtype=float), side="left") - 1
    positions = np.clip(positions, 0, bin_count - 1)
    return np.bincount(positions, minlength=bin_count).astype(int).tolist()


def score_distribution(results: Sequence[ScreeningResult], bin_count: int = 10) -> List[ScoreHistogram]:
    """One histogram per question and per score metric"""
    edges = [round(float(e), 6) for e in np.linspace(0.0, 1.0, bin_count + 1)]
    histograms = []
    for label in question_labels_of(results):
        for metric in METRICS:
            scores = [
                getattr(a, metric)
                for r in results for a in r.assessments
                if a.question_label == label
            ]
            histograms.append(
                ScoreHistogram(question_label=label, metric=metric, edges=edges, counts=bin_scores(scores, bin_count))
            )
    return histograms


class MustReadRatio(BaseModel):
    must_read: int
    discard: int
    ratio: Optional[float]

    @property
    def percent(self) -> str:
        return percentage(self.must_read, self.must_read + self.discard)


def must_read_ratio(results: Sequence[ScreeningResult]) -> MustReadRatio:
    must_read = sum(1 for r in results if r.must_read)
    total = len(results)
    return MustReadRatio(
        must_read=must_read,
        discard=total - must_read,
        ratio=must_read / total if total else None,
    )


class AgreementRow(BaseModel):
    """Model-stated decision vs score-derived flag for one question"""

    question_label: str
    relevance_agree: int
    relevance_disagree: int
    contribution_agree: int
    contribution_disagree: int


def decision_agreement(results: Sequence[ScreeningResult]) -> List[AgreementRow]:
    """Stage-failed assessments are left out of both counts"""
    rows = []
    for label in question_labels_of(results):
        counts = {"relevance": [0, 0], "contribution": [0, 0]}
        for result in results:
            for a in result.assessments:
                if a.question_label != label or a.stage_failed:
                    continue
                counts["relevance"][a.relevance_decision != bool(a.is_relevant)] += 1
                counts["contribution"][a.contribution_decision != bool(a.is_contributing)] += 1
        rows.append(
            AgreementRow(
                question_label=label,
                relevance_agree=counts["relevance"][0],
                relevance_disagree=counts["relevance"][1],
                contribution_agree=counts["contribution"][0],
                contribution_disagree=counts["contribution"][1],
            )
        )
    return rows


class RunSummary(BaseModel):
    run_id: str
    model_name: str
    articles: int
    must_read: int
    stage_failures: int
    exchanges: int
    prompt_tokens: int
    completion_tokens: int
    tokens_estimated: bool
    total_cost: Optional[float]
    cost_per_100_articles: Optional[float]
    mean_latency_seconds: Optional[float]


def run_summary(results: Sequence[ScreeningResult], manifest: RunManifest) -> RunSummary:
    """Throughput and spend for one run; cost only when every result was priced"""
    n = len(results)
    priced = n > 0 and all(r.estimated_cost is not None for r in results)
    total_cost = round(sum(r.estimated_cost for r in results), 6) if priced else None
    return RunSummary(
        run_id=manifest.run_id,
        model_name=str(manifest.backend.get("model_name", "")),
        articles=n,
        must_read=sum(r.must_read for r in results),
        stage_failures=sum(r.stage_failed for r in results),
        exchanges=sum(r.exchanges for r in results),
        prompt_tokens=sum(r.prompt_tokens for r in results),
        completion_tokens=sum(r.completion_tokens for r in results),
        tokens_estimated=any(r.tokens_estimated for r in results),
        total_cost=total_cost,
        cost_per_100_articles=round(total_cost * 100 / n, 6) if priced else None,
        mean_latency_seconds=sum(r.total_latency for r in results) / n if n else None,
    )
