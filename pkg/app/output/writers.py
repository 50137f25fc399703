"""
Result artifacts
- results JSON: {"manifest": ..., "articles": [...]} with keys in model field order
- results CSV: one row per article, per-question column groups
- articles CSV: the article columns alone, under Scopus headers, re-parseable by ingest
"""

import json
import re
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple

import pandas as pd
from loguru import logger

from app.errors import CheckpointError, InputError
from app.ingest import ArticleRecord, QuestionSet
from app.ingest.mapping import DIALECTS
from app.pipeline.manifest import RunManifest
from app.screening.triage import ScreeningResult


SCORE_DECIMALS = 4
LIST_SEPARATOR = "; "
SECTION_SEPARATOR = "|"
SEMANTICS_COLUMN = "topics|entities|keywords"
_CELL_SPECIALS = re.compile(r"([\\|;])")
_ESCAPED = re.compile(r"\\(.)")
FIXED_LEADING = ["index", "title", "year", "venue", SEMANTICS_COLUMN]
FIXED_TRAILING = ["must_read", "flags"]
QUESTION_SUFFIXES = [
    "relevance_decision",
    "relevance_score",
    "is_relevant",
    "relevance_reasoning",
    "contribution_decision",
    "contribution_score",
    "is_contributing",
    "contribution_reasoning",
]


class OutputError(CheckpointError):
    """Result file could not be written"""


def _bool(value: bool) -> str:
    return "true" if value else "false"


def _score(value: float) -> str:
    return f"{value:.{SCORE_DECIMALS}f}"


def result_document(result: ScreeningResult) -> Dict[str, Any]:
    """JSON form of one result with scores rounded to 4 decimal places"""
    doc = result.model_dump(mode="json")
    for assessment in doc["assessments"]:
        for key in ("relevance_score", "contribution_score"):
            assessment[key] = round(assessment[key], SCORE_DECIMALS)
    return doc


def _write_text(path: Path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(text.encode("utf-8"))
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e}") from e


def emit_json(results: Sequence[ScreeningResult], manifest: RunManifest, path: Path) -> None:
    document = {
        "manifest": manifest.model_dump(mode="json"),
        "articles": [result_document(r) for r in results],
    }
    _write_text(path, json.dumps(document, ensure_ascii=False, indent=2) + "\n")
    logger.info(f"Wrote {len(results)} results to {path}")


def csv_columns(question_labels: Sequence[str]) -> List[str]:
    """Column contract: a pure function of the question labels"""
    per_question = [f"{label}_{suffix}" for label in question_labels for suffix in QUESTION_SUFFIXES]
    return FIXED_LEADING + per_question + FIXED_TRAILING


def _escape_entry(entry: str) -> str:
    return _CELL_SPECIALS.sub(r"\\\1", entry)


def _split_unescaped(text: str, separator: str) -> List[str]:
    """Split on separators not preceded by a backslash escape; escapes are kept"""
    parts: List[str] = []
    current: List[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            current.append(text[i:i + 2])
            i += 2
            continue
        if ch == separator:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
        i += 1
    parts.append("".join(current))
    return parts


def format_semantics_cell(topics: List[str], entities: List[str], keywords: List[str]) -> str:
    """`|` separates the three lists, `; ` separates entries; `\\`, `|` and `;` inside entries are backslash-escaped"""
    return SECTION_SEPARATOR.join(
        LIST_SEPARATOR.join(_escape_entry(entry) for entry in part) for part in (topics, entities, keywords)
    )


def parse_semantics_cell(cell: str) -> Tuple[List[str], List[str], List[str]]:
    sections = (_split_unescaped(cell, SECTION_SEPARATOR) + ["", "", ""])[:3]
    topics, entities, keywords = (
        [
            _ESCAPED.sub(r"\1", entry.strip())
            for entry in _split_unescaped(section, LIST_SEPARATOR.strip())
            if entry.strip()
        ]
        for section in sections
    )
    return topics, entities, keywords


def _csv_row(result: ScreeningResult) -> Dict[str, str]:
    article = result.article
    row = {
        "index": str(article.index),
        "title": article.title,
        "year": "" if article.year is None else str(article.year),
        "venue": article.venue,
        SEMANTICS_COLUMN: format_semantics_cell(
            result.semantics.topics, result.semantics.entities, result.semantics.keywords
        ),
    }
    for a in result.assessments:
        label = a.question_label
        row[f"{label}_relevance_decision"] = _bool(a.relevance_decision)
        row[f"{label}_relevance_score"] = _score(a.relevance_score)
        row[f"{label}_is_relevant"] = _bool(bool(a.is_relevant))
        row[f"{label}_relevance_reasoning"] = a.relevance_reasoning
        row[f"{label}_contribution_decision"] = _bool(a.contribution_decision)
        row[f"{label}_contribution_score"] = _score(a.contribution_score)
        row[f"{label}_is_contributing"] = _bool(bool(a.is_contributing))
        row[f"{label}_contribution_reasoning"] = a.contribution_reasoning
    row["must_read"] = _bool(result.must_read)
    row["flags"] = LIST_SEPARATOR.join(result.flags)
    return row


def _write_frame(frame: pd.DataFrame, path: Path) -> None:
    _write_text(path, frame.to_csv(index=False, lineterminator="\r\n"))


def emit_csv(results: Sequence[ScreeningResult], questions: QuestionSet, path: Path) -> None:
    columns = csv_columns(questions.labels)
    frame = pd.DataFrame([_csv_row(r) for r in results], columns=columns, dtype=str)
    _write_frame(frame, path)
    logger.info(f"Wrote {len(results)} rows x {len(columns)} columns to {path}")


def emit_articles_csv(articles: Sequence[ArticleRecord], path: Path) -> None:
    """Article fields only, under Scopus column names"""
    headers = DIALECTS["scopus"]
    rows = [
        {
            headers["title"]: a.title,
            headers["abstract"]: a.abstract,
            headers["year"]: "" if a.year is None else str(a.year),
            headers["authors"]: a.authors,
            headers["venue"]: a.venue,
            headers["keywords"]: a.source_keywords,
            headers["external_id"]: a.external_id,
        }
        for a in articles
    ]
    frame = pd.DataFrame(rows, columns=list(headers.values()), dtype=str)
    _write_frame(frame, path)


def load_results(path: Path) -> Tuple[RunManifest, List[ScreeningResult]]:
    """Read a results JSON written by emit_json"""
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
        manifest = RunManifest.model_validate(document["manifest"])
        results = [ScreeningResult.model_validate(a) for a in document["articles"]]
    except OSError as e:
        raise InputError(f"Cannot read results file {path}: {e}") from e
    except (ValueError, KeyError, TypeError) as e:
        raise InputError(f"{path} is not a results document: {e}") from e
    return manifest, results
