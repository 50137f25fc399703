"""
Bibliographic CSV ingestion
Parses IEEE Xplore / Scopus style exports into ArticleRecord values
"""

import io
import re
from pathlib import Path
from typing import List, Mapping, Optional, Tuple

import pandas as pd
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.errors import ConfigurationError, InputError
from app.ingest.mapping import MANDATORY_FIELDS, FieldMapping, detect_mapping


_YEAR_PATTERN = re.compile(r"^\d{4}$")
YEAR_RANGE = (1900, 2100)


class ArticleRecord(BaseModel):
    """One bibliographic entry from an input CSV row"""

    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=0)
    title: str
    abstract: str = ""
    authors: str = ""
    venue: str = ""
    year: Optional[int] = None
    source_keywords: str = ""
    external_id: str = ""

    @field_validator("title")
    @classmethod
    def title_not_blank(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("title must not be blank")
        return v

    @field_validator("year")
    @classmethod
    def year_in_range(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and not YEAR_RANGE[0] <= v <= YEAR_RANGE[1]:
            raise ValueError(f"year {v} outside {YEAR_RANGE}")
        return v


class IngestWarning(BaseModel):
    """Non-fatal ingest finding tied to a 1-based data row (None = whole file)"""

    model_config = ConfigDict(frozen=True)

    row: Optional[int] = None
    message: str

    def __str__(self) -> str:
        return f"row {self.row}: {self.message}" if self.row is not None else self.message


def decode_utf8(data: bytes, what: str = "input") -> str:
    """Decode UTF-8, dropping a leading byte-order mark"""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise InputError(
            f"{what} is not valid UTF-8 (undecodable byte at offset {e.start})",
            byte_offset=e.start,
        ) from e
    return text[1:] if text.startswith("\ufeff") else text


def _parse_year(raw: str) -> Optional[int]:
    """4-digit year within range, else None"""
    raw = raw.strip()
    if not _YEAR_PATTERN.match(raw):
        return None
    year = int(raw)
    return year if YEAR_RANGE[0] <= year <= YEAR_RANGE[1] else None


def _read_frame(text: str) -> pd.DataFrame:
    try:
        frame = pd.read_csv(
            io.StringIO(text),
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            skip_blank_lines=True,
        )
    except pd.errors.EmptyDataError as e:
        raise InputError("CSV input has no header row") from e
    except pd.errors.ParserError as e:
        raise InputError(f"Malformed CSV: {e}") from e
    return frame.fillna("")


def parse_articles(
    csv_bytes: bytes,
    mapping: Optional[FieldMapping] = None,
    override: Optional[Mapping[str, str]] = None,
) -> Tuple[List[ArticleRecord], List[IngestWarning]]:
    """
    Parse a bibliographic CSV export

    Args:
        csv_bytes: Raw file content (UTF-8, header row required)
        mapping: Column mapping; detected from the header when None
        override: Per-field column overrides used during detection

    Returns:
        (records in input order, warnings)

    Raises:
        InputError: Undecodable bytes or malformed CSV
        ConfigurationError: A mandatory column is missing
    """
    text = decode_utf8(csv_bytes, "CSV input")
    frame = _read_frame(text)
    header = [str(c) for c in frame.columns]

    if mapping is None:
        mapping = detect_mapping(header, override)

    for field in MANDATORY_FIELDS:
        column = getattr(mapping, field)
        if column not in frame.columns:
            raise ConfigurationError(
                f"Mandatory column '{column}' ({field}) not found in CSV header {header}"
            )

    warnings: List[IngestWarning] = []
    columns = mapping.columns()
    for field, column in list(columns.items()):
        if column not in frame.columns:
            warnings.append(
                IngestWarning(message=f"Mapped column '{column}' ({field}) not in header; ignored")
            )
            del columns[field]

    def cell(row, field: str) -> str:
        column = columns.get(field)
        return str(row[column]) if column is not None else ""

    records: List[ArticleRecord] = []
    for row_number, row in enumerate(frame.to_dict("records"), start=1):
        title = cell(row, "title").strip()
        if not title:
            warnings.append(IngestWarning(row=row_number, message="empty title; row skipped"))
            continue

        abstract = cell(row, "abstract").strip()
        if not abstract:
            warnings.append(IngestWarning(row=row_number, message="empty abstract"))

        raw_year = cell(row, "year")
        year = _parse_year(raw_year)
        if year is None and raw_year.strip():
            warnings.append(
                IngestWarning(row=row_number, message=f"unparseable year '{raw_year.strip()}'")
            )

        records.append(
            ArticleRecord(
                index=len(records),
                title=title,
                abstract=abstract,
                authors=cell(row, "authors"),
                venue=cell(row, "venue"),
                year=year,
                source_keywords=cell(row, "keywords"),
                external_id=cell(row, "external_id"),
            )
        )

    logger.info(
        f"Parsed {len(records)} articles ({mapping.dialect} dialect), {len(warnings)} warnings"
    )
    return records, warnings


def load_articles(
    path: Path,
    override: Optional[Mapping[str, str]] = None,
) -> Tuple[List[ArticleRecord], List[IngestWarning]]:
    """Read and parse a CSV file from disk"""
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise InputError(f"Cannot read articles file {path}: {e}") from e
    return parse_articles(data, override=override)
