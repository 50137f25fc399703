"""
Column mapping for bibliographic CSV exports
Detects IEEE Xplore and Scopus headers; user overrides win per field
"""

from typing import Dict, List, Mapping, Optional

from loguru import logger
from pydantic import BaseModel, ConfigDict

from app.errors import ConfigurationError


SEMANTIC_FIELDS = ("title", "abstract", "authors", "venue", "year", "keywords", "external_id")
MANDATORY_FIELDS = ("title", "abstract")


class FieldMapping(BaseModel):
    """Semantic field -> CSV column name"""

    model_config = ConfigDict(frozen=True)

    title: str
    abstract: str
    authors: Optional[str] = None
    venue: Optional[str] = None
    year: Optional[str] = None
    keywords: Optional[str] = None
    external_id: Optional[str] = None
    dialect: str = "custom"

    def columns(self) -> Dict[str, str]:
        """Mapped fields only, in semantic-field order"""
        return {
            name: getattr(self, name)
            for name in SEMANTIC_FIELDS
            if getattr(self, name) is not None
        }


# Checked in order, IEEE first
DIALECTS: Dict[str, Dict[str, str]] = {
    "ieee_xplore": {
        "title": "Document Title",
        "abstract": "Abstract",
        "year": "Publication Year",
        "authors": "Authors",
        "venue": "Publication Title",
        "keywords": "Author Keywords",
        "external_id": "DOI",
    },
    "scopus": {
        "title": "Title",
        "abstract": "Abstract",
        "year": "Year",
        "authors": "Authors",
        "venue": "Source title",
        "keywords": "Author Keywords",
        "external_id": "DOI",
    },
}


def detect_mapping(
    header_row: List[str],
    override: Optional[Mapping[str, str]] = None,
) -> FieldMapping:
    """
    Build a FieldMapping for a CSV header

    Args:
        header_row: Column names as they appear in the file
        override: Semantic field -> column name, applied on top of detection

    Returns:
        FieldMapping whose column names use the header's own spelling

    Raises:
        ConfigurationError: Empty header, unknown override field, or no
            dialect matched and the override does not name title and abstract
    """
    if not header_row:
        raise ConfigurationError("CSV header row is empty")

    override = dict(override or {})
    unknown = sorted(set(override) - set(SEMANTIC_FIELDS))
    if unknown:
        raise ConfigurationError(
            f"Unknown mapping field(s): {', '.join(unknown)}. "
            f"Valid fields: {', '.join(SEMANTIC_FIELDS)}"
        )

    by_lower = {}
    for column in header_row:
        by_lower.setdefault(column.strip().lower(), column)

    detected: Dict[str, str] = {}
    dialect = "custom"
    for name, table in DIALECTS.items():
        if all(table[f].lower() in by_lower for f in MANDATORY_FIELDS):
            dialect = name
            detected = {
                field: by_lower[column.lower()]
                for field, column in table.items()
                if column.lower() in by_lower
            }
            break

    if not detected and not all(f in override for f in MANDATORY_FIELDS):
        raise ConfigurationError(
            "Could not detect the CSV dialect (expected IEEE Xplore or Scopus "
            f"columns) and no mapping override was given. Header: {header_row}"
        )

    for field, column in override.items():
        detected[field] = by_lower.get(column.strip().lower(), column)

    logger.debug(f"Column mapping ({dialect}): {detected}")
    return FieldMapping(dialect=dialect, **detected)
