"""JSON and CSV result artifacts"""

from app.output.writers import (
    csv_columns,
    emit_articles_csv,
    emit_csv,
    emit_json,
    load_results,
    parse_semantics_cell,
)

__all__ = [
    "csv_columns",
    "emit_articles_csv",
    "emit_csv",
    "emit_json",
    "load_results",
    "parse_semantics_cell",
]
