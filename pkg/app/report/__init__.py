"""Aggregate reports over screening results"""

from app.report.tables import (
    DecisionTable,
    decision_agreement,
    decision_table,
    must_read_ratio,
    percentage,
    run_summary,
    score_distribution,
)

__all__ = [
    "DecisionTable",
    "decision_agreement",
    "decision_table",
    "must_read_ratio",
    "percentage",
    "run_summary",
    "score_distribution",
]
