"""Two-step chain-of-thought screening: extraction, estimation, triage"""

from app.config import ScreeningConfig
from app.screening.estimation import (
    QuestionAssessment,
    assess,
    build_assessment_prompt,
    derive_flags,
    parse_assessment,
)
from app.screening.extraction import (
    KeySemantics,
    build_extraction_prompt,
    extract_semantics,
    parse_semantics,
)
from app.screening.structured import StageRecord
from app.screening.triage import ScreeningResult, determine_must_read

__all__ = [
    "ScreeningConfig",
    "QuestionAssessment",
    "assess",
    "build_assessment_prompt",
    "derive_flags",
    "parse_assessment",
    "KeySemantics",
    "build_extraction_prompt",
    "extract_semantics",
    "parse_semantics",
    "StageRecord",
    "ScreeningResult",
    "determine_must_read",
]
