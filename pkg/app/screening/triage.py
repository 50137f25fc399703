"""
Must-read determination
An article is a must-read when any question's relevance or contribution
score exceeds the threshold
"""

from typing import List, Optional, Sequence

from pydantic import BaseModel, ConfigDict, model_validator

from app.errors import ContractViolation
from app.ingest import ArticleRecord
from app.screening.estimation import QuestionAssessment
from app.screening.extraction import EXTRACTION_FAILED, KeySemantics


def determine_must_read(assessments: Sequence[QuestionAssessment]) -> bool:
    """OR over all assessments of (is_relevant OR is_contributing)"""
    if not assessments:
        raise ContractViolation("must-read determination needs at least one assessment")
    for assessment in assessments:
        if assessment.is_relevant is None or assessment.is_contributing is None:
            raise ContractViolation(
                f"derived flags not set on assessment {assessment.question_label}"
            )
    return any(a.is_relevant or a.is_contributing for a in assessments)


class ScreeningResult(BaseModel):
    """Everything known about one screened article"""

    model_config = ConfigDict(frozen=True)

    article: ArticleRecord
    semantics: KeySemantics
    assessments: List[QuestionAssessment]
    must_read: bool
    total_latency: float = 0.0
    exchanges: int = 0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    tokens_estimated: bool = False
    estimated_cost: Optional[float] = None
    flags: List[str] = []

    @model_validator(mode="after")
    def must_read_matches_assessments(self) -> "ScreeningResult":
        if self.must_read != determine_must_read(self.assessments):
            raise ValueError("must_read disagrees with the assessments")
        return self

    @property
    def stage_failed(self) -> bool:
        return any(a.stage_failed for a in self.assessments) or EXTRACTION_FAILED in self.flags
