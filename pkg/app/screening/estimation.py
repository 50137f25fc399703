"""
Relevance and contribution estimation (chain-of-thought step 2)
One exchange per (article, research question); derived flags depend on the
scores and the threshold only, never on the model-stated decisions
"""

import json
import math
from typing import Any, Dict, List, Optional, Tuple, Union

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from app.config import BackendConfig, ScreeningConfig
from app.errors import ParseError
from app.ingest import ArticleRecord, Question
from app.model.gateway import LLMGateway
from app.prompts import PromptTemplates, load_templates, render
from app.screening.extraction import NO_ABSTRACT, KeySemantics
from app.screening.structured import StageRecord, as_gateway, complete_with_repair, find_last_block


ASSESSMENT_KEYS = (
    "relevance_decision",
    "relevance_score",
    "relevance_reasoning",
    "contribution_decision",
    "contribution_score",
    "contribution_reasoning",
)
EMPTY_LIST = "(none)"
FAILURE_NOTE = "Assessment failed: no usable response after repair attempts."

_TRUE_WORDS = {"true", "yes", "y", "1"}
_FALSE_WORDS = {"false", "no", "n", "0"}


class QuestionAssessment(BaseModel):
    """Per (article, question) decisions, scores and reasoning"""

    model_config = ConfigDict(frozen=True)

    question_label: str
    relevance_decision: bool = False
    relevance_score: float = Field(default=0.0, ge=0.0, le=1.0)
    contribution_decision: bool = False
    contribution_score: float = Field(default=0.0, ge=0.0, le=1.0)
    relevance_reasoning: str = ""
    contribution_reasoning: str = ""
    is_relevant: Optional[bool] = None
    is_contributing: Optional[bool] = None
    stage_failed: bool = False
    warnings: List[str] = []


def failed_assessment(question_label: str) -> QuestionAssessment:
    return QuestionAssessment(
        question_label=question_label,
        relevance_reasoning=FAILURE_NOTE,
        contribution_reasoning=FAILURE_NOTE,
        is_relevant=False,
        is_contributing=False,
        stage_failed=True,
    )


def _join(entries: List[str]) -> str:
    return "; ".join(entries) if entries else EMPTY_LIST


def build_assessment_prompt(
    article: ArticleRecord,
    semantics: KeySemantics,
    question: str,
    templates: Optional[PromptTemplates] = None,
) -> Tuple[str, str]:
    """Build (system_prompt, user_prompt) for one article and one question"""
    templates = templates or load_templates()
    user_prompt = render(
        templates.assessment_user,
        {
            "title": article.title,
            "abstract": article.abstract or NO_ABSTRACT,
            "topics": _join(semantics.topics),
            "entities": _join(semantics.entities),
            "keywords": _join(semantics.keywords),
            "question": question,
        },
    )
    return templates.assessment_system, user_prompt


def _parse_bool(key: str, value: Any, raw: str) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)) and value in (0, 1):
        return bool(value)
    word = str(value).strip().lower()
    if word in _TRUE_WORDS:
        return True
    if word in _FALSE_WORDS:
        return False
    raise ParseError(f"field '{key}' is not a boolean: {value!r}", raw)


def _parse_score(key: str, value: Any, raw: str) -> float:
    if isinstance(value, bool):
        raise ParseError(f"field '{key}' is a boolean, expected a number", raw)
    if isinstance(value, (int, float)):
        score = float(value)
    else:
        text = str(value).strip()
        try:
            score = float(text[:-1]) / 100 if text.endswith("%") else float(text)
        except ValueError:
            raise ParseError(f"field '{key}' is not a number: {value!r}", raw) from None
    if not math.isfinite(score):
        raise ParseError(f"field '{key}' is not finite: {value!r}", raw)
    return score


def parse_assessment(raw_response: str, question_label: str) -> QuestionAssessment:
    """
    Parse the last machine-readable block of an assessment reply

    Booleans may be true/false/yes/no in any case; scores may be decimals or
    percentages. Out-of-range scores are clamped and missing reasonings
    default to empty text, both with a warning. Derived flags are left unset.

    Raises:
        ParseError: No block, or either score missing or unreadable
    """
    block = find_last_block(raw_response, ASSESSMENT_KEYS)
    warnings: List[str] = []
    values: Dict[str, Any] = {}

    for kind in ("relevance", "contribution"):
        score_key = f"{kind}_score"
        if score_key not in block or block[score_key] is None:
            raise ParseError(f"block is missing {score_key}", raw_response)
        score = _parse_score(score_key, block[score_key], raw_response)
        if not 0.0 <= score <= 1.0:
            clamped = min(1.0, max(0.0, score))
            warnings.append(f"{score_key} {score:g} clamped to {clamped:g}")
            score = clamped
        values[score_key] = score

        decision_key = f"{kind}_decision"
        if decision_key in block and block[decision_key] is not None:
            values[decision_key] = _parse_bool(decision_key, block[decision_key], raw_response)
        else:
            warnings.append(f"{decision_key} missing; recorded as false")
            values[decision_key] = False

        reasoning_key = f"{kind}_reasoning"
        reasoning = block.get(reasoning_key)
        if reasoning is None or not str(reasoning).strip():
            warnings.append(f"{reasoning_key} missing")
            reasoning = ""
        values[reasoning_key] = str(reasoning).strip()

    return QuestionAssessment(question_label=question_label, warnings=warnings, **values)


def render_assessment(assessment: QuestionAssessment) -> str:
    """Machine-readable block for an assessment's model-facing fields"""
    return json.dumps({key: getattr(assessment, key) for key in ASSESSMENT_KEYS}, ensure_ascii=False)


def derive_flags(assessment: QuestionAssessment, config: ScreeningConfig) -> QuestionAssessment:
    """is_relevant / is_contributing := score strictly exceeds the threshold"""
    return assessment.model_copy(
        update={
            "is_relevant": assessment.relevance_score > config.threshold,
            "is_contributing": assessment.contribution_score > config.threshold,
        }
    )


def _combine_samples(samples: List[QuestionAssessment]) -> QuestionAssessment:
    """Mean scores, strict-majority decisions, reasoning from the first sample"""
    n = len(samples)
    first = samples[0]
    warnings: List[str] = []
    for sample in samples:
        warnings.extend(w for w in sample.warnings if w not in warnings)
    return first.model_copy(
        update={
            "relevance_score": sum(s.relevance_score for s in samples) / n,
            "contribution_score": sum(s.contribution_score for s in samples) / n,
            "relevance_decision": sum(s.relevance_decision for s in samples) * 2 > n,
            "contribution_decision": sum(s.contribution_decision for s in samples) * 2 > n,
            "warnings": warnings,
        }
    )


def assess(
    article: ArticleRecord,
    semantics: KeySemantics,
    question: Union[Question, str],
    backend: Union[BackendConfig, LLMGateway],
    config: Optional[ScreeningConfig] = None,
    templates: Optional[PromptTemplates] = None,
    record: Optional[StageRecord] = None,
) -> QuestionAssessment:
    """
    Assess one article against one research question

    After the repair budget is spent a stage_failed assessment is returned
    (scores 0, flags false). Backend unavailability propagates.
    """
    config = config or ScreeningConfig()
    record = record if record is not None else StageRecord()
    if isinstance(question, str):
        question = Question(label="RQ1", text=question)
    gateway = as_gateway(backend)
    system_prompt, user_prompt = build_assessment_prompt(article, semantics, question.text, templates)

    samples: List[QuestionAssessment] = []
    for _ in range(config.samples_per_stage):
        parsed = complete_with_repair(
            gateway,
            system_prompt,
            user_prompt,
            lambda raw: parse_assessment(raw, question.label),
            config.repair_retries,
            record,
            stage="assessment",
            article_index=article.index,
            question_label=question.label,
        )
        if parsed is not None:
            samples.append(parsed)

    if not samples:
        logger.warning(f"Assessment failed for article {article.index} {question.label}")
        record.flags.append(f"{question.label}: assessment_failed")
        return failed_assessment(question.label)

    assessment = samples[0] if len(samples) == 1 else _combine_samples(samples)
    for warning in assessment.warnings:
        record.flags.append(f"{question.label}: {warning}")
    return derive_flags(assessment, config)
