"""
Key-semantics extraction (chain-of-thought step 1)
Builds the extraction prompt from title and abstract and parses the reply
into topics, entities and keywords
"""

import json
from collections import Counter
from typing import Any, List, Optional, Tuple, Union

from loguru import logger
from pydantic import BaseModel, ConfigDict, field_validator

from app.config import BackendConfig, ScreeningConfig
from app.errors import ParseError
from app.ingest import ArticleRecord
from app.model.gateway import LLMGateway
from app.prompts import PromptTemplates, load_templates, render
from app.screening.structured import StageRecord, as_gateway, complete_with_repair, find_last_block


SEMANTIC_KEYS = ("topics", "entities", "keywords")
MAX_ENTRIES = 20
NO_ABSTRACT = "(none provided)"
EXTRACTION_FAILED = "extraction_failed"


def normalize_entries(values: List[str]) -> List[str]:
    """Trim, drop empties, dedupe case-insensitively keeping the first spelling, cap at 20"""
    kept: List[str] = []
    seen = set()
    for value in values:
        value = str(value).strip()
        if not value or value.casefold() in seen:
            continue
        seen.add(value.casefold())
        kept.append(value)
        if len(kept) == MAX_ENTRIES:
            break
    return kept


class KeySemantics(BaseModel):
    """Topics, entities and keywords extracted from title and abstract"""

    model_config = ConfigDict(frozen=True)

    topics: List[str] = []
    entities: List[str] = []
    keywords: List[str] = []

    @field_validator("topics", "entities", "keywords")
    @classmethod
    def normalize(cls, v: List[str]) -> List[str]:
        return normalize_entries(v)

    def is_empty(self) -> bool:
        return not (self.topics or self.entities or self.keywords)


def render_semantics(semantics: KeySemantics) -> str:
    """Machine-readable block for a KeySemantics value"""
    return json.dumps(semantics.model_dump(), ensure_ascii=False)


def build_extraction_prompt(
    article: ArticleRecord,
    templates: Optional[PromptTemplates] = None,
) -> Tuple[str, str]:
    """
    Build (system_prompt, user_prompt) for one article

    An empty abstract is rendered as "(none provided)".
    """
    templates = templates or load_templates()
    user_prompt = render(
        templates.extraction_user,
        {"title": article.title, "abstract": article.abstract or NO_ABSTRACT},
    )
    return templates.extraction_system, user_prompt


def _as_list(key: str, value: Any, raw: str) -> List[str]:
    if isinstance(value, list):
        return [str(v) for v in value if v is not None]
    if isinstance(value, str):
        return [part for part in value.replace(";", ",").split(",")]
    if value is None:
        return []
    raise ParseError(f"field '{key}' is not a list of strings", raw)


def parse_semantics(raw_response: str) -> KeySemantics:
    """
    Parse the last machine-readable block of an extraction reply

    Raises:
        ParseError: No block, or a block missing topics, entities or keywords
    """
    block = find_last_block(raw_response, SEMANTIC_KEYS)
    missing = [key for key in SEMANTIC_KEYS if key not in block]
    if missing:
        raise ParseError(f"block is missing {', '.join(missing)}", raw_response)
    return KeySemantics(**{key: _as_list(key, block[key], raw_response) for key in SEMANTIC_KEYS})


def _majority_merge(samples: List[KeySemantics]) -> KeySemantics:
    """Keep entries present in a strict majority of samples, in first-seen order"""
    merged = {}
    for key in SEMANTIC_KEYS:
        counts: Counter = Counter()
        first_spelling = {}
        for sample in samples:
            for entry in getattr(sample, key):
                folded = entry.casefold()
                counts[folded] += 1
                first_spelling.setdefault(folded, entry)
        merged[key] = [
            spelling for folded, spelling in first_spelling.items()
            if counts[folded] * 2 > len(samples)
        ]
    return KeySemantics(**merged)


def extract_semantics(
    article: ArticleRecord,
    backend: Union[BackendConfig, LLMGateway],
    config: Optional[ScreeningConfig] = None,
    templates: Optional[PromptTemplates] = None,
    record: Optional[StageRecord] = None,
) -> KeySemantics:
    """
    Extract key semantics for one article

    Parse failures are repaired up to config.repair_retries times; after that
    the article gets empty semantics and an "extraction_failed" flag.
    Backend unavailability propagates.
    """
    config = config or ScreeningConfig()
    record = record if record is not None else StageRecord()
    gateway = as_gateway(backend)
    system_prompt, user_prompt = build_extraction_prompt(article, templates)

    samples: List[KeySemantics] = []
    for _ in range(config.samples_per_stage):
        parsed = complete_with_repair(
            gateway,
            system_prompt,
            user_prompt,
            parse_semantics,
            config.repair_retries,
            record,
            stage="extraction",
            article_index=article.index,
        )
        if parsed is not None:
            samples.append(parsed)

    if not samples:
        logger.warning(f"Key-semantics extraction failed for article {article.index}; continuing with empty semantics")
        record.flags.append(EXTRACTION_FAILED)
        return KeySemantics()
    if len(samples) == 1:
        return samples[0]
    return _majority_merge(samples)
