"""
Run manifest and content digests
Digests use canonical JSON of the parsed inputs, so they do not depend on
file paths, column order or line endings
"""

import hashlib
import json
import secrets
from datetime import datetime
from typing import Any, Dict, List, Optional, Sequence

from pydantic import BaseModel

from app.clock import Clock, FixedClock
from app.config import BackendConfig
from app.ingest import ArticleRecord, QuestionSet


SCHEMA_VERSION = "1.0"


def _digest(payload) -> str:
    canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.blake2b(canonical.encode("utf-8"), digest_size=8).hexdigest()


def corpus_digest(corpus: Sequence[ArticleRecord]) -> str:
    return _digest([article.model_dump(mode="json") for article in corpus])


def question_digest(questions: QuestionSet) -> str:
    return _digest([[q.label, q.text] for q in questions])


class RunManifest(BaseModel):
    """Identity of one screening run"""

    schema_version: str = SCHEMA_VERSION
    run_id: str
    corpus_digest: str
    question_digest: str
    backend: Dict[str, Any]
    threshold: float
    article_count: int
    question_labels: List[str]
    started_at: datetime
    finished_at: Optional[datetime] = None


def new_run_id(clock: Clock, digest: str) -> str:
    """Timestamp plus a random suffix; a fixed clock makes the suffix deterministic too"""
    suffix = digest[:6] if isinstance(clock, FixedClock) else secrets.token_hex(3)
    return f"{clock.now():%Y%m%dT%H%M%SZ}-{suffix}"


def build_manifest(
    corpus: Sequence[ArticleRecord],
    questions: QuestionSet,
    backend: BackendConfig,
    threshold: float,
    clock: Clock,
) -> RunManifest:
    digest = corpus_digest(corpus)
    return RunManifest(
        run_id=new_run_id(clock, digest),
        corpus_digest=digest,
        question_digest=question_digest(questions),
        backend=backend.descriptor(),
        threshold=threshold,
        article_count=len(corpus),
        question_labels=questions.labels,
        started_at=clock.now(),
    )


def find_mismatch(recorded: RunManifest, current: RunManifest) -> Optional[str]:
    """Name the first input that differs between two manifests, or None"""
    if recorded.corpus_digest != current.corpus_digest:
        return "article corpus"
    if recorded.question_digest != current.question_digest:
        return "research questions"
    if recorded.backend != current.backend:
        return "backend"
    if recorded.threshold != current.threshold:
        return "screening threshold"
    return None
