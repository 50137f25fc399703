"""Shared fixtures: synthetic corpora, a fixed clock and scripted backends"""

import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import pytest

from app.clock import FixedClock
from app.config import BackendConfig
from app.ingest import ArticleRecord, Question, QuestionSet
from app.model.base import ModelReply, TransientBackendError
from app.model.mock_model import MockModel


FIXED_INSTANT = datetime(2024, 1, 1, tzinfo=timezone.utc)

RESEARCH_QUESTIONS = [
    ("RQ1", "How are large language models applied to cybersecurity tasks?"),
    ("RQ2", "Which threats do large language models introduce?"),
    ("RQ3", "How are language models evaluated for security use?"),
    ("RQ4", "What ethical considerations and privacy issues arise?"),
]

TOPICS = [
    "Large Language Models for Malware Detection",
    "Prompt Injection Attacks on Chat Assistants",
    "Phishing Email Generation with GPT-4",
    "Benchmarking Code Models for Vulnerability Repair",
    "Privacy Leakage in Fine-Tuned Transformers",
    "Federated Learning for Intrusion Detection",
]


class ScriptedModel:
    """
    Replays scripted replies in order; the last one repeats once the script
    runs out. Exceptions in the script are raised instead of returned.
    """

    def __init__(self, replies: Sequence[Union[str, ModelReply, Exception]]):
        self.replies = list(replies)
        self.calls: List[tuple] = []
        self._lock = threading.Lock()

    def chat(self, system_prompt: str, user_prompt: str) -> ModelReply:
        with self._lock:
            self.calls.append((system_prompt, user_prompt))
            reply = self.replies.pop(0) if len(self.replies) > 1 else self.replies[0]
        if isinstance(reply, Exception):
            raise reply
        return reply if isinstance(reply, ModelReply) else ModelReply(text=reply)


class OutageModel(MockModel):
    """Mock backend that fails with HTTP 503 for articles whose title is listed"""

    def __init__(self, config: BackendConfig, failing_titles: Iterable[str]):
        super().__init__(config)
        self.failing_titles = set(failing_titles)

    def chat(self, system_prompt: str, user_prompt: str) -> ModelReply:
        for title in self.failing_titles:
            if f"TITLE: {title}\n" in user_prompt:
                raise TransientBackendError("HTTP 503: service unavailable", 503)
        return super().chat(system_prompt, user_prompt)


def make_article(index: int, **fields) -> ArticleRecord:
    values = {
        "index": index,
        "title": f"{TOPICS[index % len(TOPICS)]} (study {index})",
        "abstract": f"We study {TOPICS[index % len(TOPICS)].lower()} on dataset {index}.",
        "authors": f"Author {index}",
        "venue": "Computers & Security",
        "year": 2019 + index % 5,
        "source_keywords": "LLM; security",
        "external_id": f"10.1000/test.{index}",
    }
    values.update(fields)
    return ArticleRecord(**values)


def make_corpus(n: int) -> List[ArticleRecord]:
    return [make_article(i) for i in range(n)]


def make_questions(n: int = 4) -> QuestionSet:
    return QuestionSet(questions=tuple(Question(label=l, text=t) for l, t in RESEARCH_QUESTIONS[:n]))


@pytest.fixture
def fixed_clock() -> FixedClock:
    return FixedClock(FIXED_INSTANT)


@pytest.fixture
def mock_backend() -> BackendConfig:
    return BackendConfig(kind="mock", model_name="mock-fnv1a")


@pytest.fixture
def questions() -> QuestionSet:
    return make_questions(4)


@pytest.fixture
def article() -> ArticleRecord:
    return make_article(0)


@pytest.fixture
def sleeps() -> List[float]:
    """Pass sleeps.append as the gateway sleep to record backoff without waiting"""
    return []


@pytest.fixture
def scopus_csv(tmp_path: Path) -> Path:
    path = tmp_path / "scopus.csv"
    path.write_text(
        "Title,Abstract,Year,Authors,Source title,Author Keywords,DOI\n"
        '"Large Language Models for Malware Detection","We detect malware, with LLMs.",2023,"Doe J.","Computers & Security","LLM; malware",10.1/a\n'
        '"Prompt Injection Attacks","",2024,"Roe R.","USENIX Security","prompt injection",10.1/b\n'
        '"","orphan abstract",2022,,,,\n'
        '"Privacy in Transformers","Leakage study.",circa 2021,,,,\n',
        encoding="utf-8",
    )
    return path


@pytest.fixture
def questions_file(tmp_path: Path) -> Path:
    path = tmp_path / "rq.txt"
    path.write_text(
        "# research questions\n"
        + "".join(f"{label}: {text}\n" for label, text in RESEARCH_QUESTIONS),
        encoding="utf-8",
    )
    return path
