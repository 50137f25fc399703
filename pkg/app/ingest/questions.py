"""
Research-question file parsing
One question per non-blank line, '#' comments, optional 'RQk:' labels
"""

import re
from pathlib import Path
from typing import List, Tuple, Union

from pydantic import BaseModel, ConfigDict, field_validator

from app.errors import InputError
from app.ingest.articles import decode_utf8


_LABEL_PATTERN = re.compile(r"^(RQ\d+)\s*:\s*(.*)$", re.IGNORECASE)


class Question(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    text: str


class QuestionSet(BaseModel):
    """Ordered research questions driving per-article assessment"""

    model_config = ConfigDict(frozen=True)

    questions: Tuple[Question, ...]

    @field_validator("questions")
    @classmethod
    def non_empty_unique(cls, v: Tuple[Question, ...]) -> Tuple[Question, ...]:
        if not v:
            raise ValueError("no research questions")
        labels = [q.label for q in v]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate question labels: {labels}")
        return v

    @property
    def labels(self) -> List[str]:
        return [q.label for q in self.questions]

    def __len__(self) -> int:
        return len(self.questions)

    def __iter__(self):
        return iter(self.questions)


def parse_questions(text: Union[bytes, str]) -> QuestionSet:
    """
    Parse a research-question file

    Plain lines are labelled RQ<n> by their position; a line starting with
    'RQk:' keeps label RQk.

    Raises:
        InputError: No questions, a labelled line without text, or duplicate labels
    """
    if isinstance(text, bytes):
        text = decode_utf8(text, "Question file")

    questions: List[Question] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        position = len(questions) + 1
        match = _LABEL_PATTERN.match(line)
        if match:
            label, body = match.group(1).upper(), match.group(2).strip()
            if not body:
                raise InputError(f"Question {label} has no text")
        else:
            label, body = f"RQ{position}", line
        questions.append(Question(label=label, text=body))

    if not questions:
        raise InputError("no research questions")
    try:
        return QuestionSet(questions=tuple(questions))
    except ValueError as e:
        raise InputError(f"Invalid question file: {e}") from e


def load_questions(path: Path) -> QuestionSet:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise InputError(f"Cannot read questions file {path}: {e}") from e
    return parse_questions(data)
