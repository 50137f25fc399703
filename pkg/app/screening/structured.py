"""
Machine-readable block extraction and the repair-retry loop
Locates the last JSON object in a model reply, tolerating prose, code fences
and the usual LLM deviations (bare TRUE/FALSE, yes/no, trailing commas,
unquoted keys and percentages, Python-style quoting)
"""

import ast
import json
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple, TypeVar, Union

from loguru import logger

from app.config import BackendConfig
from app.errors import ParseError
from app.model.gateway import ChatExchange, LLMGateway


T = TypeVar("T")

_TRAILING_COMMA = re.compile(r",\s*([}\]])")
_SMART_QUOTES = str.maketrans({"“": '"', "”": '"'})
_LITERALS = {
    "json": {"true": "true", "yes": "true", "false": "false", "no": "false", "none": "null", "null": "null"},
    "python": {"true": "True", "yes": "True", "false": "False", "no": "False", "none": "None", "null": "None"},
}

REPAIR_INSTRUCTION = (
    "\n\nYOUR PREVIOUS REPLY COULD NOT BE USED: {error}\n"
    "Reply again with ONLY the JSON object described in the instructions. "
    "No reasoning, no code fences, no text before or after it."
)


def _candidate_spans(text: str) -> List[Tuple[int, int]]:
    """Top-level balanced {...} spans, string-aware inside braces"""
    spans = []
    depth = 0
    start = -1
    in_string = False
    quote = ""
    escaped = False
    for i, ch in enumerate(text):
        if depth and in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == quote:
                in_string = False
            continue
        if depth and ch in "\"'":
            # apostrophes inside words are not quotes
            if ch == "'" and i > 0 and text[i - 1].isalnum():
                continue
            in_string, quote = True, ch
        elif ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}" and depth:
            depth -= 1
            if depth == 0:
                spans.append((start, i + 1))
    return spans


def _normalize_tokens(text: str, style: str) -> str:
    """Rewrite bare literals, unquoted keys and bare percentages outside strings"""
    literals = _LITERALS[style]
    out = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in "\"'":
            j = i + 1
            while j < n and text[j] != ch:
                j += 2 if text[j] == "\\" else 1
            out.append(text[i:j + 1])
            i = j + 1
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            k = j
            while k < n and text[k] in " \t":
                k += 1
            if k < n and text[k] == ":":
                out.append(json.dumps(word))
            else:
                out.append(literals.get(word.lower(), word))
            i = j
        elif ch.isdigit() or (ch in "-." and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and (text[j].isdigit() or text[j] in ".eE+-"):
                j += 1
            number = text[i:j]
            if j < n and text[j] == "%":
                out.append(json.dumps(number + "%"))
                j += 1
            else:
                out.append(number)
            i = j
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _load_object(candidate: str) -> Optional[Dict[str, Any]]:
    """JSON first (control characters allowed in strings), then progressively more lenient readings"""
    attempts = []
    cleaned = _TRAILING_COMMA.sub(r"\1", candidate.translate(_SMART_QUOTES))
    attempts.append(lambda: json.loads(candidate, strict=False))
    attempts.append(lambda: json.loads(_normalize_tokens(cleaned, "json"), strict=False))
    attempts.append(lambda: ast.literal_eval(_normalize_tokens(cleaned, "python")))
    for attempt in attempts:
        try:
            value = attempt()
        except (ValueError, SyntaxError, TypeError, MemoryError, RecursionError):
            continue
        if isinstance(value, dict):
            return value
    return None


def find_last_block(raw_response: str, expected_keys: Iterable[str]) -> Dict[str, Any]:
    """
    Return the last JSON object in the reply that carries any expected key

    Keys are lower-cased and trimmed.

    Raises:
        ParseError: No such object
    """
    expected = set(expected_keys)
    for start, end in reversed(_candidate_spans(raw_response)):
        obj = _load_object(raw_response[start:end])
        if obj is None:
            continue
        obj = {str(k).strip().lower(): v for k, v in obj.items()}
        if expected & set(obj):
            return obj
    raise ParseError("no machine-readable block found in response", raw_response)


@dataclass
class StageRecord:
    """Exchanges and stage warnings accumulated while screening one article"""

    exchanges: List[ChatExchange] = field(default_factory=list)
    flags: List[str] = field(default_factory=list)


def complete_with_repair(
    gateway: LLMGateway,
    system_prompt: str,
    user_prompt: str,
    parse: Callable[[str], T],
    repair_retries: int,
    record: StageRecord,
    stage: str,
    article_index: Optional[int] = None,
    question_label: Optional[str] = None,
) -> Optional[T]:
    """
    Ask, parse, and on parse failure re-ask with the failure appended

    Returns None once the repair budget is spent. Backend errors propagate.
    """
    prompt = user_prompt
    for attempt in range(repair_retries + 1):
        exchange = gateway.complete(
            system_prompt,
            prompt,
            stage=stage if attempt == 0 else f"{stage}_repair",
            article_index=article_index,
            question_label=question_label,
        )
        record.exchanges.append(exchange)
        try:
            return parse(exchange.raw_response)
        except ParseError as e:
            where = f"article {article_index}" + (f" {question_label}" if question_label else "")
            logger.warning(f"{stage} parse failed for {where} (attempt {attempt + 1}): {e}")
            prompt = user_prompt + REPAIR_INSTRUCTION.format(error=e)
    return None


def as_gateway(backend: Union[BackendConfig, LLMGateway]) -> LLMGateway:
    """Accept either a configured gateway or a bare backend definition"""
    return backend if isinstance(backend, LLMGateway) else LLMGateway(backend)
