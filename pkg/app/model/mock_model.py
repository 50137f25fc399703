"""
Deterministic offline backend
Replies are a pure function of (prompts, seed) so runs can be reproduced
and golden-tested without network access
"""

import json
import re
from typing import List

from app.config import BackendConfig
from app.model.base import ModelReply
from app.prompts import ASSESSMENT_SENTINEL, EXTRACTION_SENTINEL


FNV_OFFSET_BASIS = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK_64 = 0xFFFFFFFFFFFFFFFF

_WORD = re.compile(r"[A-Za-z][A-Za-z0-9\-]*")
_STOPWORDS = frozenset(
    "a an and are as at by for from in into is of on or the to towards using via with".split()
)

RELEVANCE_REASONING = "Mock assessment: relevance derived from a stable hash of the prompt."
CONTRIBUTION_REASONING = "Mock assessment: contribution derived from a stable hash of the prompt."


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET_BASIS
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK_64
    return h


def mock_score(user_prompt: str, seed: int) -> float:
    """(h mod 1000) / 999 where h = FNV-1a-64 of the user prompt followed by the decimal seed"""
    h = fnv1a_64(user_prompt.encode("utf-8") + str(seed).encode("ascii"))
    return (h % 1000) / 999


def _title_from(user_prompt: str) -> str:
    for line in user_prompt.splitlines():
        if line.startswith("TITLE:"):
            return line[len("TITLE:"):].strip()
    return ""


def _unique(items: List[str]) -> List[str]:
    seen = set()
    kept = []
    for item in items:
        if item.lower() not in seen:
            seen.add(item.lower())
            kept.append(item)
    return kept


def _semantics_reply(user_prompt: str) -> str:
    words = _WORD.findall(_title_from(user_prompt))
    content = [w for w in words if w.lower() not in _STOPWORDS]
    topics = [" ".join(content[:4])] if content else ["unspecified topic"]
    entities = _unique([w for w in content if w[0].isupper() and len(w) > 1])[:5]
    keywords = _unique([w.lower() for w in content if len(w) >= 5])[:8]
    payload = {"topics": topics, "entities": entities, "keywords": keywords}
    return (
        "Step 1: the title names the main topic.\n"
        "Step 2: capitalised terms are treated as entities.\n"
        "Step 3: longer content words are treated as keywords.\n\n"
        f"```json\n{json.dumps(payload, ensure_ascii=False)}\n```"
    )


def _assessment_reply(user_prompt: str, seed: int) -> str:
    relevance = mock_score(user_prompt, seed)
    contribution = mock_score(user_prompt, seed + 1)
    payload = {
        "relevance_decision": relevance > 0.5,
        "relevance_score": relevance,
        "relevance_reasoning": RELEVANCE_REASONING,
        "contribution_decision": contribution > 0.5,
        "contribution_score": contribution,
        "contribution_reasoning": CONTRIBUTION_REASONING,
    }
    return (
        "Comparing the article with the research question step by step.\n\n"
        f"```json\n{json.dumps(payload)}\n```"
    )


def mock_complete(system_prompt: str, user_prompt: str, seed: int) -> str:
    """
    Deterministic reply for whichever stage the prompt belongs to

    The stage is recognised by the sentinel embedded in the prompt templates.
    Prompts with neither sentinel get a reply with no machine-readable block.
    """
    combined = f"{system_prompt}\n{user_prompt}"
    if ASSESSMENT_SENTINEL in combined:
        return _assessment_reply(user_prompt, seed)
    if EXTRACTION_SENTINEL in combined:
        return _semantics_reply(user_prompt)
    return "Mock backend: prompt does not belong to a known screening stage."


class MockModel:
    """Offline backend; reports no usage so tokens are estimated"""

    def __init__(self, config: BackendConfig):
        self.config = config
        self.seed = config.seed

    def chat(self, system_prompt: str, user_prompt: str) -> ModelReply:
        return ModelReply(text=mock_complete(system_prompt, user_prompt, self.seed))
