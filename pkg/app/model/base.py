"""
Shared types for chat backends
"""

import math
from dataclasses import dataclass
from typing import Optional, Protocol


@dataclass(frozen=True)
class ModelReply:
    """Raw text plus whatever usage the backend reported"""

    text: str
    prompt_tokens: Optional[int] = None
    completion_tokens: Optional[int] = None


class TransientBackendError(Exception):
    """Retryable failure: network error, timeout, HTTP 429 or 5xx"""

    def __init__(self, message: str, status: Optional[int] = None):
        super().__init__(message)
        self.status = status


class ChatModel(Protocol):
    def chat(self, system_prompt: str, user_prompt: str) -> ModelReply:
        ...


def estimate_tokens(text: str) -> int:
    """Rough token count used when a backend omits usage: ceil(chars / 4)"""
    return math.ceil(len(text) / 4)


def is_retryable_status(status: int) -> bool:
    return status == 429 or status >= 500
