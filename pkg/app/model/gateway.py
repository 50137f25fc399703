"""
LLM gateway
One chat-completion entry point over every backend kind, with bounded
in-flight requests, retry with exponential backoff, usage accounting and a
JSON Lines exchange log
"""

import json
import random
import threading
import time
from contextlib import nullcontext
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, List, Optional

from loguru import logger

from app.clock import Clock
from app.config import BackendConfig
from app.errors import BackendUnavailableError, CheckpointError, ContractViolation
from app.model.base import ChatModel, TransientBackendError, estimate_tokens
from app.model.model_factory import get_model


BACKOFF_BASE_SECONDS = 1.0
BACKOFF_JITTER = 0.2


@dataclass(frozen=True)
class ChatExchange:
    """One completed request/response pair"""

    system_prompt: str
    user_prompt: str
    raw_response: str
    prompt_tokens: int
    completion_tokens: int
    latency: float
    tokens_estimated: bool = False
    attempts: int = 1


class ExchangeLog:
    """Append-only JSON Lines log of every exchange; safe across worker threads"""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise CheckpointError(f"Cannot create exchange log directory {self.path.parent}: {e}") from e

    def append(
        self,
        exchange: ChatExchange,
        stage: str,
        article_index: Optional[int] = None,
        question_label: Optional[str] = None,
    ) -> None:
        entry = {
            "stage": stage,
            "article_index": article_index,
            "question_label": question_label,
            **asdict(exchange),
        }
        line = json.dumps(entry, ensure_ascii=False) + "\n"
        with self._lock:
            try:
                with open(self.path, "a", encoding="utf-8") as f:
                    f.write(line)
            except OSError as e:
                raise CheckpointError(f"Cannot write exchange log {self.path}: {e}") from e


def backoff_delay(attempt: int, rng: random.Random) -> float:
    """Delay before retry number `attempt` (1-based): 1s doubling, +/-20% jitter"""
    base = BACKOFF_BASE_SECONDS * (2 ** (attempt - 1))
    return base * rng.uniform(1 - BACKOFF_JITTER, 1 + BACKOFF_JITTER)


class LLMGateway:
    """Uniform chat-completion interface for one configured backend"""

    def __init__(
        self,
        config: BackendConfig,
        model: Optional[ChatModel] = None,
        exchange_log: Optional[ExchangeLog] = None,
        clock: Optional[Clock] = None,
        sleep: Callable[[float], None] = time.sleep,
        rng: Optional[random.Random] = None,
    ):
        """
        Args:
            config: Backend definition
            model: Pre-built backend (tests); built from config when None
            exchange_log: Where to record exchanges, if anywhere
            clock: Timer for latency measurement
            sleep: Backoff sleep function
            rng: Jitter source
        """
        self.config = config
        self.model = model if model is not None else get_model(config)
        self.exchange_log = exchange_log
        self.clock = clock or Clock()
        self._sleep = sleep
        self._rng = rng or random.Random()
        self._slots = (
            nullcontext() if config.kind == "mock"
            else threading.BoundedSemaphore(config.max_in_flight)
        )
        self.backoff_sleeps: List[float] = []

    def complete(
        self,
        system_prompt: str,
        user_prompt: str,
        *,
        stage: str = "adhoc",
        article_index: Optional[int] = None,
        question_label: Optional[str] = None,
    ) -> ChatExchange:
        """
        Send one chat completion, retrying transient failures

        Raises:
            ContractViolation: Empty prompt
            BackendUnavailableError: Retries exhausted
            ConfigurationError: Non-retryable rejection (HTTP 4xx other than 429)
        """
        if not system_prompt.strip() or not user_prompt.strip():
            raise ContractViolation("complete() needs non-empty system and user prompts")

        start = self.clock.monotonic()
        max_attempts = self.config.max_retries + 1
        last_error: Optional[TransientBackendError] = None

        for attempt in range(1, max_attempts + 1):
            try:
                with self._slots:
                    reply = self.model.chat(system_prompt, user_prompt)
            except TransientBackendError as e:
                last_error = e
                if attempt == max_attempts:
                    break
                delay = backoff_delay(attempt, self._rng)
                logger.warning(
                    f"{self.config.model_name}: attempt {attempt}/{max_attempts} failed ({e}); "
                    f"retrying in {delay:.2f}s"
                )
                self.backoff_sleeps.append(delay)
                self._sleep(delay)
                continue

            estimated = reply.prompt_tokens is None or reply.completion_tokens is None
            exchange = ChatExchange(
                system_prompt=system_prompt,
                user_prompt=user_prompt,
                raw_response=reply.text,
                prompt_tokens=(
                    reply.prompt_tokens if reply.prompt_tokens is not None
                    else estimate_tokens(system_prompt) + estimate_tokens(user_prompt)
                ),
                completion_tokens=(
                    reply.completion_tokens if reply.completion_tokens is not None
                    else estimate_tokens(reply.text)
                ),
                latency=max(0.0, self.clock.monotonic() - start),
                tokens_estimated=estimated,
                attempts=attempt,
            )
            if self.exchange_log is not None:
                self.exchange_log.append(exchange, stage, article_index, question_label)
            return exchange

        status = last_error.status if last_error else None
        logger.error(f"{self.config.model_name}: giving up after {max_attempts} attempts ({last_error})")
        raise BackendUnavailableError(
            f"Backend {self.config.model_name} unavailable after {max_attempts} attempts: {last_error}",
            last_status=status,
        )


def complete(system_prompt: str, user_prompt: str, config: BackendConfig) -> ChatExchange:
    """One-off completion without an exchange log"""
    return LLMGateway(config).complete(system_prompt, user_prompt)
