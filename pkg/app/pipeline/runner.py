"""
Screening orchestrator
For every article: extract key semantics, assess each research question,
determine must-read, then commit the result to the checkpoint
"""

import time
from concurrent.futures import FIRST_COMPLETED, Future, ThreadPoolExecutor, wait
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Sequence

from loguru import logger

from app.clock import Clock
from app.config import BackendConfig, ScreeningConfig
from app.errors import BackendUnavailableError, ContractViolation, DigestMismatchError, RunHalted
from app.ingest import ArticleRecord, QuestionSet
from app.model.base import ChatModel
from app.model.gateway import ExchangeLog, LLMGateway
from app.model.pricing import cost_of, usage_totals
from app.pipeline.checkpoint import CheckpointWriter, load_checkpoint
from app.pipeline.manifest import RunManifest, build_manifest, find_mismatch
from app.prompts import PromptTemplates, load_templates
from app.screening.estimation import assess
from app.screening.extraction import extract_semantics
from app.screening.structured import StageRecord
from app.screening.triage import ScreeningResult, determine_must_read


ResultCallback = Callable[[ScreeningResult], None]


def exchange_log_path(checkpoint_path: Path, run_id: str) -> Path:
    return Path(checkpoint_path).parent / f"exchanges-{run_id}.jsonl"


class ScreeningPipeline:
    """Runs the two-step screening over a corpus with checkpointing"""

    def __init__(
        self,
        backend: BackendConfig,
        config: Optional[ScreeningConfig] = None,
        templates: Optional[PromptTemplates] = None,
        clock: Optional[Clock] = None,
        model: Optional[ChatModel] = None,
        sleep: Callable[[float], None] = time.sleep,
        on_result: Optional[ResultCallback] = None,
    ):
        """
        Args:
            backend: Backend definition
            config: Threshold, repair budget, samples and worker count
            templates: Prompt templates (packaged defaults when None)
            clock: Time source for timestamps and latencies
            model: Pre-built backend, mainly for tests
            sleep: Backoff sleep used by the gateway
            on_result: Called on the orchestrator thread after each checkpoint append
        """
        self.backend = backend
        self.config = config or ScreeningConfig()
        self.templates = templates or load_templates()
        self.clock = clock or Clock()
        self._model = model
        self._sleep = sleep
        self.on_result = on_result
        self.gateway: Optional[LLMGateway] = None
        self.manifest: Optional[RunManifest] = None

    def _open_gateway(self, checkpoint_path: Path) -> None:
        self.gateway = LLMGateway(
            self.backend,
            model=self._model,
            exchange_log=ExchangeLog(exchange_log_path(checkpoint_path, self.manifest.run_id)),
            clock=self.clock,
            sleep=self._sleep,
        )

    def screen_article(self, article: ArticleRecord, questions: QuestionSet) -> ScreeningResult:
        """Process one article end to end; never raises on malformed model output"""
        record = StageRecord()
        start = self.clock.monotonic()

        semantics = extract_semantics(article, self.gateway, self.config, self.templates, record)
        assessments = [
            assess(article, semantics, question, self.gateway, self.config, self.templates, record)
            for question in questions
        ]

        usage = usage_totals(record.exchanges)
        pricing = self.backend.pricing
        return ScreeningResult(
            article=article,
            semantics=semantics,
            assessments=assessments,
            must_read=determine_must_read(assessments),
            total_latency=max(0.0, self.clock.monotonic() - start),
            exchanges=len(record.exchanges),
            prompt_tokens=usage.prompt_tokens,
            completion_tokens=usage.completion_tokens,
            tokens_estimated=usage.estimated,
            estimated_cost=cost_of(record.exchanges, pricing) if pricing else None,
            flags=record.flags,
        )

    def _process(
        self,
        pending: Sequence[ArticleRecord],
        questions: QuestionSet,
        writer: CheckpointWriter,
        results: Dict[int, ScreeningResult],
    ) -> None:
        """Screen pending articles, committing each result in completion order"""
        halt: Optional[BackendUnavailableError] = None
        fatal: Optional[Exception] = None
        queue: Iterator[ArticleRecord] = iter(pending)
        total = len(results) + len(pending)

        with ThreadPoolExecutor(max_workers=self.config.workers, thread_name_prefix="screen") as pool:
            in_flight: Dict[Future, ArticleRecord] = {}

            def submit_next() -> None:
                article = next(queue, None)
                if article is not None:
                    in_flight[pool.submit(self.screen_article, article, questions)] = article

            for _ in range(self.config.workers):
                submit_next()

            while in_flight:
                done, _ = wait(in_flight, return_when=FIRST_COMPLETED)
                for future in done:
                    article = in_flight.pop(future)
                    try:
                        result = future.result()
                    except BackendUnavailableError as e:
                        logger.error(f"Article {article.index}: {e}")
                        halt = halt or e
                        continue
                    except Exception as e:
                        logger.error(f"Article {article.index}: {type(e).__name__}: {e}")
                        fatal = fatal or e
                        continue
                    writer.append(result)
                    results[article.index] = result
                    logger.info(
                        f"[{len(results)}/{total}] article {article.index} "
                        f"{'MUST-READ' if result.must_read else 'discard'}"
                    )
                    if self.on_result is not None:
                        self.on_result(result)
                    if halt is None and fatal is None:
                        submit_next()

        # raised only after every in-flight result is committed
        if fatal is not None:
            raise fatal
        if halt is not None:
            raise RunHalted(
                f"Backend unavailable; {len(results)}/{total} articles checkpointed. "
                f"Re-run with --resume once the backend is reachable. ({halt})",
                completed=len(results),
            )

    def _finish(self, results: Dict[int, ScreeningResult], corpus_size: int) -> List[ScreeningResult]:
        ordered = [results[index] for index in sorted(results)]
        if len(ordered) != corpus_size:
            raise ContractViolation(f"{len(ordered)} results for {corpus_size} articles")
        self.manifest = self.manifest.model_copy(update={"finished_at": self.clock.now()})
        logger.info(
            f"Run {self.manifest.run_id} finished: "
            f"{sum(r.must_read for r in ordered)}/{len(ordered)} must-read"
        )
        return ordered

    def run(
        self,
        corpus: Sequence[ArticleRecord],
        questions: QuestionSet,
        checkpoint_path: Path,
    ) -> List[ScreeningResult]:
        """
        Screen a corpus from scratch, replacing any existing checkpoint

        Raises:
            RunHalted: Backend unavailable; the checkpoint holds completed articles
            CheckpointError: Checkpoint cannot be written
        """
        if not len(questions):
            raise ContractViolation("at least one research question is required")
        self.manifest = build_manifest(corpus, questions, self.backend, self.config.threshold, self.clock)
        logger.info(
            f"Starting run {self.manifest.run_id}: {len(corpus)} articles x {len(questions)} questions "
            f"on {self.backend.kind}/{self.backend.model_name}, threshold {self.config.threshold}"
        )
        writer = CheckpointWriter.create(checkpoint_path, self.manifest)
        self._open_gateway(checkpoint_path)

        results: Dict[int, ScreeningResult] = {}
        self._process(list(corpus), questions, writer, results)
        return self._finish(results, len(corpus))

    def resume(
        self,
        corpus: Sequence[ArticleRecord],
        questions: QuestionSet,
        checkpoint_path: Path,
    ) -> List[ScreeningResult]:
        """
        Continue a checkpointed run, processing only articles not yet committed

        Raises:
            DigestMismatchError: Corpus, questions, backend or threshold changed
            CheckpointError: Checkpoint missing or unreadable
        """
        recorded, done = load_checkpoint(checkpoint_path)
        current = build_manifest(corpus, questions, self.backend, self.config.threshold, self.clock)
        changed = find_mismatch(recorded, current)
        if changed:
            raise DigestMismatchError(changed)

        self.manifest = recorded.model_copy(update={"finished_at": None})
        pending = [article for article in corpus if article.index not in done]
        logger.info(
            f"Resuming run {recorded.run_id}: {len(done)} articles from checkpoint, {len(pending)} to process"
        )
        # rewrite without torn or duplicate lines before appending again
        writer = CheckpointWriter.create(
            checkpoint_path, self.manifest, [done[i] for i in sorted(done)]
        )
        self._open_gateway(checkpoint_path)

        results = dict(done)
        self._process(pending, questions, writer, results)
        return self._finish(results, len(corpus))


def run(
    corpus: Sequence[ArticleRecord],
    questions: QuestionSet,
    backend: BackendConfig,
    config: ScreeningConfig,
    checkpoint_path: Path,
    **options,
) -> List[ScreeningResult]:
    return ScreeningPipeline(backend, config, **options).run(corpus, questions, checkpoint_path)


def resume(
    corpus: Sequence[ArticleRecord],
    questions: QuestionSet,
    backend: BackendConfig,
    config: ScreeningConfig,
    checkpoint_path: Path,
    **options,
) -> List[ScreeningResult]:
    return ScreeningPipeline(backend, config, **options).resume(corpus, questions, checkpoint_path)
