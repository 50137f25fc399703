"""
Append-only JSON Lines checkpoint
Line 1 is the run manifest; every following line is {"index", "result"} for
one completed article. Lines parse independently, so a torn final line only
loses that article.
"""

import json
import os
import threading
from pathlib import Path
from typing import Dict, Iterable, Tuple

from loguru import logger
from pydantic import ValidationError

from app.errors import CheckpointError
from app.pipeline.manifest import RunManifest
from app.screening.triage import ScreeningResult


def _entry_line(result: ScreeningResult) -> str:
    entry = {"index": result.article.index, "result": result.model_dump(mode="json")}
    return json.dumps(entry, ensure_ascii=False) + "\n"


def _manifest_line(manifest: RunManifest) -> str:
    return json.dumps(manifest.model_dump(mode="json"), ensure_ascii=False) + "\n"


class CheckpointWriter:
    """Single writer owned by the orchestrator"""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    @classmethod
    def create(
        cls,
        path: Path,
        manifest: RunManifest,
        entries: Iterable[ScreeningResult] = (),
    ) -> "CheckpointWriter":
        """Write manifest and any carried-over entries, replacing the file atomically"""
        writer = cls(path)
        tmp = writer.path.with_suffix(writer.path.suffix + ".tmp")
        try:
            writer.path.parent.mkdir(parents=True, exist_ok=True)
            with open(tmp, "w", encoding="utf-8") as f:
                f.write(_manifest_line(manifest))
                for result in entries:
                    f.write(_entry_line(result))
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp, writer.path)
        except OSError as e:
            raise CheckpointError(f"Cannot write checkpoint {writer.path}: {e}") from e
        return writer

    def append(self, result: ScreeningResult) -> None:
        line = _entry_line(result)
        with self._lock:
            try:
                with open(self.path, "a", encoding="utf-8") as f:
                    f.write(line)
                    f.flush()
                    os.fsync(f.fileno())
            except OSError as e:
                raise CheckpointError(f"Cannot append to checkpoint {self.path}: {e}") from e


def load_checkpoint(path: Path) -> Tuple[RunManifest, Dict[int, ScreeningResult]]:
    """
    Read a checkpoint, skipping unreadable entry lines

    Raises:
        CheckpointError: Missing file or unreadable manifest line
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise CheckpointError(f"No checkpoint at {path}; nothing to resume") from None
    except (OSError, UnicodeDecodeError) as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}") from e

    if not lines:
        raise CheckpointError(f"Checkpoint {path} is empty")
    try:
        manifest = RunManifest.model_validate_json(lines[0])
    except ValidationError as e:
        raise CheckpointError(f"Checkpoint {path} has an unreadable manifest: {e}") from e

    results: Dict[int, ScreeningResult] = {}
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            entry = json.loads(line)
            result = ScreeningResult.model_validate(entry["result"])
        except (ValueError, KeyError, TypeError) as e:
            logger.warning(f"Checkpoint line {number} unreadable ({e.__class__.__name__}); article will be re-processed")
            continue
        if result.article.index in results:
            logger.warning(f"Checkpoint line {number} repeats article {result.article.index}; keeping the first")
            continue
        results[result.article.index] = result

    logger.info(f"Loaded checkpoint {path}: {len(results)} completed articles")
    return manifest, results
