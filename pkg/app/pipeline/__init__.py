"""Run orchestration, manifests and checkpoints"""

from app.pipeline.checkpoint import CheckpointWriter, load_checkpoint
from app.pipeline.manifest import RunManifest, build_manifest, corpus_digest, question_digest
from app.pipeline.runner import ScreeningPipeline, resume, run

__all__ = [
    "CheckpointWriter",
    "load_checkpoint",
    "RunManifest",
    "build_manifest",
    "corpus_digest",
    "question_digest",
    "ScreeningPipeline",
    "run",
    "resume",
]
