"""
Prompt template loading and rendering
Templates are plain text with {{name}} placeholders; packaged defaults can be
replaced file by file through the [templates] config section
"""

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional

from loguru import logger

from app.config import TemplatePaths
from app.errors import ConfigurationError


EXTRACTION_SENTINEL = "[[llassist:key-semantics]]"
ASSESSMENT_SENTINEL = "[[llassist:assessment]]"

_PLACEHOLDER = re.compile(r"\{\{\s*(\w+)\s*\}\}")


@dataclass(frozen=True)
class PromptTemplates:
    extraction_system: str
    extraction_user: str
    assessment_system: str
    assessment_user: str


def render(template: str, values: Mapping[str, str]) -> str:
    """Substitute placeholders in one pass; substituted text is never re-scanned"""

    def substitute(match: re.Match) -> str:
        name = match.group(1)
        if name not in values:
            raise ConfigurationError(f"Template placeholder '{{{{{name}}}}}' has no value")
        return values[name]

    return _PLACEHOLDER.sub(substitute, template)


def _read(name: str, override: Optional[Path]) -> str:
    if override is not None:
        try:
            text = Path(override).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"Cannot read template {override}: {e}") from e
        logger.debug(f"Using template override for {name}: {override}")
        return text
    return resources.files("app.prompts").joinpath("templates", f"{name}.txt").read_text(encoding="utf-8")


def load_templates(paths: Optional[TemplatePaths] = None) -> PromptTemplates:
    """Load the four templates, applying any configured overrides"""
    paths = paths or TemplatePaths()
    return PromptTemplates(
        extraction_system=_read("extraction_system", paths.extraction_system),
        extraction_user=_read("extraction_user", paths.extraction_user),
        assessment_system=_read("assessment_system", paths.assessment_system),
        assessment_user=_read("assessment_user", paths.assessment_user),
    )
