"""Prompt templates for the two chain-of-thought stages"""

from app.prompts.loader import (
    ASSESSMENT_SENTINEL,
    EXTRACTION_SENTINEL,
    PromptTemplates,
    load_templates,
    render,
)

__all__ = [
    "ASSESSMENT_SENTINEL",
    "EXTRACTION_SENTINEL",
    "PromptTemplates",
    "load_templates",
    "render",
]
