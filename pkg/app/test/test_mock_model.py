"""Deterministic mock backend checked against an independent FNV-1a computation"""

import pytest

from app.model.mock_model import mock_complete, mock_score
from app.prompts import load_templates
from app.screening.estimation import build_assessment_prompt, parse_assessment
from app.screening.extraction import KeySemantics, build_extraction_prompt, parse_semantics


def reference_score(prompt: str, seed: int) -> float:
    h = 14695981039346656037
    for byte in (prompt + str(seed)).encode("utf-8"):
        h = ((h ^ byte) * 1099511628211) % (1 << 64)
    return (h % 1000) / 999


@pytest.mark.parametrize("prompt", ["", "a", "foobar", "TITLE: Ünïcode ✓\nABSTRACT: x"])
@pytest.mark.parametrize("seed", [0, 1, 42])
def test_score_matches_reference(prompt, seed):
    assert mock_score(prompt, seed) == pytest.approx(reference_score(prompt, seed), abs=0)
    assert 0.0 <= mock_score(prompt, seed) <= 1.0


def test_same_inputs_give_identical_replies():
    assert mock_complete("sys", "usr", 0) == mock_complete("sys", "usr", 0)


def test_assessment_reply_scores(article):
    templates = load_templates()
    system, user = build_assessment_prompt(article, KeySemantics(topics=["LLM"]), "Why?", templates)

    assessment = parse_assessment(mock_complete(system, user, 0), "RQ1")

    assert assessment.relevance_score == pytest.approx(reference_score(user, 0))
    assert assessment.contribution_score == pytest.approx(reference_score(user, 1))
    assert assessment.relevance_decision == (assessment.relevance_score > 0.5)
    assert assessment.warnings == []


def test_seed_changes_scores(article):
    system, user = build_assessment_prompt(article, KeySemantics(), "Why?")
    scores = {parse_assessment(mock_complete(system, user, seed), "RQ1").relevance_score for seed in range(5)}
    assert len(scores) > 1


def test_extraction_reply_parses_with_a_topic(article):
    system, user = build_extraction_prompt(article)
    semantics = parse_semantics(mock_complete(system, user, 0))
    assert semantics.topics


def test_unknown_prompt_has_no_block():
    reply = mock_complete("Translate this.", "Bonjour", 0)
    assert "{" not in reply
