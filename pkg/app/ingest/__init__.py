"""Bibliographic CSV and research-question ingestion"""

from app.ingest.articles import ArticleRecord, IngestWarning, parse_articles, load_articles
from app.ingest.mapping import FieldMapping, detect_mapping
from app.ingest.questions import Question, QuestionSet, load_questions, parse_questions

__all__ = [
    "ArticleRecord",
    "IngestWarning",
    "parse_articles",
    "load_articles",
    "FieldMapping",
    "detect_mapping",
    "Question",
    "QuestionSet",
    "parse_questions",
    "load_questions",
]
