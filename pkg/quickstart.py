"""
Quick Start Script for LLAssist
Screens a small synthetic corpus with the offline mock backend and builds a
report, so the whole pipeline can be checked without API keys
"""

import sys
from pathlib import Path

from loguru import logger

# Configure logger
logger.remove()
logger.add(sys.stdout, level="INFO")

DEMO_DIR = Path("runs/quickstart")

SAMPLE_ARTICLES = [
    ("Large Language Models for Malware Detection", "We evaluate GPT-4 on malware triage.", "2023"),
    ("Prompt Injection Attacks on Chat Assistants", "A taxonomy of prompt injection.", "2024"),
    ("Federated Learning for Intrusion Detection", "Privacy-preserving IDS training.", "2021"),
    ("Phishing Email Generation with LLMs", "Measuring the persuasiveness of generated phishing.", "2023"),
]

SAMPLE_QUESTIONS = [
    "RQ1: How are large language models applied to cybersecurity tasks?",
    "RQ2: Which threats do large language models introduce?",
]


def main():
    """Main quick start function"""

    print("=" * 60)
    print("LLAssist - Quick Start")
    print("=" * 60)

    # Step 1: Write sample inputs
    print("\n[1/4] Writing sample inputs...")
    import pandas as pd

    DEMO_DIR.mkdir(parents=True, exist_ok=True)
    articles_path = DEMO_DIR / "articles.csv"
    questions_path = DEMO_DIR / "questions.txt"
    pd.DataFrame(SAMPLE_ARTICLES, columns=["Title", "Abstract", "Year"]).to_csv(articles_path, index=False)
    questions_path.write_text("\n".join(SAMPLE_QUESTIONS) + "\n", encoding="utf-8")
    logger.info(f"✓ {len(SAMPLE_ARTICLES)} articles -> {articles_path}")

    # Step 2: Validate
    print("\n[2/4] Validating inputs...")
    from app.ingest import load_articles, load_questions

    articles, warnings = load_articles(articles_path)
    questions = load_questions(questions_path)
    logger.info(f"✓ {len(articles)} articles, {len(questions)} questions, {len(warnings)} warnings")

    # Step 3: Screen with the mock backend
    print("\n[3/4] Screening with the mock backend...")
    from app.config import get_settings
    from app.output import emit_csv, emit_json
    from app.pipeline import ScreeningPipeline

    settings = get_settings()
    pipeline = ScreeningPipeline(settings.backend("mock"), settings.screening)
    results = pipeline.run(articles, questions, DEMO_DIR / "checkpoint.jsonl")
    emit_json(results, pipeline.manifest, DEMO_DIR / "results.json")
    emit_csv(results, questions, DEMO_DIR / "results.csv")
    for result in results:
        mark = "MUST-READ" if result.must_read else "discard  "
        logger.info(f"  {mark} {result.article.title}")

    # Step 4: Report
    print("\n[4/4] Building report...")
    from app.report.render import write_report

    written = write_report([DEMO_DIR / "results.json"], DEMO_DIR / "report")
    logger.info(f"✓ {len(written)} report files in {DEMO_DIR / 'report'}")

    # Success
    print("\n" + "=" * 60)
    print("✓ Quick start completed successfully!")
    print("=" * 60)
    print("\nNext steps:")
    print("1. cp llassist.example.toml llassist.toml and add a real backend")
    print("2. python cli.py screen --articles <export.csv> --questions <rq.txt> --backend <name> --out runs/<name>")
    print("3. python cli.py report --results runs/*/results.json --out report")
    print("=" * 60)


if __name__ == "__main__":
    try:
        main()
    except KeyboardInterrupt:
        print("\n\nQuick start interrupted by user")
    except Exception as e:
        logger.error(f"Unexpected error: {e}")
        import traceback
        traceback.print_exc()
