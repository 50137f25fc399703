"""CSV and research-question ingestion"""

import pytest

from app.errors import ConfigurationError, InputError
from app.ingest import detect_mapping, load_articles, load_questions, parse_articles, parse_questions
from app.ingest.mapping import FieldMapping


class TestParseArticles:
    def test_quoted_comma_in_title(self):
        records, warnings = parse_articles(b'Title,Abstract,Year\n"A, Study","Text",2023\n')

        assert len(records) == 1
        assert records[0].title == "A, Study"
        assert records[0].abstract == "Text"
        assert records[0].year == 2023
        assert records[0].index == 0
        assert warnings == []

    def test_header_only_gives_empty_corpus(self):
        records, warnings = parse_articles(b"Title,Abstract,Year\n")
        assert records == []
        assert warnings == []

    def test_fixture_rows_warnings_and_indices(self, scopus_csv):
        records, warnings = load_articles(scopus_csv)

        assert [r.index for r in records] == [0, 1, 2]
        assert [r.title for r in records] == [
            "Large Language Models for Malware Detection",
            "Prompt Injection Attacks",
            "Privacy in Transformers",
        ]
        assert records[0].venue == "Computers & Security"
        assert records[0].source_keywords == "LLM; malware"
        assert records[0].external_id == "10.1/a"
        assert records[1].abstract == ""
        assert records[2].year is None

        messages = [str(w) for w in warnings]
        assert "row 2: empty abstract" in messages
        assert "row 3: empty title; row skipped" in messages
        assert "row 4: unparseable year 'circa 2021'" in messages

    def test_year_outside_range_is_absent(self):
        records, warnings = parse_articles(b"Title,Abstract,Year\nOld,Text,1850\n")
        assert records[0].year is None
        assert len(warnings) == 1

    def test_titles_and_abstracts_are_trimmed(self):
        records, _ = parse_articles(b'Title,Abstract\n"  Padded  ","  body "\n')
        assert records[0].title == "Padded"
        assert records[0].abstract == "body"

    def test_invalid_utf8_reports_byte_offset(self):
        with pytest.raises(InputError) as excinfo:
            parse_articles(b"Title,Abstract\n\xff,x\n")
        assert excinfo.value.byte_offset == 15

    def test_byte_order_mark_is_ignored(self):
        records, _ = parse_articles(b"\xef\xbb\xbfTitle,Abstract\nX,Y\n")
        assert records[0].title == "X"

    def test_missing_mandatory_column_is_fatal(self):
        with pytest.raises(ConfigurationError):
            parse_articles(b"Title,Year\nX,2020\n")

    def test_explicit_mapping_with_missing_column_is_fatal(self):
        mapping = FieldMapping(title="Title", abstract="Summary")
        with pytest.raises(ConfigurationError, match="Summary"):
            parse_articles(b"Title,Abstract\nX,Y\n", mapping=mapping)

    def test_missing_optional_column_is_a_file_warning(self):
        mapping = FieldMapping(title="Title", abstract="Abstract", venue="Journal")
        records, warnings = parse_articles(b"Title,Abstract\nX,Y\n", mapping=mapping)
        assert records[0].venue == ""
        assert warnings[0].row is None
        assert "Journal" in warnings[0].message

    def test_override_maps_unknown_dialect(self):
        records, _ = parse_articles(
            b"Name,Summary\nX,Y\n", override={"title": "Name", "abstract": "Summary"}
        )
        assert (records[0].title, records[0].abstract) == ("X", "Y")

    def test_large_scopus_export_row_count(self, tmp_path):
        lines = ["Title,Abstract,Year,Authors,Source title"]
        lines += [f'"Paper {i}, part {i % 7}","Abstract {i}",{2000 + i % 24},"A{i}","Venue"' for i in range(2576)]
        path = tmp_path / "big.csv"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

        expected = sum(1 for line in path.read_text().splitlines()[1:] if line.strip())
        records, warnings = load_articles(path)

        assert expected == 2576
        assert len(records) == expected
        assert records[-1].index == 2575
        assert warnings == []


class TestDetectMapping:
    def test_scopus_dialect(self):
        mapping = detect_mapping(["Title", "Abstract", "Year"])
        assert mapping.dialect == "scopus"
        assert mapping.year == "Year"

    def test_ieee_dialect_without_year(self):
        mapping = detect_mapping(["Document Title", "Abstract"])
        assert mapping.dialect == "ieee_xplore"
        assert mapping.title == "Document Title"
        assert mapping.year is None

    def test_case_insensitive_keeps_header_spelling(self):
        mapping = detect_mapping(["TITLE", "abstract"])
        assert mapping.title == "TITLE"
        assert mapping.abstract == "abstract"

    def test_no_match_without_override_is_fatal(self):
        with pytest.raises(ConfigurationError):
            detect_mapping(["colA", "colB"])

    def test_override_wins_per_field(self):
        mapping = detect_mapping(["Title", "Abstract", "Summary"], override={"abstract": "Summary"})
        assert mapping.dialect == "scopus"
        assert mapping.abstract == "Summary"

    def test_unknown_override_field_is_fatal(self):
        with pytest.raises(ConfigurationError, match="publisher"):
            detect_mapping(["Title", "Abstract"], override={"publisher": "Publisher"})

    def test_empty_header_is_fatal(self):
        with pytest.raises(ConfigurationError):
            detect_mapping([])


class TestParseQuestions:
    def test_plain_lines_are_numbered(self):
        questions = parse_questions(b"First question?\n\nSecond question?\n")
        assert questions.labels == ["RQ1", "RQ2"]
        assert questions.questions[1].text == "Second question?"

    def test_explicit_label_is_kept(self):
        questions = parse_questions("RQ4: What ethical considerations and privacy issues arise?")
        assert questions.labels == ["RQ4"]
        assert questions.questions[0].text.startswith("What ethical considerations")

    def test_lowercase_label_is_normalized(self):
        assert parse_questions("rq2 : something").labels == ["RQ2"]

    def test_comments_are_ignored(self, questions_file):
        questions = load_questions(questions_file)
        assert questions.labels == ["RQ1", "RQ2", "RQ3", "RQ4"]

    def test_blank_file_is_an_error(self):
        with pytest.raises(InputError, match="no research questions"):
            parse_questions(b"\n  \n\n")

    def test_duplicate_labels_are_an_error(self):
        with pytest.raises(InputError):
            parse_questions("RQ1: a\nRQ1: b\n")

    def test_label_without_text_is_an_error(self):
        with pytest.raises(InputError):
            parse_questions("RQ1:\n")
