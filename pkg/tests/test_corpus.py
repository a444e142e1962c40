import csv

import pytest
from hypothesis import given
from hypothesis import strategies as st

from topicbench.corpus import (
    IngestOptions,
    build_corpus,
    load_csv,
    load_stopwords,
    normalize,
    tokenize,
)
from topicbench.errors import IngestError

HEADER = "Date received,Product,Company,Consumer complaint narrative,Complaint ID\n"


def write_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["Date received", "Product", "Company", "Consumer complaint narrative", "Complaint ID"]
        )
        writer.writerows(rows)


class TestLoadCsv:
    def test_two_rows_with_narratives(self, tmp_path):
        path = tmp_path / "c.csv"
        write_csv(path, [
            ["2021-03-01", "Credit card", "Acme Bank", "I was charged twice.", "101"],
            ["2021-03-02", "Mortgage", "Homeloans", "Escrow was miscalculated.", "102"],
        ])
        report = load_csv(path)
        assert report.kept_rows == 2
        assert [c.narrative for c in report.complaints] == [
            "I was charged twice.",
            "Escrow was miscalculated.",
        ]
        assert [c.complaint_id for c in report.complaints] == [101, 102]

    def test_empty_narrative_dropped_and_counted(self, tmp_path):
        path = tmp_path / "c.csv"
        write_csv(path, [
            ["2021-03-01", "Credit card", "Acme", "Real text.", "1"],
            ["2021-03-02", "Mortgage", "Home", "", "2"],
        ])
        report = load_csv(path)
        assert report.kept_rows == 1
        assert report.dropped_rows == 1
        assert report.total_rows == 2
        assert [c.complaint_id for c in report.complaints] == [1]

    def test_quoted_comma_and_newline(self, tmp_path):
        # oracle: the standard library's quoted-CSV parser round-trips the field
        narrative = 'They said "pay now", then\nhung up on me.'
        path = tmp_path / "c.csv"
        write_csv(path, [["2021-01-01", "Debt", "Collect Co", narrative, "7"]])
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        assert rows[0]["Consumer complaint narrative"] == narrative
        report = load_csv(path)
        assert report.complaints[0].narrative == narrative

    def test_missing_file(self, tmp_path):
        with pytest.raises(IngestError, match="not found"):
            load_csv(tmp_path / "nope.csv")

    def test_missing_required_column(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text("Complaint ID,Product\n1,Card\n", encoding="utf-8")
        with pytest.raises(IngestError, match="Consumer complaint narrative"):
            load_csv(path)

    def test_custom_column_mapping(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text("cid,text\n5,Bad fees everywhere.\n", encoding="utf-8")
        options = IngestOptions(columns={"id": "cid", "narrative": "text"})
        report = load_csv(path, options)
        assert report.complaints[0].complaint_id == 5

    def test_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "c.csv"
        write_csv(path, [
            ["2021-01-01", "A", "B", "text one", "9"],
            ["2021-01-02", "A", "B", "text two", "9"],
        ])
        with pytest.raises(IngestError, match="duplicate"):
            load_csv(path)

    def test_deterministic_order(self, tmp_path):
        path = tmp_path / "c.csv"
        write_csv(path, [
            ["2021-01-01", "A", "B", f"narrative number {i}", str(i)] for i in range(20)
        ])
        first = load_csv(path)
        second = load_csv(path)
        assert [c.complaint_id for c in first.complaints] == [
            c.complaint_id for c in second.complaints
        ]

    def test_kept_plus_dropped_equals_total(self, tmp_path):
        path = tmp_path / "c.csv"
        rows = []
        for i in range(30):
            narrative = "something went wrong" if i % 3 else ""
            rows.append(["2021-01-01", "P", "C", narrative, str(i)])
        write_csv(path, rows)
        report = load_csv(path)
        assert report.kept_rows + report.dropped_rows == report.total_rows == 30


class TestTokenize:
    def test_spec_sentence(self):
        assert tokenize("Charged a late fee, twice!") == ["charged", "a", "late", "fee", "twice"]

    def test_empty(self):
        assert tokenize("") == []

    def test_redaction_and_digits(self):
        assert tokenize("XXXX owed 100") == ["owed"]
        assert tokenize("xx XxXx XXXXXXXX fine x") == ["fine", "x"]

    def test_unicode_letters(self):
        assert tokenize("Crédit était 100 bef123aft") == ["crédit", "était", "bef", "aft"]

    @given(st.text(max_size=200))
    def test_alphabet_invariant(self, text):
        for tok in tokenize(text):
            assert tok
            assert tok == tok.lower()
            assert not any(ch.isdigit() for ch in tok)


class TestNormalize:
    def test_spec_example_with_stemming(self):
        assert normalize(["charged", "a", "late", "fee"], {"a"}, stem=True) == [
            "charg", "late", "fee",
        ]

    def test_all_stopwords(self):
        assert normalize(["the", "a"], {"the", "a"}) == []

    def test_stem_off_identity_minus_stopwords(self):
        tokens = ["charged", "a", "late", "fee"]
        assert normalize(tokens, {"a"}, stem=False) == ["charged", "late", "fee"]

    def test_idempotent_without_stemming(self):
        stop = {"the"}
        tokens = ["the", "payment", "failed", "again"]
        once = normalize(tokens, stop)
        assert normalize(once, stop) == once

    def test_lemma_overrides_win(self):
        out = normalize(["charged"], set(), stem=True, lemma_overrides={"charged": "charge"})
        assert out == ["charge"]


def test_bundled_stopwords_lowercase():
    words = load_stopwords()
    assert "the" in words and "a" in words
    assert all(w == w.lower() for w in words)


def test_build_corpus_tokens_normalized(tmp_path):
    path = tmp_path / "c.csv"
    write_csv(path, [
        ["2021-01-01", "Card", "Acme", "The bank charged a late fee XXXX 99", "1"],
    ])
    report = load_csv(path)
    built = build_corpus(report, load_stopwords(), stem=True)
    doc = built.documents[0]
    assert doc.raw_text == "The bank charged a late fee XXXX 99"
    assert doc.tokens == ("bank", "charg", "late", "fee")
