"""CSV ingestion and token normalization for complaint narratives.

Rows with empty narratives are dropped and counted. Tokenization keeps
lowercased runs of letters, discards digit runs, and strips the CFPB
"XXXX" redaction placeholders. Normalization removes stopwords and can
apply Porter stemming plus user-supplied lemma overrides.
"""

from __future__ import annotations

import csv
import hashlib
import re
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path

from . import porter
from .errors import IngestError

DEFAULT_COLUMNS = {
    "id": "Complaint ID",
    "date": "Date received",
    "product": "Product",
    "company": "Company",
    "narrative": "Consumer complaint narrative",
}

# redaction placeholder: two or more x's and nothing else
_REDACTION_RE = re.compile(r"x{2,}$")


@dataclass(frozen=True)
class RawComplaint:
    complaint_id: int
    date_received: date | None
    product: str
    company: str
    narrative: str


@dataclass(frozen=True)
class Document:
    id: str
    raw_text: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class Provenance:
    source: str
    options_fingerprint: str


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]
    provenance: Provenance

    def __len__(self) -> int:
        return len(self.documents)


@dataclass(frozen=True)
class IngestOptions:
    columns: dict = field(default_factory=lambda: dict(DEFAULT_COLUMNS))

    def fingerprint(self) -> str:
        payload = "|".join(f"{k}={self.columns[k]}" for k in sorted(self.columns))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass
class IngestReport:
    complaints: list[RawComplaint]
    total_rows: int
    kept_rows: int
    dropped_rows: int
    source: str


def _parse_date(text: str) -> date | None:
    for fmt in ("%Y-%m-%d", "%m/%d/%Y"):
        try:
            return datetime.strptime(text.strip(), fmt).date()
        except ValueError:
            continue
    return None


def load_csv(path: str | Path, options: IngestOptions | None = None) -> IngestReport:
    """Parse a CFPB-style complaint CSV, dropping rows without a narrative."""
    options = options or IngestOptions()
    path = Path(path)
    if not path.exists():
        raise IngestError(f"input file not found: {path}")
    cols = options.columns
    complaints: list[RawComplaint] = []
    total = kept = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise IngestError(f"empty file: {path}")
        for required in ("id", "narrative"):
            if cols[required] not in reader.fieldnames:
                raise IngestError(
                    f"missing required column {cols[required]!r} in {path}"
                )
        try:
            for row in reader:
                total += 1
                narrative = (row.get(cols["narrative"]) or "").strip()
                if not narrative:
                    continue
                raw_id = (row.get(cols["id"]) or "").strip()
                try:
                    complaint_id = int(raw_id)
                except ValueError as exc:
                    raise IngestError(
                        f"row {reader.line_num}: complaint id {raw_id!r} is not an integer"
                    ) from exc
                complaints.append(
                    RawComplaint(
                        complaint_id=complaint_id,
                        date_received=_parse_date(row.get(cols.get("date", ""), "") or ""),
                        product=(row.get(cols.get("product", ""), "") or "").strip(),
                        company=(row.get(cols.get("company", ""), "") or "").strip(),
                        narrative=narrative,
                    )
                )
                kept += 1
        except csv.Error as exc:
            raise IngestError(f"malformed CSV near line {reader.line_num}: {exc}") from exc
    seen: set[int] = set()
    for c in complaints:
        if c.complaint_id in seen:
            raise IngestError(f"duplicate complaint id {c.complaint_id}")
        seen.add(c.complaint_id)
    return IngestReport(
        complaints=complaints,
        total_rows=total,
        kept_rows=kept,
        dropped_rows=total - kept,
        source=str(path),
    )


def tokenize(text: str) -> list[str]:
    """Lowercased maximal runs of Unicode letters; anything that is not a
    letter (digits included) splits tokens, and redaction x-runs are dropped."""
    tokens = []
    current: list[str] = []

    def flush():
        if current:
            tok = "".join(current)
            current.clear()
            if not _REDACTION_RE.fullmatch(tok):
                tokens.append(tok)

    for ch in text.lower():
        if ch.isalpha():
            current.append(ch)
        else:
            flush()
    flush()
    return tokens


def normalize(
    tokens: list[str],
    stopwords: frozenset[str] | set[str],
    stem: bool = False,
    lemma_overrides: dict[str, str] | None = None,
) -> list[str]:
    """Remove stopwords, then map through the lemma table or Porter stemmer."""
    out = []
    for tok in tokens:
        if tok in stopwords:
            continue
        if lemma_overrides and tok in lemma_overrides:
            out.append(lemma_overrides[tok])
        elif stem:
            out.append(porter.stem(tok))
        else:
            out.append(tok)
    return out


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """One lowercase word per line; defaults to the bundled list."""
    if path is None:
        path = Path(__file__).parent / "data" / "stopwords.txt"
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip()
            if word:
                words.add(word.lower())
    return frozenset(words)


def load_lemma_overrides(path: str | Path) -> dict[str, str]:
    """Tab- or space-separated `surface lemma` pairs, one per line."""
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if len(parts) >= 2:
                table[parts[0].lower()] = parts[1].lower()
    return table


def build_corpus(
    report: IngestReport,
    stopwords: frozenset[str],
    stem: bool = False,
    lemma_overrides: dict[str, str] | None = None,
) -> Corpus:
    """Tokenize and normalize every kept complaint, preserving row order."""
    opts = f"stem={int(stem)}|stop={_words_digest(stopwords)}|lemma={_lemma_digest(lemma_overrides)}"
    docs = tuple(
        Document(
            id=str(c.complaint_id),
            raw_text=c.narrative,
            tokens=tuple(normalize(tokenize(c.narrative), stopwords, stem, lemma_overrides)),
        )
        for c in report.complaints
    )
    fingerprint = hashlib.sha256(opts.encode("utf-8")).hexdigest()[:16]
    return Corpus(documents=docs, provenance=Provenance(report.source, fingerprint))


def _words_digest(stopwords) -> str:
    payload = "\n".join(sorted(stopwords))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def _lemma_digest(lemma_overrides) -> str:
    if not lemma_overrides:
        return "none"
    payload = "\n".join(f"{k}\t{v}" for k, v in sorted(lemma_overrides.items()))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]
