"""Vocabulary construction and sparse count / TF-IDF matrices.

The TF-IDF weighting is smoothed (idf = ln((1+N)/(1+df)) + 1) and every
nonzero row is scaled to unit Euclidean norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .corpus import Corpus
from .errors import VectorizeError


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    index: dict
    doc_freq: np.ndarray

    def __len__(self) -> int:
        return len(self.terms)


class DocTermMatrix:
    """Sparse nonnegative document-term matrix tagged with its weighting kind."""

    def __init__(self, matrix: sp.csr_matrix, kind: str):
        if kind not in ("counts", "tfidf"):
            raise VectorizeError(f"unknown matrix kind {kind!r}")
        self.matrix = matrix.tocsr()
        self.kind = kind

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def nnz(self):
        return self.matrix.nnz


def build_vocabulary(corpus: Corpus, min_df: int = 5, max_df_ratio: float = 0.5) -> Vocabulary:
    """Keep terms with min_df <= doc_freq and doc_freq/n_docs <= max_df_ratio."""
    if min_df < 1:
        raise VectorizeError(f"min_df must be >= 1, got {min_df}")
    if not (0.0 < max_df_ratio <= 1.0):
        raise VectorizeError(f"max_df_ratio must be in (0, 1], got {max_df_ratio}")
    n_docs = len(corpus)
    df: dict[str, int] = {}
    for doc in corpus.documents:
        for term in set(doc.tokens):
            df[term] = df.get(term, 0) + 1
    kept = sorted(
        t for t, f in df.items() if f >= min_df and f / n_docs <= max_df_ratio
    )
    if not kept:
        raise VectorizeError(
            f"vocabulary is empty after pruning (min_df={min_df}, max_df_ratio={max_df_ratio})"
        )
    return Vocabulary(
        terms=tuple(kept),
        index={t: i for i, t in enumerate(kept)},
        doc_freq=np.array([df[t] for t in kept], dtype=np.int64),
    )


def count_matrix(corpus: Corpus, vocab: Vocabulary) -> DocTermMatrix:
    """Raw term counts; out-of-vocabulary tokens are ignored."""
    if len(vocab) == 0:
        raise VectorizeError("vocabulary is empty")
    rows, cols, vals = [], [], []
    index = vocab.index
    for d, doc in enumerate(corpus.documents):
        counts: dict[int, int] = {}
        for tok in doc.tokens:
            col = index.get(tok)
            if col is not None:
                counts[col] = counts.get(col, 0) + 1
        for col in sorted(counts):
            rows.append(d)
            cols.append(col)
            vals.append(counts[col])
    matrix = sp.csr_matrix(
        (np.array(vals, dtype=np.float64), (rows, cols)),
        shape=(len(corpus), len(vocab)),
    )
    return DocTermMatrix(matrix, "counts")


def tfidf(counts: DocTermMatrix) -> DocTermMatrix:
    """Smoothed idf then row-wise L2 normalization. Rejects non-count input."""
    if counts.kind != "counts":
        raise VectorizeError(f"tfidf requires a counts matrix, got kind={counts.kind!r}")
    m = counts.matrix
    n_docs = m.shape[0]
    df = np.asarray((m > 0).sum(axis=0)).ravel()
    idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0
    weighted = m.multiply(idf[np.newaxis, :]).tocsr()
    norms = np.sqrt(np.asarray(weighted.multiply(weighted).sum(axis=1)).ravel())
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    weighted = sp.diags(scale) @ weighted
    return DocTermMatrix(weighted.tocsr(), "tfidf")


def save_matrix(m: DocTermMatrix, path: str | Path) -> None:
    """Text dump: header `rows cols nnz`, then `row col value` per line, row-major."""
    coo = m.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
        for i in order:
            fh.write(f"{coo.row[i]} {coo.col[i]} {coo.data[i]:.17g}\n")


def load_matrix(path: str | Path, kind: str) -> DocTermMatrix:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise VectorizeError(f"bad matrix header in {path}")
        n_rows, n_cols, nnz = (int(x) for x in header)
        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz, dtype=np.float64)
        for i in range(nnz):
            parts = fh.readline().split()
            rows[i], cols[i], vals[i] = int(parts[0]), int(parts[1]), float(parts[2])
    matrix = sp.csr_matrix((vals, (rows, cols)), shape=(n_rows, n_cols))
    return DocTermMatrix(matrix, kind)
