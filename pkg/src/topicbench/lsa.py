"""Latent Semantic Analysis: randomized truncated SVD of the TF-IDF matrix
and topic-word extraction from the right singular vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ModelError
from .topics import TopicModel, rank_terms
from .vectorize import DocTermMatrix, Vocabulary


@dataclass(frozen=True)
class SvdFactors:
    U: np.ndarray    # n_docs x k, orthonormal columns
    S: np.ndarray    # k singular values, descending
    Vt: np.ndarray   # k x n_terms, orthonormal rows


def truncated_svd(
    m: DocTermMatrix | sp.spmatrix | np.ndarray,
    k: int,
    seed: int,
    oversample: int = 10,
    power_iters: int = 4,
) -> SvdFactors:
    """Top-k singular triplets by randomized subspace iteration.

    Oversampling p=10 with q=4 QR-stabilized power iterations; for a
    fixed seed the factors are bitwise reproducible.
    """
    matrix = m.matrix if isinstance(m, DocTermMatrix) else m
    n_rows, n_cols = matrix.shape
    if n_rows == 0 or n_cols == 0:
        raise ModelError("matrix has a zero dimension")
    if not (1 <= k <= min(n_rows, n_cols)):
        raise ModelError(f"k={k} out of range for shape {matrix.shape}")
    rng = np.random.default_rng(seed)
    width = min(k + oversample, min(n_rows, n_cols))
    probe = rng.standard_normal((n_cols, width))
    q, _ = np.linalg.qr(matrix @ probe)
    for _ in range(power_iters):
        w, _ = np.linalg.qr(matrix.T @ q)
        q, _ = np.linalg.qr(matrix @ w)
    b = matrix.T @ q          # n_cols x width (avoids densifying sparse input)
    u_small, s, vt = np.linalg.svd(b.T, full_matrices=False)
    u = q @ u_small
    u, s, vt = u[:, :k], s[:k], vt[:k]
    # deterministic sign: largest-|loading| entry of each component positive
    for i in range(k):
        pivot = np.argmax(np.abs(vt[i]))
        if vt[i, pivot] < 0:
            vt[i] = -vt[i]
            u[:, i] = -u[:, i]
    return SvdFactors(U=np.ascontiguousarray(u), S=s.copy(), Vt=np.ascontiguousarray(vt))


def reconstruction_error(matrix, factors: SvdFactors) -> float:
    """Frobenius norm of (matrix - U S Vt)."""
    dense = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)
    approx = factors.U @ (factors.S[:, None] * factors.Vt)
    return float(np.linalg.norm(dense - approx, "fro"))


def lsa_topics(factors: SvdFactors, vocab: Vocabulary, n_words: int) -> TopicModel:
    """Topic i: terms ranked by |Vt[i]|; document assignment by |U * S|."""
    if n_words < 1:
        raise ModelError(f"n_words must be >= 1, got {n_words}")
    topics = []
    for i in range(factors.S.shape[0]):
        loadings = np.abs(factors.Vt[i])
        topics.append((i, tuple(rank_terms(loadings, vocab.terms, n_words))))
    scores = np.abs(factors.U * factors.S[np.newaxis, :])
    assignments = np.argmax(scores, axis=1).astype(np.int64)
    return TopicModel(topics=tuple(topics), assignments=assignments, method="lsa")
