"""Topic-quality metrics: U_Mass (whole-document co-occurrence) and C_V
(sliding-window NPMI context vectors aggregated by cosine similarity)."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .errors import ModelError
from .topics import TopicModel

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 110
DEFAULT_EPSILON = 1e-12
DEFAULT_TOP_N = 10


@dataclass
class CooccurrenceCounts:
    mode: str                    # "document" | "window"
    window_size: int | None
    n_contexts: int
    words: tuple[str, ...]
    single: np.ndarray           # per-word context counts
    pair: np.ndarray             # symmetric per-pair context counts
    index: dict = field(default_factory=dict)

    def single_of(self, word: str) -> int:
        return int(self.single[self.index[word]])

    def pair_of(self, w1: str, w2: str) -> int:
        return int(self.pair[self.index[w1], self.index[w2]])


def count_contexts(
    corpus: Corpus,
    words,
    mode: str = "document",
    window_size: int | None = None,
) -> CooccurrenceCounts:
    """Count in how many contexts each word and word pair occurs.

    mode="document": each document is one context. mode="window": every
    contiguous token span of window_size (step 1) is one context, and a
    document shorter than the window contributes a single whole-document
    context. A word occurs in a context if present at least once.
    """
    word_list = tuple(sorted(set(words)))
    if not word_list:
        raise ModelError("count_contexts requires a nonempty word set")
    if mode not in ("document", "window"):
        raise ModelError(f"mode must be document or window, got {mode!r}")
    if mode == "window" and (window_size is None or window_size < 1):
        raise ModelError(f"window mode needs window_size >= 1, got {window_size}")
    index = {w: i for i, w in enumerate(word_list)}
    n_words = len(word_list)
    single = np.zeros(n_words, dtype=np.int64)
    pair = np.zeros((n_words, n_words), dtype=np.int64)
    n_contexts = 0
    for doc in corpus.documents:
        tokens = doc.tokens
        length = len(tokens)
        if mode == "document" or length <= (window_size or 0):
            present = sorted({index[t] for t in tokens if t in index})
            n_contexts += 1
            if present:
                arr = np.array(present)
                single[arr] += 1
                pair[np.ix_(arr, arr)] += 1
            continue
        s = window_size
        n_win = length - s + 1
        n_contexts += n_win
        positions = np.array([index.get(t, -1) for t in tokens], dtype=np.int64)
        present_words = sorted({p for p in positions if p >= 0})
        if not present_words:
            continue
        presence = np.empty((n_win, len(present_words)), dtype=bool)
        for col, w in enumerate(present_words):
            run = np.concatenate([[0], np.cumsum(positions == w)])
            presence[:, col] = (run[s:] - run[:-s]) > 0
        arr = np.array(present_words)
        counts = presence.astype(np.int64)
        single[arr] += counts.sum(axis=0)
        pair[np.ix_(arr, arr)] += counts.T @ counts
    return CooccurrenceCounts(
        mode=mode,
        window_size=window_size if mode == "window" else None,
        n_contexts=n_contexts,
        words=word_list,
        single=single,
        pair=pair,
        index=index,
    )


def u_mass(topic_words, counts: CooccurrenceCounts):
    """Mean over ordered pairs (w_i ranked above w_j) of
    ln((pair(w_i, w_j) + 1) / single(w_j)).

    Pairs whose denominator word never occurs are skipped. Returns
    (score, pairs_used, pairs_skipped); a topic with < 2 usable words
    scores 0 by the empty-sum convention.
    """
    if counts.mode != "document":
        raise ModelError("u_mass requires document-mode counts")
    words = [w for w in topic_words if w in counts.index]
    total = 0.0
    used = 0
    skipped = 0
    for j in range(1, len(words)):
        denom = counts.single_of(words[j])
        for i in range(j):
            if denom == 0:
                skipped += 1
                continue
            total += float(np.log((counts.pair_of(words[i], words[j]) + 1.0) / denom))
            used += 1
    if skipped:
        logger.debug("u_mass skipped %d pairs with zero denominator", skipped)
    return (total / used if used else 0.0), used, skipped


def npmi(w1: str, w2: str, counts: CooccurrenceCounts,
         epsilon: float = DEFAULT_EPSILON) -> float:
    """Normalized PMI clamped to [-1, 1]; zero when either marginal is zero."""
    if epsilon <= 0:
        raise ModelError(f"epsilon must be > 0, got {epsilon}")
    n = counts.n_contexts
    p1 = counts.single_of(w1) / n
    p2 = counts.single_of(w2) / n
    if p1 == 0.0 or p2 == 0.0:
        logger.debug("npmi(%r, %r): zero marginal, defined as 0", w1, w2)
        return 0.0
    p12 = counts.pair_of(w1, w2) / n
    value = np.log((p12 + epsilon) / (p1 * p2)) / (-np.log(p12 + epsilon))
    return float(np.clip(value, -1.0, 1.0))


def c_v(topic_words, counts: CooccurrenceCounts,
        epsilon: float = DEFAULT_EPSILON):
    """One-set segmentation C_V: cosine between each word's NPMI context
    vector and the topic's summed vector, averaged over the word set.

    Returns (score, zero_vector_segments). Zero vectors score 0.
    """
    if counts.mode != "window":
        raise ModelError("c_v requires window-mode counts")
    seen = []
    for w in topic_words:
        if w not in seen and w in counts.index:
            seen.append(w)
    if not seen:
        return 0.0, 0
    n = len(seen)
    matrix = np.empty((n, n), dtype=np.float64)
    for i, wi in enumerate(seen):
        for j, wj in enumerate(seen):
            matrix[i, j] = npmi(wi, wj, counts, epsilon)
    summed = matrix.sum(axis=0)
    sims = []
    zero_segments = 0
    sum_norm = float(np.linalg.norm(summed))
    for i in range(n):
        v_norm = float(np.linalg.norm(matrix[i]))
        if v_norm == 0.0 or sum_norm == 0.0:
            sims.append(0.0)
            zero_segments += 1
            continue
        sims.append(float(matrix[i] @ summed / (v_norm * sum_norm)))
    if zero_segments:
        logger.debug("c_v: %d zero-vector segments scored 0", zero_segments)
    return float(np.mean(sims)), zero_segments


@dataclass
class TopicScore:
    topic: int
    c_v: float
    u_mass: float
    skipped_words: list[str]


@dataclass
class CoherenceReport:
    per_topic: list[TopicScore]
    aggregate_c_v: float
    aggregate_u_mass: float
    params: dict


def evaluate(
    model: TopicModel,
    corpus: Corpus,
    top_n: int = DEFAULT_TOP_N,
    window_size: int = DEFAULT_WINDOW,
    epsilon: float = DEFAULT_EPSILON,
) -> CoherenceReport:
    """Per-topic U_Mass (document contexts) and C_V (window contexts) on the
    top_n words; aggregates are unweighted means over topics. Topic words
    absent from the corpus are skipped and reported per topic."""
    if top_n < 1:
        raise ModelError(f"top_n must be >= 1, got {top_n}")
    corpus_terms = set()
    for doc in corpus.documents:
        corpus_terms.update(doc.tokens)
    selected: list[tuple[int, list[str], list[str]]] = []
    union: set[str] = set()
    any_present = False
    for tid, ranked in model.topics:
        words = [w for w, _ in ranked[:top_n]]
        present = [w for w in words if w in corpus_terms]
        absent = [w for w in words if w not in corpus_terms]
        if present:
            any_present = True
        union.update(present)
        selected.append((tid, present, absent))
    if not any_present:
        raise ModelError("every topic word is absent from the corpus")
    doc_counts = count_contexts(corpus, union, mode="document")
    win_counts = count_contexts(corpus, union, mode="window", window_size=window_size)
    per_topic = []
    for tid, present, absent in selected:
        um, used, _ = u_mass(present, doc_counts)
        cv, _ = c_v(present, win_counts, epsilon)
        if used == 0:
            logger.debug("topic %d is degenerate: no usable word pairs", tid)
        per_topic.append(TopicScore(topic=tid, c_v=cv, u_mass=um, skipped_words=absent))
    return CoherenceReport(
        per_topic=per_topic,
        aggregate_c_v=float(np.mean([s.c_v for s in per_topic])),
        aggregate_u_mass=float(np.mean([s.u_mass for s in per_topic])),
        params={"top_n": top_n, "window_size": window_size, "epsilon": epsilon},
    )


def save_report(report: CoherenceReport, path: str | Path) -> None:
    payload = {
        "aggregate": {"c_v": report.aggregate_c_v, "u_mass": report.aggregate_u_mass},
        "per_topic": [
            {
                "topic": s.topic,
                "c_v": s.c_v,
                "u_mass": s.u_mass,
                "skipped_words": s.skipped_words,
            }
            for s in report.per_topic
        ],
        "params": report.params,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False)
        fh.write("\n")
