"""Class-based TF-IDF topic representation, the shared TopicModel type,
and the intertopic-distance-map export."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import reduce as reduce_mod
from .errors import ModelError
from .vectorize import DocTermMatrix, Vocabulary


@dataclass(frozen=True)
class TopicModel:
    topics: tuple          # ((topic_id, ((word, weight), ...)), ...)
    assignments: np.ndarray
    method: str
    config_fingerprint: str = ""

    def topic_ids(self) -> list[int]:
        return [tid for tid, _ in self.topics]

    def topic_words(self, topic_id: int) -> list[str]:
        for tid, words in self.topics:
            if tid == topic_id:
                return [w for w, _ in words]
        raise KeyError(topic_id)

    def sizes(self) -> dict[int, int]:
        counts: dict[int, int] = {tid: 0 for tid, _ in self.topics}
        for a in self.assignments:
            a = int(a)
            if a in counts:
                counts[a] += 1
        return counts


@dataclass(frozen=True)
class IntertopicMap:
    records: tuple  # ((topic_id, x, y, size, top_words), ...)


def rank_terms(weights: np.ndarray, terms: tuple, n_words: int):
    """Descending weight, ties broken lexicographically."""
    order = sorted(range(len(terms)), key=lambda i: (-weights[i], terms[i]))
    return [(terms[i], float(weights[i])) for i in order[:n_words]]


def ctfidf(counts: DocTermMatrix, labels: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Per-class term weights W(t,c) = tf(t,c) * ln(1 + A / f(t)).

    Documents in each class are pooled into one pseudo-document; noise
    documents (label -1) are excluded from every count. A is the mean
    total token count per class, f(t) the term's pooled count over all
    classes. Returns (C x V weight matrix, class ids in row order).
    """
    if counts.kind != "counts":
        raise ModelError(f"ctfidf requires a counts matrix, got kind={counts.kind!r}")
    labels = np.asarray(labels)
    class_ids = sorted(int(c) for c in np.unique(labels) if c >= 0)
    if not class_ids:
        raise ModelError("no non-noise class to represent")
    matrix = counts.matrix
    tf = np.zeros((len(class_ids), matrix.shape[1]), dtype=np.float64)
    for row, c in enumerate(class_ids):
        members = np.nonzero(labels == c)[0]
        if members.size == 0:
            raise ModelError(f"class {c} is empty after noise exclusion")
        tf[row] = np.asarray(matrix[members].sum(axis=0)).ravel()
    totals = tf.sum(axis=1)
    for row, c in enumerate(class_ids):
        if totals[row] == 0:
            raise ModelError(f"class {c} has no in-vocabulary tokens")
    average = totals.sum() / len(class_ids)
    pooled = tf.sum(axis=0)
    idf = np.zeros_like(pooled)
    nonzero = pooled > 0
    idf[nonzero] = np.log(1.0 + average / pooled[nonzero])
    return tf * idf[np.newaxis, :], class_ids


def top_words(
    weights: np.ndarray,
    vocab: Vocabulary,
    n_words: int,
    assignments: np.ndarray,
    method: str = "bertopic",
    config_fingerprint: str = "",
    class_ids: list[int] | None = None,
) -> TopicModel:
    """TopicModel with each class's n_words highest-weight terms."""
    if n_words < 1:
        raise ModelError(f"n_words must be >= 1, got {n_words}")
    if class_ids is None:
        class_ids = list(range(weights.shape[0]))
    topics = tuple(
        (class_ids[row], tuple(rank_terms(weights[row], vocab.terms, n_words)))
        for row in range(weights.shape[0])
    )
    return TopicModel(
        topics=topics,
        assignments=np.asarray(assignments, dtype=np.int64),
        method=method,
        config_fingerprint=config_fingerprint,
    )


def intertopic_map(
    weights: np.ndarray,
    sizes: dict[int, int],
    seed: int,
    top_words_per_topic: list[list[str]] | None = None,
    class_ids: list[int] | None = None,
) -> IntertopicMap:
    """2-D layout of per-class weight vectors, centered at the size-weighted
    centroid. PCA for <= 10 classes (deterministic), otherwise the SGD
    reduction with n_neighbors = min(5, C-1)."""
    n_classes = weights.shape[0]
    if n_classes < 1:
        raise ModelError("intertopic map needs at least one class")
    if class_ids is None:
        class_ids = list(range(n_classes))
    if top_words_per_topic is None:
        top_words_per_topic = [[] for _ in range(n_classes)]
    if n_classes == 1:
        coords = np.zeros((1, 2))
    elif n_classes <= 10:
        # PCA rank is capped by C-1; pad the second axis when degenerate
        n_comp = min(2, n_classes - 1)
        reduced = reduce_mod.pca(weights, n_comp)
        coords = np.zeros((n_classes, 2))
        coords[:, :n_comp] = reduced
    else:
        cfg = reduce_mod.ReduceConfig(
            n_neighbors=min(5, n_classes - 1),
            n_components=2,
            seed=seed,
            method="umap",
        )
        coords = reduce_mod.fit(weights, cfg)
    size_arr = np.array([sizes.get(c, 0) for c in class_ids], dtype=np.float64)
    total = size_arr.sum()
    if total > 0:
        coords = coords - (size_arr[:, None] * coords).sum(axis=0) / total
    else:
        coords = coords - coords.mean(axis=0)
    records = tuple(
        (class_ids[i], float(coords[i, 0]), float(coords[i, 1]),
         int(size_arr[i]), list(top_words_per_topic[i]))
        for i in range(n_classes)
    )
    return IntertopicMap(records=records)


def _f9(x: float) -> float:
    """Round to 9 significant digits for byte-stable, lossless JSON."""
    return float(f"{x:.9g}")


def save_topics(model: TopicModel, path: str | Path) -> None:
    """Topic table export: [{"topic", "size", "words": [{"w", "s"}...]}, ...]."""
    sizes = model.sizes()
    payload = [
        {
            "topic": tid,
            "size": sizes.get(tid, 0),
            "words": [{"w": w, "s": _f9(s)} for w, s in words],
        }
        for tid, words in model.topics
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False)
        fh.write("\n")


def load_topics(path: str | Path):
    """Inverse of save_topics: [(topic_id, [(word, weight)...], size), ...]."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return [
        (entry["topic"], [(w["w"], w["s"]) for w in entry["words"]], entry["size"])
        for entry in payload
    ]


def save_assignments(model: TopicModel, path: str | Path) -> None:
    payload = {"method": model.method, "assignments": [int(a) for a in model.assignments]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False)
        fh.write("\n")


def load_assignments(path: str | Path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return np.array(payload["assignments"], dtype=np.int64)


def save_map(m: IntertopicMap, path: str | Path) -> None:
    """Plot-ready export: [{"topic", "x", "y", "size", "words"}, ...]."""
    payload = [
        {"topic": tid, "x": _f9(x), "y": _f9(y), "size": size, "words": words}
        for tid, x, y, size, words in m.records
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False)
        fh.write("\n")
