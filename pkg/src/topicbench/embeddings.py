"""Document embedding providers: precomputed files and a remote service.

File format: one record per line, `id TAB dim TAB v1,v2,...,vdim`.
Service wire contract: POST {base}/embed with {"model": name,
"texts": [...]} returning {"model": name, "dim": d, "vectors": [[...]...]}.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import requests

from .corpus import Corpus
from .errors import EmbeddingError


@dataclass(frozen=True)
class EmbeddingMatrix:
    ids: tuple[str, ...]
    vectors: np.ndarray
    model_name: str


@dataclass(frozen=True)
class ProviderSpec:
    kind: str                   # "file" | "service"
    location: str               # path or base URL
    model_name: str = "default"
    batch_size: int = 64
    retries: int = 2
    backoff: float = 0.5        # seconds; doubled per retry
    timeout: float = 60.0

    def __post_init__(self):
        if self.kind not in ("file", "service"):
            raise EmbeddingError(f"provider kind must be file or service, got {self.kind!r}")
        if self.batch_size < 1:
            raise EmbeddingError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.retries < 0:
            raise EmbeddingError(f"retries must be >= 0, got {self.retries}")


def load_embeddings_file(path: str | Path, model_name: str = "file") -> EmbeddingMatrix:
    path = Path(path)
    if not path.exists():
        raise EmbeddingError(f"embeddings file not found: {path}")
    ids: list[str] = []
    rows: list[np.ndarray] = []
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise EmbeddingError(f"line {line_no}: expected `id<TAB>dim<TAB>values`")
            rec_id, rec_dim, values = parts
            vec = np.array([float(x) for x in values.split(",")], dtype=np.float64)
            if int(rec_dim) != vec.size:
                raise EmbeddingError(
                    f"record {rec_id!r}: declared dim {rec_dim} != {vec.size} values"
                )
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise EmbeddingError(
                    f"record {rec_id!r}: dimension {vec.size} != first record's {dim}"
                )
            if not np.all(np.isfinite(vec)):
                raise EmbeddingError(f"record {rec_id!r}: non-finite value")
            ids.append(rec_id)
            rows.append(vec)
    if not rows:
        raise EmbeddingError(f"embeddings file is empty: {path}")
    return EmbeddingMatrix(ids=tuple(ids), vectors=np.vstack(rows), model_name=model_name)


def save_embeddings_file(matrix: EmbeddingMatrix, path: str | Path) -> None:
    """Decimal round trip at 9 significant digits."""
    dim = matrix.vectors.shape[1]
    with open(path, "w", encoding="utf-8") as fh:
        for rec_id, vec in zip(matrix.ids, matrix.vectors):
            values = ",".join(f"{x:.9g}" for x in vec)
            fh.write(f"{rec_id}\t{dim}\t{values}\n")


def fetch_embeddings(corpus: Corpus, spec: ProviderSpec) -> EmbeddingMatrix:
    """POST document raw_text in batches, preserving request order.

    Each batch retries with exponential backoff up to spec.retries, so a
    persistently failing service errors after retries + 1 attempts.
    """
    if spec.kind != "service":
        raise EmbeddingError(f"fetch_embeddings needs a service provider, got {spec.kind!r}")
    url = spec.location.rstrip("/") + "/embed"
    texts = [doc.raw_text for doc in corpus.documents]
    vectors: list[list[float]] = []
    dim: int | None = None
    for start in range(0, len(texts), spec.batch_size):
        batch = texts[start : start + spec.batch_size]
        payload = _post_batch(url, spec, batch)
        got = payload.get("vectors", [])
        if len(got) != len(batch):
            raise EmbeddingError(
                f"service returned {len(got)} vectors for {len(batch)} texts"
            )
        batch_dim = int(payload.get("dim", len(got[0]) if got else 0))
        if dim is None:
            dim = batch_dim
        elif batch_dim != dim:
            raise EmbeddingError(
                f"service changed dimension across batches: {batch_dim} != {dim}"
            )
        vectors.extend(got)
    arr = np.asarray(vectors, dtype=np.float64)
    ids = tuple(doc.id for doc in corpus.documents)
    return EmbeddingMatrix(ids=ids, vectors=arr, model_name=spec.model_name)


def _post_batch(url: str, spec: ProviderSpec, batch: list[str]) -> dict:
    last_error: Exception | None = None
    for attempt in range(spec.retries + 1):
        try:
            response = requests.post(
                url,
                json={"model": spec.model_name, "texts": batch},
                timeout=spec.timeout,
            )
            if response.status_code == 200:
                return response.json()
            last_error = EmbeddingError(
                f"embedding service returned status {response.status_code}: "
                f"{response.text[:200]}"
            )
        except requests.RequestException as exc:
            last_error = EmbeddingError(f"embedding service unreachable: {exc}")
        if attempt < spec.retries:
            time.sleep(spec.backoff * (2 ** attempt))
    raise EmbeddingError(
        f"embedding request failed after {spec.retries + 1} attempts: {last_error}"
    )


def validate(matrix: EmbeddingMatrix, corpus: Corpus) -> EmbeddingMatrix:
    """Check id alignment, cardinality, dimension, and finiteness."""
    if len(matrix.ids) != len(corpus):
        raise EmbeddingError(
            f"embedding rows ({len(matrix.ids)}) != corpus documents ({len(corpus)})"
        )
    for i, (rec_id, doc) in enumerate(zip(matrix.ids, corpus.documents)):
        if rec_id != doc.id:
            raise EmbeddingError(
                f"id misalignment at row {i}: embedding {rec_id!r} vs document {doc.id!r}"
            )
    if matrix.vectors.ndim != 2 or matrix.vectors.shape[1] < 2:
        raise EmbeddingError("embedding vectors must be n x d with d >= 2")
    bad = ~np.isfinite(matrix.vectors)
    if np.any(bad):
        row = int(np.nonzero(bad.any(axis=1))[0][0])
        raise EmbeddingError(f"non-finite embedding for document {matrix.ids[row]!r}")
    return matrix


def get_embeddings(corpus: Corpus, spec: ProviderSpec) -> EmbeddingMatrix:
    """Dispatch on provider kind and validate against the corpus."""
    if spec.kind == "file":
        matrix = load_embeddings_file(spec.location, model_name=spec.model_name)
    else:
        matrix = fetch_embeddings(corpus, spec)
    return validate(matrix, corpus)
