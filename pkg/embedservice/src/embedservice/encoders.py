"""Encoder backends.

The hash n-gram encoder is fully deterministic and needs no model
weights, so it works in offline environments and test fixtures. The
transformers / sentence-transformers backends load real checkpoints
lazily and serialize inference behind a lock.
"""

from __future__ import annotations

import hashlib
import re
import threading
from pathlib import Path

import numpy as np

_WORD_RE = re.compile(r"[a-z]+")


def _load_domain_terms(name: str) -> frozenset[str]:
    path = Path(__file__).parent / "data" / f"{name}_terms.txt"
    if not path.exists():
        raise ValueError(f"unknown domain term list {name!r}")
    return frozenset(
        line.strip().lower() for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    )


class HashNgramEncoder:
    """Signed feature hashing of words and character n-grams, L2-normalized.

    Deterministic across processes (keyed blake2b, not Python's hash).
    domain_terms words contribute with a boosted weight, which biases
    similarity toward domain vocabulary overlap.
    """

    def __init__(self, dim: int = 256, char_ngrams=(3, 4), use_words: bool = True,
                 domain_terms: str | None = None, domain_boost: float = 3.0,
                 seed: int = 1234):
        if dim < 2:
            raise ValueError(f"dim must be >= 2, got {dim}")
        self.dim = int(dim)
        self.char_ngrams = tuple(char_ngrams)
        self.use_words = use_words
        self.domain = _load_domain_terms(domain_terms) if domain_terms else frozenset()
        self.domain_boost = domain_boost
        self._salt = f"hash-ngram-{seed}".encode("utf-8")

    def _slot(self, feature: str) -> tuple[int, float]:
        digest = hashlib.blake2b(
            feature.encode("utf-8"), digest_size=8, salt=self._salt[:16]
        ).digest()
        value = int.from_bytes(digest, "big")
        sign = 1.0 if value & 1 else -1.0
        return (value >> 1) % self.dim, sign

    def _features(self, text: str):
        words = _WORD_RE.findall(text.lower())
        if self.use_words:
            for w in words:
                weight = self.domain_boost if w in self.domain else 1.0
                yield "w:" + w, weight
        joined = " ".join(words)
        for n in self.char_ngrams:
            for i in range(len(joined) - n + 1):
                yield f"c{n}:" + joined[i : i + n], 0.5

    def encode(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            for feature, weight in self._features(text):
                idx, sign = self._slot(feature)
                out[row, idx] += sign * weight
            norm = np.linalg.norm(out[row])
            if norm > 0:
                out[row] /= norm
        return out


class TransformersMeanPoolEncoder:
    """AutoModel encoder with attention-masked mean pooling over tokens
    (for checkpoints without a sentence head). Inference is serialized."""

    def __init__(self, checkpoint: str, max_length: int = 256, device: str = "cpu"):
        import torch
        from transformers import AutoModel, AutoTokenizer

        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(checkpoint)
        self.model = AutoModel.from_pretrained(checkpoint).to(device).eval()
        self.max_length = max_length
        self.device = device
        self._lock = threading.Lock()

    def encode(self, texts: list[str]) -> np.ndarray:
        torch = self._torch
        with self._lock, torch.no_grad():
            batch = self.tokenizer(
                texts, padding=True, truncation=True,
                max_length=self.max_length, return_tensors="pt",
            ).to(self.device)
            hidden = self.model(**batch).last_hidden_state
            mask = batch["attention_mask"].unsqueeze(-1).to(hidden.dtype)
            pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1e-9)
            return pooled.cpu().numpy().astype(np.float64)


class SentenceTransformersEncoder:
    """sentence-transformers checkpoint with its native pooling head."""

    def __init__(self, checkpoint: str, device: str = "cpu"):
        from sentence_transformers import SentenceTransformer

        self.model = SentenceTransformer(checkpoint, device=device)
        self._lock = threading.Lock()

    def encode(self, texts: list[str]) -> np.ndarray:
        with self._lock:
            return np.asarray(
                self.model.encode(texts, show_progress_bar=False), dtype=np.float64
            )


def build_encoder(spec: dict):
    kind = spec.get("kind")
    if kind == "hash":
        return HashNgramEncoder(
            dim=spec.get("dim", 256),
            char_ngrams=tuple(spec.get("char_ngrams", (3, 4))),
            use_words=spec.get("use_words", True),
            domain_terms=spec.get("domain_terms"),
            domain_boost=spec.get("domain_boost", 3.0),
            seed=spec.get("seed", 1234),
        )
    if kind == "transformers":
        return TransformersMeanPoolEncoder(
            checkpoint=spec["checkpoint"],
            max_length=spec.get("max_length", 256),
            device=spec.get("device", "cpu"),
        )
    if kind == "sentence_transformers":
        return SentenceTransformersEncoder(
            checkpoint=spec["checkpoint"], device=spec.get("device", "cpu")
        )
    raise ValueError(f"unknown encoder kind {kind!r}")
