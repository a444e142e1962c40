import numpy as np
import pytest

from topicbench import kernels
from topicbench.corpus import Corpus, Document, Provenance


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the jitted kernels once so timed tests measure steady state."""
    kernels.warmup()


def make_corpus(token_lists, raw_texts=None):
    """Corpus from plain token lists; raw text defaults to the joined tokens."""
    docs = []
    for i, tokens in enumerate(token_lists):
        raw = raw_texts[i] if raw_texts is not None else " ".join(tokens)
        docs.append(Document(id=str(i), raw_text=raw or "-", tokens=tuple(tokens)))
    return Corpus(documents=tuple(docs), provenance=Provenance("test", "fixture"))


def random_token_corpus(rng, n_docs, vocab, min_len=3, max_len=12):
    token_lists = []
    for _ in range(n_docs):
        length = int(rng.integers(min_len, max_len + 1))
        token_lists.append([vocab[i] for i in rng.integers(0, len(vocab), length)])
    return make_corpus(token_lists)


def blob_points(rng, centers, n_per, scale=1.0):
    """Gaussian blobs with planted labels."""
    points = []
    labels = []
    for label, center in enumerate(centers):
        pts = rng.normal(0.0, scale, (n_per, len(center))) + np.asarray(center)
        points.append(pts)
        labels.extend([label] * n_per)
    return np.vstack(points), np.array(labels)
