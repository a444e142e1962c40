"""topicbench: fit and compare LSA, LDA, and embedding-cluster topic models."""

__version__ = "0.1.0"

from .corpus import Corpus, Document, IngestOptions, load_csv, normalize, tokenize
from .topics import IntertopicMap, TopicModel
from .vectorize import DocTermMatrix, Vocabulary

__all__ = [
    "Corpus",
    "Document",
    "DocTermMatrix",
    "IngestOptions",
    "IntertopicMap",
    "TopicModel",
    "Vocabulary",
    "load_csv",
    "normalize",
    "tokenize",
    "__version__",
]
