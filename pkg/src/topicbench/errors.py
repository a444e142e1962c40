"""Exception types shared across the pipeline."""


class TopicbenchError(Exception):
    """Base class for all errors raised by this package."""


class IngestError(TopicbenchError):
    """CSV ingestion failed (missing file, missing column, malformed quoting)."""


class VectorizeError(TopicbenchError):
    """Vocabulary or matrix construction failed."""


class ModelError(TopicbenchError):
    """Model fitting or inference was called with an invalid state or config."""


class EmbeddingError(TopicbenchError):
    """Embedding file or service produced unusable vectors."""


class ConfigError(TopicbenchError):
    """Run configuration is invalid."""
