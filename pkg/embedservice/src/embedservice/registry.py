"""Model registry: a name -> encoder-spec mapping loaded from a JSON file,
with lazy construction (each encoder is built at most once)."""

from __future__ import annotations

import json
import threading
from pathlib import Path

from .encoders import build_encoder

DEFAULT_MAX_BATCH = 256


class UnknownModel(KeyError):
    pass


class ModelRegistry:
    def __init__(self, specs: dict, max_batch: int = DEFAULT_MAX_BATCH):
        if not specs:
            raise ValueError("registry has no models")
        self._specs = dict(specs)
        self.max_batch = int(max_batch)
        self._handles: dict = {}
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path) -> "ModelRegistry":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        return cls(
            specs=payload["models"],
            max_batch=payload.get("max_batch", DEFAULT_MAX_BATCH),
        )

    def names(self) -> list[str]:
        return sorted(self._specs)

    def get(self, name: str):
        if name not in self._specs:
            raise UnknownModel(name)
        with self._lock:
            if name not in self._handles:
                self._handles[name] = build_encoder(self._specs[name])
            return self._handles[name]
