"""Service configuration: defaults, then a JSON config file, then flags."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

from .models import LexicalOverlapModel, TransformersNliModel

LEXICAL_MODEL = "lexical-overlap"


@dataclass
class SidecarConfig:
    # "lexical-overlap" or a sequence-classification checkpoint
    # (hub name or local directory) with named three-way NLI labels.
    model: str = LEXICAL_MODEL
    max_seq_len: int = 512
    batch_size: int = 64
    # requests with more pairs than this are refused with HTTP 413
    max_request_pairs: int = 1024
    host: str = "127.0.0.1"
    port: int = 8472

    def __post_init__(self) -> None:
        if not self.model:
            raise ValueError("model must be non-empty")
        if self.max_seq_len < 8:
            raise ValueError("max_seq_len must be at least 8")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_request_pairs < 1:
            raise ValueError("max_request_pairs must be >= 1")
        if not (0 <= self.port <= 65535):
            raise ValueError(f"port {self.port} out of range")


def load_config(path: str | Path | None, overrides: dict | None = None) -> SidecarConfig:
    """Merge defaults, an optional JSON file, and explicit overrides.

    Unknown keys in the file are an error: a typo silently falling back to
    a default is worse than failing at startup. Overrides with value None
    are treated as "not given".
    """
    known = {f.name for f in fields(SidecarConfig)}
    merged: dict = {}
    if path is not None:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ValueError(f"config file {path} must hold a JSON object")
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        merged.update(raw)
    for key, value in (overrides or {}).items():
        if key not in known:
            raise ValueError(f"unknown config key: {key}")
        if value is not None:
            merged[key] = value
    return SidecarConfig(**merged)


def make_model(config: SidecarConfig):
    if config.model == LEXICAL_MODEL:
        return LexicalOverlapModel()
    return TransformersNliModel(config.model, max_seq_len=config.max_seq_len,
                                batch_size=config.batch_size)
