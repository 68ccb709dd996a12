"""HTTP sidecar serving three-way NLI probabilities for entailment scorers."""

from .config import LEXICAL_MODEL, SidecarConfig, load_config, make_model
from .models import (LexicalOverlapModel, TransformersNliModel, label_indices,
                     softmax)
from .server import NliService, make_server, parse_pairs

__version__ = "0.1.0"

__all__ = [
    "LEXICAL_MODEL", "LexicalOverlapModel", "NliService", "SidecarConfig",
    "TransformersNliModel", "label_indices", "load_config", "make_model",
    "make_server", "parse_pairs", "softmax",
]
