"""Inference models behind the /nli endpoint.

Two implementations share the same duck type (``name``, ``load()``,
``predict(pairs)``):

* LexicalOverlapModel - dependency-free token-overlap formula. It mirrors
  the deterministic mock used by scoring clients, so a client developed
  against its own mock sees identical numbers when pointed at a sidecar
  running this model.
* TransformersNliModel - wraps a pretrained three-way sequence
  classification checkpoint (loaded lazily, heavy imports deferred).
"""

from __future__ import annotations

import math
import re
from typing import Sequence

Pair = tuple[str, str]
Triple = tuple[float, float, float]

_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)


class LexicalOverlapModel:
    """Deterministic stand-in model: entailment is the fraction of the
    hypothesis's unique lowercase alphanumeric tokens found in the premise;
    the remainder is split 1:9 between contradiction and neutral."""

    name = "lexical-overlap"

    def load(self) -> None:
        pass  # nothing to load

    def predict(self, pairs: Sequence[Pair]) -> list[Triple]:
        return [self._one(premise, hypothesis) for premise, hypothesis in pairs]

    @staticmethod
    def _one(premise: str, hypothesis: str) -> Triple:
        hyp = set(_TOKEN.findall(hypothesis.lower()))
        if not hyp:
            # no scoreable content: nothing is supported
            return (0.0, 0.1, 0.9)
        prem = set(_TOKEN.findall(premise.lower()))
        r = len(hyp & prem) / len(hyp)
        return (r, 0.1 * (1.0 - r), 0.9 * (1.0 - r))


def softmax(logits: Sequence[float]) -> list[float]:
    """Shift-stable softmax over a plain sequence."""
    m = max(logits)
    exps = [math.exp(v - m) for v in logits]
    total = sum(exps)
    return [v / total for v in exps]


def label_indices(id2label: dict[int, str]) -> tuple[int, int, int]:
    """Class indices for (entailment, contradiction, neutral) in a
    checkpoint's output order.

    Checkpoints disagree on class order (some put entailment first, some
    last), and silently guessing would swap entailment and contradiction
    for half of them. The mapping is therefore derived from the label
    *names* the checkpoint declares, and anything unrecognized is an error
    rather than a guess.
    """
    slots: dict[str, int] = {}
    for idx, raw in id2label.items():
        name = str(raw).strip().upper()
        if name.startswith("ENTAIL"):
            slot = "e"
        elif name.startswith("CONTRA"):
            slot = "c"
        elif name.startswith("NEUTRAL"):
            slot = "n"
        else:
            raise ValueError(
                f"cannot map checkpoint label {raw!r} to entailment/"
                "contradiction/neutral; use a checkpoint with named NLI labels"
            )
        if slot in slots:
            raise ValueError(f"checkpoint declares {raw!r} twice")
        slots[slot] = int(idx)
    if sorted(slots) != ["c", "e", "n"]:
        raise ValueError(
            f"checkpoint labels {sorted(id2label.values())} do not cover "
            "entailment, contradiction and neutral"
        )
    return slots["e"], slots["c"], slots["n"]


class TransformersNliModel:
    """Pretrained three-way NLI checkpoint behind the common interface.

    Construction is cheap; ``load()`` performs the heavy imports and weight
    loading so a server can answer health probes (ready=false) meanwhile.

    Truncation policy: pairs longer than ``max_seq_len`` are cut from the
    premise side only (``truncation="only_first"``). Sentence-level inputs
    essentially never truncate; for whole-document premises this drops
    trailing document text rather than the claim under test.
    """

    def __init__(self, checkpoint: str, *, max_seq_len: int = 512,
                 batch_size: int = 64) -> None:
        if max_seq_len < 8:
            raise ValueError("max_seq_len must be at least 8")
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self.name = checkpoint
        self.max_seq_len = max_seq_len
        self.batch_size = batch_size
        self._tokenizer = None
        self._model = None
        self._order: tuple[int, int, int] | None = None

    def load(self) -> None:
        import torch  # noqa: F401  (predict needs it; fail here, not mid-request)
        from transformers import (AutoModelForSequenceClassification,
                                  AutoTokenizer)

        self._tokenizer = AutoTokenizer.from_pretrained(self.name)
        self._model = AutoModelForSequenceClassification.from_pretrained(self.name)
        self._model.eval()
        id2label = {int(k): v for k, v in self._model.config.id2label.items()}
        self._order = label_indices(id2label)

    def predict(self, pairs: Sequence[Pair]) -> list[Triple]:
        import torch

        if self._model is None or self._tokenizer is None or self._order is None:
            raise RuntimeError("model not loaded; call load() first")
        e_i, c_i, n_i = self._order
        out: list[Triple] = []
        for start in range(0, len(pairs), self.batch_size):
            chunk = pairs[start:start + self.batch_size]
            encoded = self._tokenizer(
                [p for p, _ in chunk],
                [h for _, h in chunk],
                truncation="only_first",
                max_length=self.max_seq_len,
                padding=True,
                return_tensors="pt",
            )
            with torch.no_grad():
                logits = self._model(**encoded).logits
            probs = torch.softmax(logits, dim=-1).tolist()
            out.extend((row[e_i], row[c_i], row[n_i]) for row in probs)
        return out
