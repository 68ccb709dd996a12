"""Synthetic corpora with known structure.

Each generated record gets its own vocabulary, so under the lexical-overlap
mock backend a summary copied from its own document scores exactly 1.0 per
sentence while a summary lifted from a different record scores strictly
below 1.0 — the corpus is linearly separable by construction, which makes
it useful for end-to-end training and benchmark tests that must converge
quickly and deterministically.
"""

from __future__ import annotations

import numpy as np

from .datasets import Sample, Split
from .train import TrainSample

_TEMPLATES = (
    "Entry {k} of record {i} mentions item{i}x{k} clearly.",
    "Record {i} files item{i}x{k} under heading {k}.",
    "The audit for record {i} flagged item{i}x{k} twice.",
    "Reviewers confirmed that record {i} kept item{i}x{k} intact.",
)


def record_sentences(i: int, n_sentences: int) -> list[str]:
    """The deterministic sentences making up record i's document."""
    return [
        _TEMPLATES[k % len(_TEMPLATES)].format(i=i, k=k)
        for k in range(n_sentences)
    ]


def make_separable_samples(
    n: int,
    *,
    seed: int = 0,
    dataset: str = "synthetic",
    doc_sentences: int = 8,
    summary_sentences: int = 2,
) -> list[Sample]:
    """n labelled samples, half consistent, split by index parity.

    Consistent summaries copy sentences from their own document;
    inconsistent ones copy sentences from the next record. Labels
    alternate within each split so both splits carry both classes
    (requires n >= 4).
    """
    if n < 4:
        raise ValueError("need at least 4 samples for both classes in both splits")
    rng = np.random.default_rng(seed)
    samples = []
    for i in range(n):
        own = record_sentences(i, doc_sentences)
        label = (i // 2) % 2
        source = own if label == 1 else record_sentences((i + 1) % n, doc_sentences)
        picks = rng.choice(len(source), size=summary_sentences,
                           replace=summary_sentences > len(source))
        samples.append(Sample(
            id=f"syn{i}",
            dataset=dataset,
            split=Split.VALIDATION if i % 2 == 0 else Split.TEST,
            document=" ".join(own),
            summary=" ".join(source[k] for k in picks),
            label=label,
        ))
    return samples


def as_train_samples(samples: list[Sample]) -> list[TrainSample]:
    return [
        TrainSample(id=s.id, document=s.document, summary=s.summary, label=s.label)
        for s in samples
    ]


def make_throughput_pairs(
    n_docs: int,
    *,
    seed: int = 0,
    doc_sentences: int = 60,
    summary_sentences: int = 5,
) -> list[tuple[str, str]]:
    """(document, summary) pairs with per-document vocabulary.

    Long documents make backend scoring the dominant cost, which is what a
    throughput measurement should expose (and what a warm cache should
    remove)."""
    rng = np.random.default_rng(seed)
    pairs = []
    for i in range(n_docs):
        own = record_sentences(i, doc_sentences)
        picks = rng.choice(len(own), size=summary_sentences, replace=False)
        pairs.append((" ".join(own), " ".join(own[k] for k in picks)))
    return pairs
