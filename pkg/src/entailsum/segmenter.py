"""Rule-based segmentation of text into blocks.

Documents can be split at four granularities (full text, paragraph,
two-sentence, sentence); summaries only at full text or sentence. The
sentence splitter is deterministic: a boundary is a terminal punctuation
mark (. ! ?), optionally followed by closing quotes/brackets, followed by
whitespace and then an uppercase letter, digit, or opening quote. Periods
directly after a known abbreviation never end a sentence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import EmptyInput, UnsupportedGranularity


class Granularity(str, Enum):
    FULL = "full"
    PARAGRAPH = "paragraph"
    TWO_SENTENCE = "two_sentence"
    SENTENCE = "sentence"


class Side(str, Enum):
    DOCUMENT = "document"
    SUMMARY = "summary"


SUMMARY_GRANULARITIES = (Granularity.FULL, Granularity.SENTENCE)

# Version 1 of the abbreviation exception list. Compared case-insensitively
# against the whitespace-delimited token ending at the candidate period.
# Frozen: extending it changes sentence boundaries, so bump the version.
ABBREVIATIONS_V1 = frozenset({
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.",
    "vs.", "etc.", "e.g.", "i.e.", "cf.", "al.", "approx.", "dept.",
    "u.s.", "u.k.", "u.n.", "d.c.", "a.m.", "p.m.",
    "gen.", "sen.", "rep.", "gov.", "col.", "sgt.", "lt.", "capt.",
    "inc.", "ltd.", "co.", "corp.", "no.", "fig.",
    # months only: weekday forms (sat., wed., sun.) collide with common words
    "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.",
    "sep.", "sept.", "oct.", "nov.", "dec.",
})

_TERMINALS = ".!?"
_CLOSERS = "\"'”’)]»"
_OPENERS = "\"'“‘([«"

_CANDIDATE = re.compile(r"[.!?][%s]*" % re.escape(_CLOSERS))
_PARAGRAPH_BREAK = re.compile(r"\n[ \t\r\f\v]*\n+")


@dataclass(frozen=True)
class BlockList:
    """Ordered non-empty text blocks for one side of a (document, summary) pair."""

    blocks: tuple[str, ...]
    side: Side
    granularity: Granularity

    def __post_init__(self) -> None:
        if any(not b.strip() for b in self.blocks):
            raise EmptyInput("every block must be non-empty after trimming")

    def __len__(self) -> int:
        return len(self.blocks)


def _word_before(text: str, punct_pos: int) -> str:
    """Whitespace-delimited token ending at (and including) text[punct_pos]."""
    start = punct_pos
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start:punct_pos + 1].lstrip(_OPENERS)


def _is_boundary(text: str, match: re.Match) -> bool:
    punct = text[match.start()]
    if punct == "." and _word_before(text, match.start()).lower() in ABBREVIATIONS_V1:
        return False
    j = match.end()
    if j >= len(text) or not text[j].isspace():
        return False
    while j < len(text) and text[j].isspace():
        j += 1
    if j >= len(text):
        return True
    nxt = text[j]
    return nxt.isupper() or nxt.isdigit() or nxt in _OPENERS


def split_sentences(text: str) -> list[str]:
    """Split text into sentences at deterministic rule-based boundaries.

    Sentences cover the input in order; every non-whitespace character of
    the input appears in exactly one sentence.

    Raises EmptyInput for empty/whitespace-only text.
    """
    if not text or not text.strip():
        raise EmptyInput("cannot split empty text")
    sentences: list[str] = []
    start = 0
    for match in _CANDIDATE.finditer(text):
        if _is_boundary(text, match):
            piece = text[start:match.end()].strip()
            if piece:
                sentences.append(piece)
            start = match.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def split_blocks(text: str, granularity: Granularity, side: Side) -> BlockList:
    """Split text into a BlockList at the requested granularity.

    Summary-side text only supports FULL and SENTENCE; paragraph and
    two-sentence splits raise UnsupportedGranularity.
    """
    if not text or not text.strip():
        raise EmptyInput("cannot split empty text")
    if side is Side.SUMMARY and granularity not in SUMMARY_GRANULARITIES:
        raise UnsupportedGranularity(
            f"summary side does not support {granularity.value!r} granularity"
        )

    if granularity is Granularity.FULL:
        blocks = [text.strip()]
    elif granularity is Granularity.PARAGRAPH:
        blocks = [p.strip() for p in _PARAGRAPH_BREAK.split(text) if p.strip()]
    elif granularity is Granularity.SENTENCE:
        blocks = split_sentences(text)
    elif granularity is Granularity.TWO_SENTENCE:
        sentences = split_sentences(text)
        blocks = [" ".join(sentences[i:i + 2]) for i in range(0, len(sentences), 2)]
    else:  # pragma: no cover - exhaustive over the enum
        raise UnsupportedGranularity(str(granularity))

    return BlockList(blocks=tuple(blocks), side=side, granularity=granularity)
