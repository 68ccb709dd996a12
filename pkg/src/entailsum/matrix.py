"""Pair matrix construction and caching.

A PairMatrix holds the scored cross product of document blocks (rows) and
summary blocks (columns). Internally the scores live in an (m, n, 3) float
array whose last axis is (e, c, n); user-facing category views are ordered
E, N, C.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .backends import BackendId, NliProbs
from .errors import DimensionZero
from .segmenter import BlockList, Granularity

# last-axis index of each category in PairMatrix.cells
_CHANNEL = {"E": 0, "C": 1, "N": 2}

# presentation order for views and feature vectors
CATEGORY_ORDER = ("E", "N", "C")


@dataclass(frozen=True)
class CategorySet:
    """Which probability categories participate in scoring."""

    include_e: bool = True
    include_n: bool = False
    include_c: bool = False

    def __post_init__(self) -> None:
        if not (self.include_e or self.include_n or self.include_c):
            raise ValueError("at least one category must be included")

    @property
    def names(self) -> tuple[str, ...]:
        """Included category names in E, N, C order."""
        flags = {"E": self.include_e, "N": self.include_n, "C": self.include_c}
        return tuple(c for c in CATEGORY_ORDER if flags[c])

    @classmethod
    def from_names(cls, names) -> "CategorySet":
        wanted = set(names)
        unknown = wanted - set(CATEGORY_ORDER)
        if unknown:
            raise ValueError(f"unknown categories: {sorted(unknown)}")
        return cls(include_e="E" in wanted, include_n="N" in wanted,
                   include_c="C" in wanted)


@dataclass(frozen=True)
class PairMatrix:
    """Scores for every (document block, summary block) pair."""

    cells: np.ndarray  # (m, n, 3), last axis (e, c, n)
    doc_granularity: Granularity
    sum_granularity: Granularity
    backend: BackendId
    doc_blocks: tuple[str, ...] = field(default=(), compare=False)
    sum_blocks: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        cells = np.asarray(self.cells, dtype=float)
        object.__setattr__(self, "cells", cells)
        if cells.ndim != 3 or cells.shape[2] != 3:
            raise ValueError(f"cells must be (m, n, 3), got {cells.shape}")
        if cells.shape[0] == 0 or cells.shape[1] == 0:
            raise DimensionZero(f"pair matrix has shape {cells.shape[:2]}")
        cells.setflags(write=False)

    @property
    def m(self) -> int:
        return self.cells.shape[0]

    @property
    def n(self) -> int:
        return self.cells.shape[1]

    def cell(self, i: int, j: int) -> NliProbs:
        e, c, n = self.cells[i, j]
        return NliProbs(e=float(e), c=float(c), n=float(n))

    def category(self, name: str) -> np.ndarray:
        """The (m, n) slice for one category ('E', 'N', or 'C')."""
        try:
            return self.cells[:, :, _CHANNEL[name]]
        except KeyError:
            raise ValueError(f"unknown category {name!r}") from None


def select_category_view(matrix: PairMatrix, cats: CategorySet) -> list[np.ndarray]:
    """Per-category (m, n) arrays for the included categories, in E, N, C order."""
    return [matrix.category(name) for name in cats.names]


def build_pair_matrix(doc: BlockList, summary: BlockList, backend) -> PairMatrix:
    """Score the full cross product of document and summary blocks.

    Pairs are submitted row-major: all summary blocks against document
    block 0, then against block 1, and so on.
    """
    pairs = [(p, h) for p in doc.blocks for h in summary.blocks]
    probs = backend.score_pairs(pairs)
    if len(probs) != len(pairs):
        raise ValueError(
            f"backend returned {len(probs)} scores for {len(pairs)} pairs"
        )
    m, n = len(doc.blocks), len(summary.blocks)
    cells = np.array([p.as_tuple() for p in probs], dtype=float).reshape(m, n, 3)
    return PairMatrix(
        cells=cells,
        doc_granularity=doc.granularity,
        sum_granularity=summary.granularity,
        backend=backend.backend_id,
        doc_blocks=doc.blocks,
        sum_blocks=summary.blocks,
    )


def cache_key(doc_text: str, summary_text: str, doc_gran: Granularity,
              sum_gran: Granularity, backend: BackendId) -> str:
    """Content hash identifying one scored matrix.

    Any change to either text, either granularity, or the backend identity
    yields a different key; the hash is over a canonical JSON encoding so
    the key is stable across processes and platforms.
    """
    payload = json.dumps(
        ["v1", doc_text, summary_text, doc_gran.value, sum_gran.value,
         backend.name, backend.version],
        ensure_ascii=False, separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class MatrixCache:
    """One-file-per-matrix JSON cache with atomic writes.

    Floats survive the round trip bitwise because json serializes them via
    repr, which Python guarantees to round-trip.
    """

    def __init__(self, cache_dir: str | Path) -> None:
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0

    def _path(self, key: str) -> Path:
        return self.cache_dir / f"{key}.json"

    def get(self, key: str) -> PairMatrix | None:
        path = self._path(key)
        if not path.exists():
            self.misses += 1
            return None
        raw = json.loads(path.read_text(encoding="utf-8"))
        cells = np.array(raw["cells"], dtype=float)
        if cells.shape != (raw["m"], raw["n"], 3):
            raise ValueError(
                f"cache file {path} cells shape {cells.shape} does not match "
                f"recorded m={raw['m']}, n={raw['n']}"
            )
        self.hits += 1
        return PairMatrix(
            cells=cells,
            doc_granularity=Granularity(raw["doc_granularity"]),
            sum_granularity=Granularity(raw["sum_granularity"]),
            backend=BackendId(raw["backend"]["name"], raw["backend"]["version"]),
        )

    def put(self, key: str, matrix: PairMatrix) -> None:
        payload = {
            "key": key,
            "m": matrix.m,
            "n": matrix.n,
            "doc_granularity": matrix.doc_granularity.value,
            "sum_granularity": matrix.sum_granularity.value,
            "backend": {"name": matrix.backend.name, "version": matrix.backend.version},
            "cells": matrix.cells.tolist(),
        }
        path = self._path(key)
        fd, tmp = tempfile.mkstemp(dir=self.cache_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                json.dump(payload, f)
            os.replace(tmp, path)  # atomic on POSIX: readers see old or new, never partial
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise


def pair_matrix_for_texts(
    doc_text: str,
    summary_text: str,
    doc_gran: Granularity,
    sum_gran: Granularity,
    backend,
    cache: MatrixCache | None = None,
) -> PairMatrix:
    """Split both texts, score the cross product, optionally via the cache."""
    from .segmenter import Side, split_blocks

    if cache is not None:
        key = cache_key(doc_text, summary_text, doc_gran, sum_gran, backend.backend_id)
        cached = cache.get(key)
        if cached is not None:
            return cached
    doc = split_blocks(doc_text, doc_gran, Side.DOCUMENT)
    summary = split_blocks(summary_text, sum_gran, Side.SUMMARY)
    matrix = build_pair_matrix(doc, summary, backend)
    if cache is not None:
        cache.put(key, matrix)
    return matrix
