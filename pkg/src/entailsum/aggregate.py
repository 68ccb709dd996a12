"""Turning a pair matrix into a single consistency score.

Two scorers:

* zs_score    - parameter-free: reduce over document blocks per summary
                block (op1, default max), then over summary blocks
                (op2, default mean).
* conv_score  - learned: bin each summary block's column of scores into a
                fixed histogram, apply a linear layer plus sigmoid per
                block, average the per-block probabilities.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ModelShapeMismatch, OutOfRangeScore
from .matrix import CategorySet, PairMatrix

_OPS: dict[str, Callable[[np.ndarray], float]] = {
    "min": np.min,
    "mean": np.mean,
    "max": np.max,
}

OP_NAMES = tuple(sorted(_OPS))


def _resolve_op(name: str) -> Callable[[np.ndarray], float]:
    try:
        return _OPS[name]
    except KeyError:
        raise ValueError(f"unknown reduction op {name!r}; choose from {OP_NAMES}") from None


@dataclass(frozen=True)
class ZsConfig:
    """Configuration for the parameter-free scorer."""

    op1: str = "max"   # reduction over document blocks, per summary block
    op2: str = "mean"  # reduction over summary blocks
    cats: CategorySet = field(default_factory=CategorySet)

    def __post_init__(self) -> None:
        _resolve_op(self.op1)
        _resolve_op(self.op2)


@dataclass(frozen=True)
class ScoreBreakdown:
    """Final score plus per-summary-block detail."""

    final: float
    per_sentence: tuple[float, ...]
    # index of the document block that achieved each column's max, when the
    # reduction was max; None otherwise
    support: tuple[int, ...] | None = None
    # diagnostic per-category finals when several categories are included
    extras: dict[str, float] = field(default_factory=dict)


def zs_score(matrix: PairMatrix, config: ZsConfig | None = None) -> ScoreBreakdown:
    """Reduce the pair matrix with op1 over rows then op2 over columns.

    With several included categories, the first in E, N, C order drives the
    score and the rest are reported in extras.
    """
    config = config or ZsConfig()
    op1 = _resolve_op(config.op1)
    op2 = _resolve_op(config.op2)
    names = config.cats.names
    primary = names[0]

    per_cat: dict[str, np.ndarray] = {}
    for name in names:
        grid = matrix.category(name)  # (m, n)
        per_cat[name] = np.array([op1(grid[:, j]) for j in range(matrix.n)])

    per_sentence = per_cat[primary]
    support: tuple[int, ...] | None = None
    if config.op1 == "max":
        grid = matrix.category(primary)
        support = tuple(int(np.argmax(grid[:, j])) for j in range(matrix.n))

    extras = {name: float(op2(per_cat[name])) for name in names[1:]}
    return ScoreBreakdown(
        final=float(op2(per_sentence)),
        per_sentence=tuple(float(v) for v in per_sentence),
        support=support,
        extras=extras,
    )


@dataclass(frozen=True)
class Histogram:
    """Fixed-width histogram of scores over [0, 1]."""

    counts: np.ndarray
    h: int
    normalized: bool = False

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=float)
        object.__setattr__(self, "counts", counts)
        if counts.shape != (self.h,):
            raise ValueError(f"expected {self.h} bins, got shape {counts.shape}")
        counts.setflags(write=False)

    def normalize(self, total: float) -> "Histogram":
        if total <= 0:
            raise ValueError("normalization total must be positive")
        return Histogram(self.counts / total, self.h, normalized=True)


def bin_scores(scores: np.ndarray, h: int) -> np.ndarray:
    """Bin indices for scores in [0, 1]: bin k covers [k/h, (k+1)/h), with
    the top bin closed so a score of exactly 1.0 lands in bin h-1."""
    if h < 2:
        raise ValueError(f"need at least 2 bins, got h={h}")
    scores = np.asarray(scores, dtype=float)
    if np.any(scores < 0.0) or np.any(scores > 1.0):
        bad = scores[(scores < 0.0) | (scores > 1.0)]
        raise OutOfRangeScore(f"scores outside [0, 1]: {bad[:5].tolist()}")
    return np.clip(np.floor(scores * h).astype(int), 0, h - 1)


def bin_column(scores: np.ndarray, h: int) -> Histogram:
    """Histogram one summary block's column of document scores."""
    idx = bin_scores(scores, h)
    counts = np.zeros(h, dtype=float)
    np.add.at(counts, idx, 1.0)
    return Histogram(counts, h)


def column_features(matrix: PairMatrix, h: int, cats: CategorySet,
                    normalize: bool = True) -> np.ndarray:
    """Per-summary-block feature vectors, shape (n, h * n_cats).

    Each block's features are its per-category histograms concatenated in
    E, N, C order; with normalize the counts are divided by the number of
    document blocks so documents of different lengths are comparable.
    """
    n = matrix.n
    names = cats.names
    feats = np.zeros((n, h * len(names)), dtype=float)
    for k, name in enumerate(names):
        grid = matrix.category(name)
        idx = bin_scores(grid, h)  # (m, n)
        for j in range(n):
            np.add.at(feats[j], k * h + idx[:, j], 1.0)
    if normalize:
        feats /= matrix.m
    return feats


@dataclass(frozen=True)
class ConvModel:
    """Linear-plus-sigmoid scorer over per-block histogram features."""

    weights: np.ndarray  # (h * n_cats,)
    bias: float
    h: int = 50
    cats: CategorySet = field(default_factory=CategorySet)
    normalize_histograms: bool = True

    def __post_init__(self) -> None:
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", weights)
        if self.h < 2:
            raise ModelShapeMismatch(f"need at least 2 bins, got h={self.h}")
        expected = self.h * len(self.cats.names)
        if weights.shape != (expected,):
            raise ModelShapeMismatch(
                f"weights shape {weights.shape} does not match "
                f"h={self.h} x {len(self.cats.names)} categories (= {expected})"
            )
        weights.setflags(write=False)

    def to_json_dict(self) -> dict:
        return {
            "format_version": 1,
            "h": self.h,
            "cats": list(self.cats.names),
            "normalize_histograms": self.normalize_histograms,
            "weights": self.weights.tolist(),
            "bias": self.bias,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2),
                              encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "ConvModel":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        version = raw.get("format_version")
        if version != 1:
            raise ModelShapeMismatch(f"unsupported model format_version {version!r}")
        try:
            return cls(
                weights=np.array(raw["weights"], dtype=float),
                bias=float(raw["bias"]),
                h=int(raw["h"]),
                cats=CategorySet.from_names(raw["cats"]),
                normalize_histograms=bool(raw["normalize_histograms"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelShapeMismatch(f"malformed model file {path}: {exc}") from exc


def sigmoid(x: np.ndarray | float) -> np.ndarray | float:
    """Numerically stable logistic function."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out if out.ndim else float(out)


def conv_features(matrix: PairMatrix, model: ConvModel) -> np.ndarray:
    return column_features(matrix, model.h, model.cats,
                           normalize=model.normalize_histograms)


def conv_score(matrix: PairMatrix, model: ConvModel) -> ScoreBreakdown:
    """Score each summary block with the learned layer, then average."""
    feats = conv_features(matrix, model)
    per_sentence = sigmoid(feats @ model.weights + model.bias)
    return ScoreBreakdown(
        final=float(np.mean(per_sentence)),
        per_sentence=tuple(float(v) for v in per_sentence),
    )
