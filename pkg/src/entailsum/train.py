"""Training for the learned histogram scorer.

The model is a single affine layer plus sigmoid applied per summary block,
averaged into one probability per (document, summary) pair. The loss is
binary cross-entropy on that averaged probability; its gradient is derived
analytically below and optimized with a self-contained Adam loop, so
training is deterministic given a seed and needs no autograd framework.

For one example with block features F (n_s rows), p = sigmoid(F w + b),
f = mean(p):

    dL/dw = (f - y) / (f (1 - f)) * (1/n_s) * F^T (p * (1 - p))
    dL/db = (f - y) / (f (1 - f)) * (1/n_s) * sum(p * (1 - p))

and the batch gradient is the mean over examples.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .aggregate import ConvModel, column_features, sigmoid
from .errors import DegenerateLabels
from .matrix import CategorySet, MatrixCache, pair_matrix_for_texts
from .metrics import balanced_accuracy, select_threshold
from .segmenter import Granularity

logger = logging.getLogger(__name__)

_CLAMP = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    learning_rate: float = 1e-2
    max_epochs: int = 10
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    subsample_size: int = 10_000
    patience: int = 3
    early_stop_metric: str = "balanced_accuracy"
    h: int = 50
    cats: CategorySet = field(default_factory=CategorySet)
    normalize_histograms: bool = True

    def __post_init__(self) -> None:
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1:
            raise ValueError("batch_size, max_epochs and patience must be >= 1")
        if self.subsample_size < 2:
            raise ValueError("subsample_size must be >= 2")
        if self.early_stop_metric != "balanced_accuracy":
            raise ValueError(
                f"unsupported early_stop_metric {self.early_stop_metric!r}"
            )


@dataclass(frozen=True)
class TrainExample:
    """Featurized sample: one row of histogram features per summary block."""

    features: np.ndarray  # (n_s, d)
    label: int

    def __post_init__(self) -> None:
        feats = np.asarray(self.features, dtype=float)
        object.__setattr__(self, "features", feats)
        if feats.ndim != 2 or feats.shape[0] == 0:
            raise ValueError(f"features must be (n_s, d) with n_s >= 1, got {feats.shape}")
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    valid_bacc: float
    threshold: float


def example_final(weights: np.ndarray, bias: float, example: TrainExample) -> float:
    p = sigmoid(example.features @ weights + bias)
    return float(np.mean(p))


def bce_loss(final: float, label: int) -> float:
    f = min(max(final, _CLAMP), 1.0 - _CLAMP)
    return -(label * np.log(f) + (1 - label) * np.log(1.0 - f))


def loss_and_grad(
    weights: np.ndarray, bias: float, batch: Sequence[TrainExample]
) -> tuple[float, np.ndarray, float]:
    """Mean BCE over the batch and its gradient in (weights, bias)."""
    total_loss = 0.0
    grad_w = np.zeros_like(weights)
    grad_b = 0.0
    for ex in batch:
        p = sigmoid(ex.features @ weights + bias)
        f = float(np.mean(p))
        f_c = min(max(f, _CLAMP), 1.0 - _CLAMP)
        total_loss += bce_loss(f, ex.label)
        outer = (f_c - ex.label) / (f_c * (1.0 - f_c))
        gate = p * (1.0 - p) / len(p)
        grad_w += outer * (ex.features.T @ gate)
        grad_b += outer * float(np.sum(gate))
    k = len(batch)
    return total_loss / k, grad_w / k, grad_b / k


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, dim: int) -> "AdamState":
        return cls(m=np.zeros(dim), v=np.zeros(dim))


def adam_step(
    params: np.ndarray, grad: np.ndarray, state: AdamState, config: TrainConfig
) -> np.ndarray:
    """One Adam update; mutates state, returns new params."""
    state.t += 1
    state.m = config.beta1 * state.m + (1.0 - config.beta1) * grad
    state.v = config.beta2 * state.v + (1.0 - config.beta2) * grad * grad
    m_hat = state.m / (1.0 - config.beta1 ** state.t)
    v_hat = state.v / (1.0 - config.beta2 ** state.t)
    return params - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps)


def _labels_of(examples: Sequence[TrainExample]) -> np.ndarray:
    return np.array([ex.label for ex in examples], dtype=int)


def _check_both_classes(examples: Sequence[TrainExample], what: str) -> None:
    labels = _labels_of(examples)
    if len(labels) == 0:
        raise DegenerateLabels(f"{what} set is empty")
    if labels.min() == labels.max():
        raise DegenerateLabels(f"{what} set contains a single class")


def stratified_subsample(
    examples: Sequence[TrainExample], size: int, rng: np.random.Generator
) -> list[TrainExample]:
    """Class-proportional subsample without replacement; keeps both classes."""
    if len(examples) <= size:
        return list(examples)
    labels = _labels_of(examples)
    pos = np.flatnonzero(labels == 1)
    neg = np.flatnonzero(labels == 0)
    n_pos = int(round(size * len(pos) / len(examples)))
    n_pos = min(max(n_pos, 1), size - 1, len(pos))
    n_neg = min(size - n_pos, len(neg))
    chosen = np.concatenate([
        rng.choice(pos, size=n_pos, replace=False),
        rng.choice(neg, size=n_neg, replace=False),
    ])
    rng.shuffle(chosen)
    return [examples[i] for i in chosen]


def _corpus_finals(weights: np.ndarray, bias: float,
                   examples: Sequence[TrainExample]) -> np.ndarray:
    return np.array([example_final(weights, bias, ex) for ex in examples])


def fit(
    train_examples: Sequence[TrainExample],
    valid_examples: Sequence[TrainExample],
    config: TrainConfig | None = None,
) -> tuple[ConvModel, list[EpochStats]]:
    """Mini-batch Adam with early stopping on validation balanced accuracy.

    Weights start at zero. Each epoch shuffles the (subsampled) training
    set, takes Adam steps over batches, then records the full-train loss
    and the validation balanced accuracy at the best threshold. The model
    returned is the snapshot from the best validation epoch (first wins on
    ties); training stops once `patience` epochs pass without improvement.
    """
    config = config or TrainConfig()
    _check_both_classes(train_examples, "training")
    _check_both_classes(valid_examples, "validation")
    dim = train_examples[0].features.shape[1]
    for ex in list(train_examples) + list(valid_examples):
        if ex.features.shape[1] != dim:
            raise ValueError("examples disagree on feature dimension")

    rng = np.random.default_rng(config.seed)
    pool = stratified_subsample(train_examples, config.subsample_size, rng)
    _check_both_classes(pool, "subsampled training")

    params = np.zeros(dim + 1)  # weights then bias
    state = AdamState.zeros(dim + 1)
    valid_labels = _labels_of(valid_examples)

    stats: list[EpochStats] = []
    best_bacc = -1.0
    best_params = params.copy()
    since_best = 0
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(pool))
        for start in range(0, len(order), config.batch_size):
            batch = [pool[i] for i in order[start:start + config.batch_size]]
            _, gw, gb = loss_and_grad(params[:-1], params[-1], batch)
            params = adam_step(params, np.concatenate([gw, [gb]]), state, config)

        train_loss, _, _ = loss_and_grad(params[:-1], params[-1], pool)
        finals = _corpus_finals(params[:-1], params[-1], valid_examples)
        threshold = select_threshold(valid_labels, finals)
        bacc = balanced_accuracy(valid_labels, finals >= threshold)
        stats.append(EpochStats(epoch=epoch, train_loss=float(train_loss),
                                valid_bacc=float(bacc), threshold=float(threshold)))
        logger.info("epoch %d: train_loss=%.4f valid_bacc=%.4f", epoch, train_loss, bacc)
        if bacc > best_bacc:
            best_bacc = bacc
            best_params = params.copy()
            since_best = 0
        else:
            since_best += 1
            if since_best >= config.patience:
                logger.info("stopping: no improvement for %d epochs", since_best)
                break

    model = ConvModel(
        weights=best_params[:-1],
        bias=float(best_params[-1]),
        h=config.h,
        cats=config.cats,
        normalize_histograms=config.normalize_histograms,
    )
    return model, stats


@dataclass(frozen=True)
class TrainSample:
    """Raw labelled pair before featurization."""

    id: str
    document: str
    summary: str
    label: int


def read_training_corpus(path: str | Path) -> list[TrainSample]:
    """Read JSONL with id, document, summary (or claim), and 0/1 label."""
    samples = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            try:
                summary = row["summary"] if "summary" in row else row["claim"]
                samples.append(TrainSample(
                    id=str(row.get("id", line_no)),
                    document=row["document"],
                    summary=summary,
                    label=int(row["label"]),
                ))
            except KeyError as exc:
                raise ValueError(f"{path}:{line_no}: missing field {exc}") from exc
    return samples


def featurize_sample(
    sample: TrainSample,
    backend,
    config: TrainConfig,
    *,
    doc_gran: Granularity = Granularity.SENTENCE,
    sum_gran: Granularity = Granularity.SENTENCE,
    cache: MatrixCache | None = None,
) -> TrainExample:
    matrix = pair_matrix_for_texts(sample.document, sample.summary,
                                   doc_gran, sum_gran, backend, cache=cache)
    feats = column_features(matrix, config.h, config.cats,
                            normalize=config.normalize_histograms)
    return TrainExample(features=feats, label=sample.label)


def featurize_corpus(
    samples: Sequence[TrainSample],
    backend,
    config: TrainConfig,
    *,
    doc_gran: Granularity = Granularity.SENTENCE,
    sum_gran: Granularity = Granularity.SENTENCE,
    cache: MatrixCache | None = None,
) -> list[TrainExample]:
    return [
        featurize_sample(s, backend, config, doc_gran=doc_gran,
                         sum_gran=sum_gran, cache=cache)
        for s in samples
    ]


def train(
    train_samples: Sequence[TrainSample],
    valid_samples: Sequence[TrainSample],
    backend,
    config: TrainConfig | None = None,
    *,
    doc_gran: Granularity = Granularity.SENTENCE,
    sum_gran: Granularity = Granularity.SENTENCE,
    cache: MatrixCache | None = None,
) -> tuple[ConvModel, list[EpochStats]]:
    """Featurize raw samples and fit the scorer."""
    config = config or TrainConfig()
    train_ex = featurize_corpus(train_samples, backend, config,
                                doc_gran=doc_gran, sum_gran=sum_gran, cache=cache)
    valid_ex = featurize_corpus(valid_samples, backend, config,
                                doc_gran=doc_gran, sum_gran=sum_gran, cache=cache)
    return fit(train_ex, valid_ex, config)
