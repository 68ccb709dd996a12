"""Benchmark harness: run scorers over standardized datasets and compare.

For each dataset a scorer gets a decision threshold chosen on the
validation split, then balanced accuracy and ROC AUC on the test split;
the overall figure is the unweighted mean of per-dataset balanced
accuracies. Scores are persisted per (scorer configuration, sample) so
reruns and new scorers never recompute old work. Non-reference scorers
are compared against the first scorer with a paired bootstrap, Bonferroni
corrected across the number of comparisons.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol, Sequence

import numpy as np

from .aggregate import ConvModel, ZsConfig, conv_score, zs_score
from .baselines import EntityExtractor, mnli_doc_score, ner_overlap_score
from .datasets import Sample, Split
from .errors import SingleClassLabels
from .matrix import MatrixCache, pair_matrix_for_texts
from .metrics import balanced_accuracy, bootstrap_diff_samples, roc_auc, select_threshold
from .segmenter import Granularity, split_sentences

logger = logging.getLogger(__name__)


class Scorer(Protocol):
    @property
    def name(self) -> str: ...

    def config(self) -> dict: ...

    def score(self, document: str, summary: str) -> float: ...


class ZsScorer:
    """Parameter-free matrix reduction scorer."""

    def __init__(
        self,
        backend,
        zs_config: ZsConfig | None = None,
        *,
        doc_granularity: Granularity = Granularity.SENTENCE,
        sum_granularity: Granularity = Granularity.SENTENCE,
        cache: MatrixCache | None = None,
    ) -> None:
        self.backend = backend
        self.zs_config = zs_config or ZsConfig()
        self.doc_granularity = doc_granularity
        self.sum_granularity = sum_granularity
        self.cache = cache

    @property
    def name(self) -> str:
        return f"zs-{self.zs_config.op1}-{self.zs_config.op2}"

    def config(self) -> dict:
        return {
            "type": "zs",
            "op1": self.zs_config.op1,
            "op2": self.zs_config.op2,
            "cats": list(self.zs_config.cats.names),
            "doc_granularity": self.doc_granularity.value,
            "sum_granularity": self.sum_granularity.value,
            "backend": {"name": self.backend.backend_id.name,
                        "version": self.backend.backend_id.version},
        }

    def score(self, document: str, summary: str) -> float:
        matrix = pair_matrix_for_texts(document, summary, self.doc_granularity,
                                       self.sum_granularity, self.backend,
                                       cache=self.cache)
        return zs_score(matrix, self.zs_config).final


class ConvScorer:
    """Learned histogram scorer."""

    def __init__(
        self,
        backend,
        model: ConvModel,
        *,
        doc_granularity: Granularity = Granularity.SENTENCE,
        sum_granularity: Granularity = Granularity.SENTENCE,
        cache: MatrixCache | None = None,
    ) -> None:
        self.backend = backend
        self.model = model
        self.doc_granularity = doc_granularity
        self.sum_granularity = sum_granularity
        self.cache = cache

    @property
    def name(self) -> str:
        return f"conv-h{self.model.h}"

    def config(self) -> dict:
        weights_digest = hashlib.sha256(
            json.dumps(self.model.weights.tolist()).encode()
        ).hexdigest()[:16]
        return {
            "type": "conv",
            "h": self.model.h,
            "cats": list(self.model.cats.names),
            "normalize_histograms": self.model.normalize_histograms,
            "weights_digest": weights_digest,
            "bias": self.model.bias,
            "doc_granularity": self.doc_granularity.value,
            "sum_granularity": self.sum_granularity.value,
            "backend": {"name": self.backend.backend_id.name,
                        "version": self.backend.backend_id.version},
        }

    def score(self, document: str, summary: str) -> float:
        matrix = pair_matrix_for_texts(document, summary, self.doc_granularity,
                                       self.sum_granularity, self.backend,
                                       cache=self.cache)
        return conv_score(matrix, self.model).final


class MnliDocScorer:
    """One pair per sample: whole document against whole summary."""

    def __init__(self, backend) -> None:
        self.backend = backend

    @property
    def name(self) -> str:
        return "mnli-doc"

    def config(self) -> dict:
        return {
            "type": "mnli-doc",
            "backend": {"name": self.backend.backend_id.name,
                        "version": self.backend.backend_id.version},
        }

    def score(self, document: str, summary: str) -> float:
        return mnli_doc_score(document, summary, self.backend)


class NerOverlapScorer:
    """Binary entity-coverage baseline."""

    def __init__(self, extractor: EntityExtractor, *,
                 extractor_name: str = "rule-based",
                 types: Sequence[str] | None = None) -> None:
        self.extractor = extractor
        self.extractor_name = extractor_name
        self.types = frozenset(types) if types is not None else None

    @property
    def name(self) -> str:
        return "ner-overlap"

    def config(self) -> dict:
        used = self.types if self.types is not None else self.extractor.default_types
        return {
            "type": "ner-overlap",
            "extractor": self.extractor_name,
            "entity_types": sorted(used),
        }

    def score(self, document: str, summary: str) -> float:
        return ner_overlap_score(document, summary, self.extractor, self.types)


def config_digest(config: dict) -> str:
    payload = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def sample_key(sample: Sample) -> str:
    payload = "\x00".join([sample.dataset, sample.id, sample.document, sample.summary])
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:24]


class ScoreStore:
    """Persisted per-scorer score table, one JSON file per configuration."""

    def __init__(self, directory: str | Path, scorer_name: str, digest: str) -> None:
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.path = self.directory / f"scores_{digest}.json"
        self.scorer_name = scorer_name
        self.digest = digest
        if self.path.exists():
            raw = json.loads(self.path.read_text(encoding="utf-8"))
            self._scores: dict[str, float] = dict(raw["scores"])
        else:
            self._scores = {}
        self._dirty = False

    @classmethod
    def for_scorer(cls, directory: str | Path, scorer: Scorer) -> "ScoreStore":
        return cls(directory, scorer.name, config_digest(scorer.config()))

    def __len__(self) -> int:
        return len(self._scores)

    def get(self, sample: Sample) -> float | None:
        return self._scores.get(sample_key(sample))

    def put(self, sample: Sample, score: float) -> None:
        self._scores[sample_key(sample)] = float(score)
        self._dirty = True

    def save(self) -> None:
        if not self._dirty:
            return
        payload = {"scorer": self.scorer_name, "digest": self.digest,
                   "scores": self._scores}
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                json.dump(payload, f)
            os.replace(tmp, self.path)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise
        self._dirty = False


@dataclass(frozen=True)
class DatasetResult:
    dataset: str
    n_validation: int
    n_test: int
    threshold: float
    balanced_accuracy: float
    roc_auc: float


@dataclass(frozen=True)
class SignificanceEntry:
    """Candidate-minus-reference balanced accuracy with bootstrap CIs."""

    diff: float
    ci_low_05: float
    ci_high_05: float
    ci_low_01: float
    ci_high_01: float
    significant_05: bool
    significant_01: bool
    n_resamples: int

    @property
    def stars(self) -> str:
        if self.significant_01:
            return "**"
        if self.significant_05:
            return "*"
        return ""


@dataclass(frozen=True)
class ThroughputResult:
    docs_per_min: float
    n_docs: int
    elapsed_seconds: float
    warmup_docs: int
    warmup_seconds: float
    mean_sentences_per_doc: float


@dataclass
class EvalReport:
    scorer_name: str
    config: dict
    per_dataset: dict[str, DatasetResult]
    overall: float
    skipped: list[str] = field(default_factory=list)
    significance: dict | None = None  # {"reference", "datasets", "overall"}
    throughput: ThroughputResult | None = None

    def to_json_dict(self) -> dict:
        out = {
            "scorer": self.scorer_name,
            "config": self.config,
            "per_dataset": {
                ds: {
                    "n_validation": r.n_validation,
                    "n_test": r.n_test,
                    "threshold": r.threshold,
                    "balanced_accuracy": r.balanced_accuracy,
                    "roc_auc": r.roc_auc,
                } for ds, r in self.per_dataset.items()
            },
            "overall_balanced_accuracy": self.overall,
            "skipped_datasets": self.skipped,
        }
        if self.significance is not None:
            out["significance"] = {
                "reference": self.significance["reference"],
                "datasets": {
                    ds: _sig_to_dict(entry)
                    for ds, entry in self.significance["datasets"].items()
                },
                "overall": _sig_to_dict(self.significance["overall"]),
            }
        if self.throughput is not None:
            t = self.throughput
            out["throughput"] = {
                "docs_per_min": t.docs_per_min,
                "n_docs": t.n_docs,
                "elapsed_seconds": t.elapsed_seconds,
                "warmup_docs": t.warmup_docs,
                "warmup_seconds": t.warmup_seconds,
                "mean_sentences_per_doc": t.mean_sentences_per_doc,
            }
        return out


def _sig_to_dict(entry: SignificanceEntry | None) -> dict | None:
    if entry is None:
        return None
    return {
        "diff": entry.diff,
        "ci_low_05": entry.ci_low_05,
        "ci_high_05": entry.ci_high_05,
        "ci_low_01": entry.ci_low_01,
        "ci_high_01": entry.ci_high_01,
        "significant_05": entry.significant_05,
        "significant_01": entry.significant_01,
        "stars": entry.stars,
    }


@dataclass
class _DatasetArrays:
    """Raw per-dataset material kept for cross-scorer comparisons."""

    test_labels: np.ndarray
    test_scores: np.ndarray
    threshold: float


def _group_by_dataset(samples: Sequence[Sample]) -> dict[str, list[Sample]]:
    groups: dict[str, list[Sample]] = {}
    for s in samples:
        groups.setdefault(s.dataset, []).append(s)
    return groups


def _score_samples(scorer: Scorer, samples: Sequence[Sample],
                   store: ScoreStore | None,
                   max_workers: int | None = None) -> np.ndarray:
    """Score samples, reusing stored values; misses go to a worker pool.

    Workers only call scorer.score; store writes stay on the calling
    thread so the store never needs its own locking.
    """
    out = np.empty(len(samples))
    pending: list[tuple[int, Sample]] = []
    for i, s in enumerate(samples):
        cached = store.get(s) if store is not None else None
        if cached is None:
            pending.append((i, s))
        else:
            out[i] = cached
    if pending:
        workers = max_workers if max_workers is not None else (os.cpu_count() or 1)
        workers = max(1, min(workers, len(pending)))
        if workers == 1:
            fresh = [scorer.score(s.document, s.summary) for _, s in pending]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                fresh = list(pool.map(
                    lambda s: scorer.score(s.document, s.summary),
                    [s for _, s in pending],
                ))
        for (i, s), value in zip(pending, fresh):
            value = float(value)
            out[i] = value
            if store is not None:
                store.put(s, value)
    return out


def evaluate(
    scorer: Scorer,
    samples: Sequence[Sample],
    *,
    store: ScoreStore | None = None,
    max_workers: int | None = None,
) -> EvalReport:
    report, _ = evaluate_with_arrays(scorer, samples, store=store,
                                     max_workers=max_workers)
    return report


def evaluate_with_arrays(
    scorer: Scorer,
    samples: Sequence[Sample],
    *,
    store: ScoreStore | None = None,
    max_workers: int | None = None,
) -> tuple[EvalReport, dict[str, _DatasetArrays]]:
    """Evaluate one scorer; also return raw arrays for significance tests.

    A dataset is skipped (with a warning) when either split is missing or
    single-class, since neither a threshold nor balanced accuracy is
    defined there.
    """
    per_dataset: dict[str, DatasetResult] = {}
    arrays: dict[str, _DatasetArrays] = {}
    skipped: list[str] = []
    for dataset, group in _group_by_dataset(samples).items():
        valid = [s for s in group if s.split is Split.VALIDATION]
        test = [s for s in group if s.split is Split.TEST]
        if not valid or not test:
            logger.warning("skipping %s: missing validation or test split", dataset)
            skipped.append(dataset)
            continue
        valid_labels = np.array([s.label for s in valid])
        test_labels = np.array([s.label for s in test])
        try:
            valid_scores = _score_samples(scorer, valid, store, max_workers)
            test_scores = _score_samples(scorer, test, store, max_workers)
            threshold = select_threshold(valid_labels, valid_scores)
            bacc = balanced_accuracy(test_labels, test_scores >= threshold)
            auc = roc_auc(test_labels, test_scores)
        except SingleClassLabels as exc:
            logger.warning("skipping %s: %s", dataset, exc)
            skipped.append(dataset)
            continue
        per_dataset[dataset] = DatasetResult(
            dataset=dataset,
            n_validation=len(valid),
            n_test=len(test),
            threshold=float(threshold),
            balanced_accuracy=float(bacc),
            roc_auc=float(auc),
        )
        arrays[dataset] = _DatasetArrays(
            test_labels=test_labels,
            test_scores=test_scores,
            threshold=float(threshold),
        )
    if store is not None:
        store.save()
    if not per_dataset:
        raise SingleClassLabels(
            "no dataset had usable validation and test splits"
        )
    overall = float(np.mean([r.balanced_accuracy for r in per_dataset.values()]))
    report = EvalReport(
        scorer_name=scorer.name,
        config=scorer.config(),
        per_dataset=per_dataset,
        overall=overall,
        skipped=skipped,
    )
    return report, arrays


def _entry_from_diffs(diffs: np.ndarray, point: float, n_tests: int,
                      n_resamples: int) -> SignificanceEntry:
    lo05 = float(np.quantile(diffs, (0.05 / n_tests) / 2.0))
    hi05 = float(np.quantile(diffs, 1.0 - (0.05 / n_tests) / 2.0))
    lo01 = float(np.quantile(diffs, (0.01 / n_tests) / 2.0))
    hi01 = float(np.quantile(diffs, 1.0 - (0.01 / n_tests) / 2.0))
    return SignificanceEntry(
        diff=float(point),
        ci_low_05=lo05, ci_high_05=hi05,
        ci_low_01=lo01, ci_high_01=hi01,
        significant_05=bool(lo05 > 0.0 or hi05 < 0.0),
        significant_01=bool(lo01 > 0.0 or hi01 < 0.0),
        n_resamples=n_resamples,
    )


def benchmark(
    scorers: Sequence[Scorer],
    samples: Sequence[Sample],
    *,
    store_dir: str | Path | None = None,
    n_resamples: int = 10_000,
    seed: int = 0,
    max_workers: int | None = None,
    return_arrays: bool = False,
):
    """Evaluate several scorers; the first is the reference for stars.

    Each later scorer is compared against the reference per dataset and
    overall, Bonferroni corrected for len(scorers) - 1 simultaneous
    comparisons. Overall comparisons resample within each dataset
    (stratified), then average the per-dataset differences, matching how
    the overall figure itself is an unweighted mean.
    """
    if not scorers:
        raise ValueError("need at least one scorer")
    reports: list[EvalReport] = []
    all_arrays: list[dict[str, _DatasetArrays]] = []
    for scorer in scorers:
        store = (ScoreStore.for_scorer(store_dir, scorer)
                 if store_dir is not None else None)
        report, arrays = evaluate_with_arrays(scorer, samples, store=store,
                                              max_workers=max_workers)
        reports.append(report)
        all_arrays.append(arrays)

    n_tests = len(scorers) - 1
    if n_tests == 0:
        return (reports, all_arrays) if return_arrays else reports
    ref_arrays = all_arrays[0]
    for k in range(1, len(scorers)):
        cand_arrays = all_arrays[k]
        shared = [ds for ds in reports[0].per_dataset if ds in cand_arrays]
        ds_entries: dict[str, SignificanceEntry] = {}
        diff_rows = []
        point_sum = 0.0
        for i, ds in enumerate(shared):
            ref = ref_arrays[ds]
            cand = cand_arrays[ds]
            # candidate first so diff and CI read as candidate - reference
            diffs, point, _ = bootstrap_diff_samples(
                ref.test_labels, cand.test_scores, ref.test_scores,
                (cand.threshold, ref.threshold),
                n_resamples=n_resamples, seed=np.random.SeedSequence([seed, i]),
            )
            ds_entries[ds] = _entry_from_diffs(diffs, point, n_tests, n_resamples)
            diff_rows.append(diffs)
            point_sum += point
        if not shared:
            continue
        overall_entry = _entry_from_diffs(
            np.mean(diff_rows, axis=0), point_sum / len(shared),
            n_tests, n_resamples,
        )
        reports[k].significance = {
            "reference": reports[0].scorer_name,
            "datasets": ds_entries,
            "overall": overall_entry,
        }
    return (reports, all_arrays) if return_arrays else reports


def measure_throughput(
    scorer: Scorer,
    corpus: Sequence[tuple[str, str]],
    *,
    warmup_docs: int = 10,
    clock: Callable[[], float] = time.perf_counter,
) -> ThroughputResult:
    """Documents scored per minute, sequentially, excluding a warmup prefix.

    The first warmup_docs pairs exercise caches, lazy imports and
    connection setup without being timed; the remainder is timed as one
    sequential block. The clock is injectable for deterministic tests.
    """
    if warmup_docs < 0:
        raise ValueError("warmup_docs must be >= 0")
    timed = corpus[warmup_docs:]
    if not timed:
        raise ValueError(
            f"corpus has {len(corpus)} docs, all consumed by warmup={warmup_docs}"
        )
    t0 = clock()
    for document, summary in corpus[:warmup_docs]:
        scorer.score(document, summary)
    t1 = clock()
    for document, summary in timed:
        scorer.score(document, summary)
    t2 = clock()
    elapsed = t2 - t1
    if elapsed <= 0:
        raise ValueError("clock did not advance during the timed block")
    sentences = [len(split_sentences(doc)) for doc, _ in timed]
    return ThroughputResult(
        docs_per_min=len(timed) / elapsed * 60.0,
        n_docs=len(timed),
        elapsed_seconds=float(elapsed),
        warmup_docs=warmup_docs,
        warmup_seconds=float(t1 - t0),
        mean_sentences_per_doc=float(np.mean(sentences)),
    )
