"""Sentence-level entailment scoring for summary consistency checking."""

from .aggregate import (ConvModel, Histogram, ScoreBreakdown, ZsConfig,
                        bin_column, column_features, conv_score, zs_score)
from .backends import (BackendId, FixtureBackend, MockBackend, NliProbs,
                       RemoteBackend, mock_score)
from .baselines import (RuleBasedExtractor, SubprocessExtractor,
                        mnli_doc_score, ner_overlap_score)
from .datasets import (DATASET_SPECS, Sample, Split, dataset_stats,
                       ingest_rows, map_label, read_canonical_jsonl,
                       read_raw_jsonl, split_even_odd, write_canonical_jsonl)
from .harness import (ConvScorer, EvalReport, MnliDocScorer, NerOverlapScorer,
                      ScoreStore, ZsScorer, benchmark, evaluate,
                      measure_throughput)
from .matrix import (CategorySet, MatrixCache, PairMatrix, build_pair_matrix,
                     cache_key, pair_matrix_for_texts, select_category_view)
from .metrics import (balanced_accuracy, bootstrap_compare,
                      bootstrap_diff_samples, fleiss_kappa, roc_auc,
                      select_threshold)
from .resources import export_demo
from .segmenter import BlockList, Granularity, Side, split_blocks, split_sentences
from .synthetic import (as_train_samples, make_separable_samples,
                        make_throughput_pairs)
from .train import (TrainConfig, TrainExample, TrainSample, fit,
                    read_training_corpus, train)

__version__ = "0.1.0"

__all__ = [
    "BackendId", "BlockList", "CategorySet", "ConvModel", "ConvScorer",
    "DATASET_SPECS", "EvalReport", "FixtureBackend", "Granularity",
    "Histogram", "MatrixCache", "MnliDocScorer", "MockBackend",
    "NerOverlapScorer", "NliProbs", "PairMatrix", "RemoteBackend",
    "RuleBasedExtractor", "Sample", "ScoreBreakdown", "ScoreStore", "Side",
    "Split", "SubprocessExtractor", "TrainConfig", "TrainExample",
    "TrainSample", "ZsConfig",
    "ZsScorer", "as_train_samples", "balanced_accuracy", "benchmark",
    "bin_column", "bootstrap_compare", "bootstrap_diff_samples",
    "build_pair_matrix", "cache_key", "column_features", "conv_score",
    "dataset_stats", "evaluate", "export_demo", "fit", "fleiss_kappa",
    "ingest_rows", "make_separable_samples", "make_throughput_pairs",
    "map_label", "measure_throughput", "mnli_doc_score", "mock_score",
    "ner_overlap_score", "pair_matrix_for_texts", "read_canonical_jsonl",
    "read_raw_jsonl", "read_training_corpus", "roc_auc",
    "select_category_view", "select_threshold", "split_blocks",
    "split_even_odd", "split_sentences", "train", "write_canonical_jsonl",
    "zs_score",
]
