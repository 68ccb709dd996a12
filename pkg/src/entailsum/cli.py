"""Command line interface.

Subcommands: score, train, ingest, benchmark, throughput. Options can come
from a JSON config file (--config); explicit flags win over the file, and
unknown config keys are rejected. The matrix cache directory resolves as
flag > ENTAILSUM_CACHE_DIR > config file.

Exit codes: 0 success; 2 usage or configuration problems; 3 backend or
extractor failures; 4 data problems (schema, labels, model shape). Errors
print one JSON object {"error", "message"} to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .aggregate import ConvModel, ZsConfig, conv_score, zs_score
from .baselines import RuleBasedExtractor
from .backends import FixtureBackend, MockBackend, RemoteBackend
from .datasets import (DATASET_SPECS, dataset_stats, ingest_rows,
                       read_canonical_jsonl, read_raw_jsonl,
                       write_canonical_jsonl)
from .errors import (BackendUnavailable, ConfigError, DegenerateLabels,
                     DimensionZero, EmptyInput, EmptyPair,
                     ExtractorUnavailable, FixtureMiss, ModelShapeMismatch,
                     OutOfRangeScore, SchemaMismatch, SingleClassLabels,
                     UndefinedAgreement, UnequalRaterCounts,
                     UnsupportedGranularity)
from .harness import (ConvScorer, MnliDocScorer, NerOverlapScorer, ZsScorer,
                      benchmark, measure_throughput)
from .matrix import CategorySet, MatrixCache, pair_matrix_for_texts
from .reporting import leaderboard_text, save_report_files
from .segmenter import Granularity
from .synthetic import make_throughput_pairs
from .train import TrainConfig, read_training_corpus, train

CACHE_ENV_VAR = "ENTAILSUM_CACHE_DIR"

_EXIT_USAGE = (ConfigError, EmptyInput, UnsupportedGranularity)
_EXIT_BACKEND = (BackendUnavailable, FixtureMiss, EmptyPair, ExtractorUnavailable)
_EXIT_DATA = (SchemaMismatch, DegenerateLabels, SingleClassLabels,
              DimensionZero, OutOfRangeScore, ModelShapeMismatch,
              UnequalRaterCounts, UndefinedAgreement)

_GRANULARITIES = [g.value for g in Granularity]

_DEFAULTS: dict[str, dict] = {
    "score": {
        "backend": "mock", "doc_granularity": "sentence",
        "sum_granularity": "sentence", "op1": "max", "op2": "mean",
        "cats": "E", "model": None, "cache_dir": None, "seed": 0,
    },
    "train": {
        "backend": "mock", "doc_granularity": "sentence",
        "sum_granularity": "sentence", "batch_size": 32,
        "learning_rate": 0.01, "max_epochs": 10, "patience": 3,
        "subsample_size": 10_000, "h": 50, "cats": "E", "normalize": True,
        "out": "model.json", "cache_dir": None, "seed": 0,
    },
    "ingest": {},
    "benchmark": {
        "backend": "mock", "doc_granularity": "sentence",
        "sum_granularity": "sentence", "scorers": "zs",
        "out": "benchmark_report", "store_dir": None,
        "n_resamples": 10_000, "figures": True, "measure_throughput": False,
        "cache_dir": None, "seed": 0,
    },
    "throughput": {
        "backend": "mock", "doc_granularity": "sentence",
        "sum_granularity": "sentence", "scorer": "zs", "n_docs": 30,
        "doc_sentences": 60, "summary_sentences": 5, "warmup": 10,
        "model": None, "cache_dir": None, "seed": 0,
    },
}


def _merged_options(args: argparse.Namespace, command: str) -> dict:
    """defaults < config file < explicit flags; reject unknown config keys."""
    defaults = _DEFAULTS[command]
    merged = dict(defaults)
    if getattr(args, "config", None):
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(raw) - set(defaults)
        if unknown:
            raise ConfigError(
                f"unknown config keys for {command}: {sorted(unknown)}"
            )
        merged.update(raw)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if "cache_dir" in defaults and getattr(args, "cache_dir", None) is None:
        env = os.environ.get(CACHE_ENV_VAR)
        if env:
            merged["cache_dir"] = env
    return merged


def _parse_cats(value: str) -> CategorySet:
    letters = []
    for ch in value.upper():
        if ch in "ENC":
            letters.append(ch)
        elif ch.isalnum():
            raise ConfigError(f"bad category {ch!r} in {value!r}; use E, N, C")
    if not letters:
        raise ConfigError(f"no categories in {value!r}")
    try:
        return CategorySet.from_names(letters)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _make_backend(spec: str):
    if spec == "mock":
        return MockBackend()
    if spec.startswith("fixture:"):
        path = spec[len("fixture:"):]
        try:
            return FixtureBackend.load(path)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if spec.startswith("remote:"):
        return RemoteBackend(spec[len("remote:"):])
    raise ConfigError(
        f"bad backend spec {spec!r}; use mock, fixture:PATH, or remote:URL"
    )


def _make_cache(cache_dir) -> MatrixCache | None:
    return MatrixCache(cache_dir) if cache_dir else None


def _make_scorer(spec: str, backend, doc_gran: Granularity,
                 sum_gran: Granularity, cache: MatrixCache | None):
    spec = spec.strip()
    if spec == "zs":
        return ZsScorer(backend, doc_granularity=doc_gran,
                        sum_granularity=sum_gran, cache=cache)
    if spec.startswith("zs:"):
        parts = spec[len("zs:"):].split(",")
        if len(parts) != 2:
            raise ConfigError(f"bad scorer spec {spec!r}; use zs:OP1,OP2")
        try:
            zs_config = ZsConfig(op1=parts[0].strip(), op2=parts[1].strip())
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return ZsScorer(backend, zs_config, doc_granularity=doc_gran,
                        sum_granularity=sum_gran, cache=cache)
    if spec.startswith("conv:"):
        model = ConvModel.load(spec[len("conv:"):])
        return ConvScorer(backend, model, doc_granularity=doc_gran,
                          sum_granularity=sum_gran, cache=cache)
    if spec == "mnli-doc":
        return MnliDocScorer(backend)
    if spec == "ner-overlap":
        return NerOverlapScorer(RuleBasedExtractor())
    raise ConfigError(
        f"bad scorer spec {spec!r}; use zs, zs:OP1,OP2, conv:MODEL, "
        f"mnli-doc, or ner-overlap"
    )


def _add_common(parser: argparse.ArgumentParser, *, cache: bool = True) -> None:
    parser.add_argument("--config", help="JSON file of option defaults")
    parser.add_argument("--seed", type=int, help="random seed (default 0)")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log progress to stderr")
    if cache:
        parser.add_argument("--backend",
                            help="mock | fixture:PATH | remote:URL (default mock)")
        parser.add_argument("--cache-dir",
                            help=f"pair-matrix cache (or ${CACHE_ENV_VAR})")
        parser.add_argument("--doc-granularity", choices=_GRANULARITIES)
        parser.add_argument("--sum-granularity", choices=_GRANULARITIES)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entailsum",
        description="Check summaries against their source documents with "
                    "sentence-level entailment.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score one document/summary pair")
    p.add_argument("--document", required=True, help="path to document text")
    p.add_argument("--summary", required=True, help="path to summary text")
    p.add_argument("--op1", choices=["min", "mean", "max"],
                   help="reduction over document blocks (default max)")
    p.add_argument("--op2", choices=["min", "mean", "max"],
                   help="reduction over summary blocks (default mean)")
    p.add_argument("--cats", help="categories to use, e.g. E or E,C (default E)")
    p.add_argument("--model", help="trained model JSON; switches to the "
                                   "learned histogram scorer")
    _add_common(p)

    p = sub.add_parser("train", help="train the learned histogram scorer")
    p.add_argument("--train", required=True, dest="train_path",
                   help="training JSONL (document, summary|claim, label)")
    p.add_argument("--valid", required=True, dest="valid_path",
                   help="validation JSONL")
    p.add_argument("--out", help="where to write the model (default model.json)")
    p.add_argument("--batch-size", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--max-epochs", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--subsample-size", type=int)
    p.add_argument("--h", type=int, help="histogram bins per category (default 50)")
    p.add_argument("--cats", help="categories to featurize (default E)")
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction,
                   default=None, help="divide histograms by document length "
                                      "(default on)")
    _add_common(p)

    p = sub.add_parser("ingest", help="standardize a raw annotation file")
    p.add_argument("--dataset", required=True, choices=sorted(DATASET_SPECS))
    p.add_argument("--input", required=True, help="raw JSONL")
    p.add_argument("--output", required=True, help="canonical JSONL to write")
    _add_common(p, cache=False)

    p = sub.add_parser("benchmark", help="evaluate scorers on a canonical corpus")
    p.add_argument("--data", required=True, help="canonical JSONL")
    p.add_argument("--scorers", help="comma list: zs | zs:OP1,OP2 | conv:MODEL "
                                     "| mnli-doc | ner-overlap (first is the "
                                     "reference)")
    p.add_argument("--out", help="report directory (default benchmark_report)")
    p.add_argument("--store-dir", help="persisted score store directory")
    p.add_argument("--n-resamples", type=int,
                   help="bootstrap resamples (default 10000)")
    p.add_argument("--figures", action=argparse.BooleanOptionalAction,
                   default=None, help="render PNG figures (default on)")
    p.add_argument("--measure-throughput", action=argparse.BooleanOptionalAction,
                   default=None, help="also time each scorer over the corpus")
    _add_common(p)

    p = sub.add_parser("throughput", help="measure documents scored per minute")
    p.add_argument("--scorer", help="scorer spec (default zs)")
    p.add_argument("--model", help="model JSON when --scorer conv: is used "
                                   "without a path")
    p.add_argument("--n-docs", type=int, help="synthetic corpus size (default 30)")
    p.add_argument("--doc-sentences", type=int)
    p.add_argument("--summary-sentences", type=int)
    p.add_argument("--warmup", type=int, help="untimed leading docs (default 10)")
    _add_common(p)

    return parser


def _cmd_score(args: argparse.Namespace) -> int:
    opt = _merged_options(args, "score")
    document = Path(args.document).read_text(encoding="utf-8")
    summary = Path(args.summary).read_text(encoding="utf-8")
    backend = _make_backend(opt["backend"])
    cache = _make_cache(opt["cache_dir"])
    matrix = pair_matrix_for_texts(
        document, summary,
        Granularity(opt["doc_granularity"]), Granularity(opt["sum_granularity"]),
        backend, cache=cache,
    )
    if opt["model"]:
        breakdown = conv_score(matrix, ConvModel.load(opt["model"]))
    else:
        breakdown = zs_score(matrix, ZsConfig(op1=opt["op1"], op2=opt["op2"],
                                              cats=_parse_cats(opt["cats"])))
    out = {"final": breakdown.final, "per_sentence": list(breakdown.per_sentence)}
    if breakdown.support is not None:
        out["support"] = list(breakdown.support)
    if breakdown.extras:
        out["extras"] = breakdown.extras
    print(json.dumps(out, indent=2))
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    opt = _merged_options(args, "train")
    train_samples = read_training_corpus(args.train_path)
    valid_samples = read_training_corpus(args.valid_path)
    backend = _make_backend(opt["backend"])
    cache = _make_cache(opt["cache_dir"])
    config = TrainConfig(
        batch_size=opt["batch_size"], learning_rate=opt["learning_rate"],
        max_epochs=opt["max_epochs"], patience=opt["patience"],
        subsample_size=opt["subsample_size"], h=opt["h"],
        cats=_parse_cats(opt["cats"]), normalize_histograms=opt["normalize"],
        seed=opt["seed"],
    )
    model, stats = train(
        train_samples, valid_samples, backend, config,
        doc_gran=Granularity(opt["doc_granularity"]),
        sum_gran=Granularity(opt["sum_granularity"]),
        cache=cache,
    )
    model.save(opt["out"])
    best = max(range(len(stats)), key=lambda i: stats[i].valid_bacc)
    print(json.dumps({
        "model": str(opt["out"]),
        "best_epoch": stats[best].epoch,
        "best_valid_balanced_accuracy": stats[best].valid_bacc,
        "epochs": [
            {"epoch": s.epoch, "train_loss": s.train_loss,
             "valid_balanced_accuracy": s.valid_bacc, "threshold": s.threshold}
            for s in stats
        ],
    }, indent=2))
    return 0


def _cmd_ingest(args: argparse.Namespace) -> int:
    _merged_options(args, "ingest")  # validates config keys
    rows = read_raw_jsonl(args.input)
    samples = ingest_rows(args.dataset, rows)
    write_canonical_jsonl(samples, args.output)
    print(json.dumps({
        "dataset": args.dataset,
        "read": len(rows),
        "written": len(samples),
        "stats": dataset_stats(samples),
    }, indent=2))
    return 0


def _cmd_benchmark(args: argparse.Namespace) -> int:
    opt = _merged_options(args, "benchmark")
    samples = read_canonical_jsonl(args.data)
    backend = _make_backend(opt["backend"])
    cache = _make_cache(opt["cache_dir"])
    doc_gran = Granularity(opt["doc_granularity"])
    sum_gran = Granularity(opt["sum_granularity"])
    specs = _split_scorer_specs(str(opt["scorers"]))
    if not specs:
        raise ConfigError("no scorers given")
    scorers = [
        _make_scorer(spec, backend, doc_gran, sum_gran, cache) for spec in specs
    ]
    reports, arrays = benchmark(
        scorers, samples, store_dir=opt["store_dir"],
        n_resamples=opt["n_resamples"], seed=opt["seed"], return_arrays=True,
    )
    if opt["measure_throughput"]:
        pairs = [(s.document, s.summary) for s in samples]
        warmup = min(10, max(len(pairs) - 1, 0))
        for report, scorer in zip(reports, scorers):
            report.throughput = measure_throughput(scorer, pairs,
                                                   warmup_docs=warmup)
    paths = save_report_files(reports, opt["out"], arrays=arrays,
                              figures=opt["figures"])
    print(leaderboard_text(reports), end="")
    logging.getLogger(__name__).info(
        "wrote %s", ", ".join(str(p) for p in paths.values()))
    return 0


def _split_scorer_specs(raw: str) -> list[str]:
    """Split a comma list while keeping zs:OP1,OP2 specs whole."""
    parts: list[str] = []
    for piece in raw.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if parts and parts[-1].startswith("zs:") and "," not in parts[-1]:
            # previous piece was the first half of zs:OP1,OP2
            parts[-1] = f"{parts[-1]},{piece}"
        else:
            parts.append(piece)
    return parts


def _cmd_throughput(args: argparse.Namespace) -> int:
    opt = _merged_options(args, "throughput")
    backend = _make_backend(opt["backend"])
    cache = _make_cache(opt["cache_dir"])
    spec = str(opt["scorer"])
    if spec == "conv" and opt["model"]:
        spec = f"conv:{opt['model']}"
    scorer = _make_scorer(spec, backend, Granularity(opt["doc_granularity"]),
                          Granularity(opt["sum_granularity"]), cache)
    corpus = make_throughput_pairs(
        opt["n_docs"], seed=opt["seed"],
        doc_sentences=opt["doc_sentences"],
        summary_sentences=opt["summary_sentences"],
    )
    result = measure_throughput(scorer, corpus, warmup_docs=opt["warmup"])
    print(json.dumps({
        "scorer": scorer.name,
        "docs_per_min": result.docs_per_min,
        "n_docs": result.n_docs,
        "elapsed_seconds": result.elapsed_seconds,
        "warmup_docs": result.warmup_docs,
        "warmup_seconds": result.warmup_seconds,
        "mean_sentences_per_doc": result.mean_sentences_per_doc,
    }, indent=2))
    return 0


_COMMANDS = {
    "score": _cmd_score,
    "train": _cmd_train,
    "ingest": _cmd_ingest,
    "benchmark": _cmd_benchmark,
    "throughput": _cmd_throughput,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except _EXIT_BACKEND as exc:
        _print_error(exc)
        return 3
    except _EXIT_DATA as exc:
        _print_error(exc)
        return 4
    except _EXIT_USAGE as exc:
        _print_error(exc)
        return 2
    except (ValueError, OSError) as exc:
        _print_error(exc)
        return 2


def _print_error(exc: Exception) -> None:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
          file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
