"""Standardizing heterogeneous consistency-annotation datasets.

Every supported dataset is reduced to the same binary task: label 1 when
the summary is consistent with its document, 0 otherwise. Datasets that
ship without an official validation/test split are split by the parity of
their published order (even index -> validation), which is stable across
re-runs and requires no randomness.

Canonical record schema (JSONL, one object per line):
    {"id", "dataset", "split", "document", "summary", "label"}
plus an optional "annotations" object carrying the raw label sources.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

from .errors import SchemaMismatch

logger = logging.getLogger(__name__)


class Split(str, Enum):
    VALIDATION = "validation"
    TEST = "test"


@dataclass(frozen=True)
class Sample:
    id: str
    dataset: str
    split: Split
    document: str
    summary: str
    label: int
    annotations: dict | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "dataset": self.dataset,
            "split": self.split.value,
            "document": self.document,
            "summary": self.summary,
            "label": self.label,
        }
        if self.annotations is not None:
            out["annotations"] = self.annotations
        return out

    @classmethod
    def from_dict(cls, row: dict) -> "Sample":
        try:
            return cls(
                id=str(row["id"]),
                dataset=row["dataset"],
                split=Split(row["split"]),
                document=row["document"],
                summary=row["summary"],
                label=int(row["label"]),
                annotations=row.get("annotations"),
            )
        except (KeyError, ValueError) as exc:
            raise SchemaMismatch(f"bad canonical record: {exc}") from exc


def _need(row: dict, key: str):
    try:
        return row[key]
    except KeyError:
        raise SchemaMismatch(f"missing field {key!r}") from None


def _label_correct_flag(row: dict) -> int:
    value = _need(row, "correct")
    if not isinstance(value, bool):
        raise SchemaMismatch(f"'correct' must be a bool, got {value!r}")
    return int(value)


_HALLUCINATION_KINDS = frozenset({"extrinsic", "intrinsic"})


def _label_hallucination_types(row: dict) -> int:
    kinds = _need(row, "hallucination_types")
    if not isinstance(kinds, list):
        raise SchemaMismatch("'hallucination_types' must be a list")
    unknown = set(kinds) - _HALLUCINATION_KINDS
    if unknown:
        raise SchemaMismatch(f"unknown hallucination types: {sorted(unknown)}")
    return int(len(kinds) == 0)


# error taxonomy: only accuracy errors make a summary inconsistent;
# fluency problems are disregarded for this task
POLYTOPE_ACCURACY_ERRORS = frozenset({
    "addition", "omission", "inaccuracy_intrinsic", "inaccuracy_extrinsic",
    "positive_negative_aspect",
})
POLYTOPE_FLUENCY_ERRORS = frozenset({"duplication", "word_order", "grammar"})


def _label_error_list(row: dict) -> int:
    errors = _need(row, "errors")
    if not isinstance(errors, list):
        raise SchemaMismatch("'errors' must be a list")
    unknown = set(errors) - POLYTOPE_ACCURACY_ERRORS - POLYTOPE_FLUENCY_ERRORS
    if unknown:
        raise SchemaMismatch(f"unknown error types: {sorted(unknown)}")
    return int(not (set(errors) & POLYTOPE_ACCURACY_ERRORS))


def _label_correct_string(row: dict) -> int:
    value = _need(row, "label")
    if value == "CORRECT":
        return 1
    if value == "INCORRECT":
        return 0
    raise SchemaMismatch(f"'label' must be CORRECT or INCORRECT, got {value!r}")


def _label_consistency_ratings(row: dict) -> int:
    ratings = _need(row, "consistency")
    if not isinstance(ratings, list) or not ratings:
        raise SchemaMismatch("'consistency' must be a non-empty list")
    for r in ratings:
        if not isinstance(r, (int, float)) or not (1 <= r <= 5):
            raise SchemaMismatch(f"consistency rating {r!r} outside 1..5")
    return int(all(r == 5 for r in ratings))


def _label_annotator_majority(row: dict) -> int:
    votes = _need(row, "annotator_no_error")
    if not isinstance(votes, list) or not votes:
        raise SchemaMismatch("'annotator_no_error' must be a non-empty list")
    for v in votes:
        if not isinstance(v, bool):
            raise SchemaMismatch(f"annotator vote {v!r} must be a bool")
    return int(sum(votes) * 2 > len(votes))  # strict majority


def _label_passthrough(row: dict) -> int:
    value = _need(row, "label")
    if value in (0, 1, True, False):
        return int(value)
    raise SchemaMismatch(f"'label' must be 0 or 1, got {value!r}")


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    label_fn: Callable[[dict], int]
    has_official_split: bool
    annotation_fields: tuple[str, ...]


DATASET_SPECS: dict[str, DatasetSpec] = {
    spec.name: spec
    for spec in (
        DatasetSpec("cogensumm", _label_correct_flag, True, ("correct",)),
        DatasetSpec("xsumfaith", _label_hallucination_types, False,
                    ("hallucination_types",)),
        DatasetSpec("polytope", _label_error_list, False, ("errors",)),
        DatasetSpec("factcc", _label_correct_string, True, ()),
        DatasetSpec("summeval", _label_consistency_ratings, False,
                    ("consistency",)),
        DatasetSpec("frank", _label_annotator_majority, True,
                    ("annotator_no_error",)),
        DatasetSpec("passthrough", _label_passthrough, False, ()),
    )
}


_T = TypeVar("_T")


def split_even_odd(samples: Sequence[_T]) -> tuple[list[_T], list[_T]]:
    """Split an as-published sequence by index parity.

    Even positions (0, 2, ...) become the validation half, odd positions
    the test half; relative order is preserved within each half.
    """
    items = list(samples)
    return items[0::2], items[1::2]


def map_label(dataset: str, row: dict) -> int:
    spec = DATASET_SPECS.get(dataset)
    if spec is None:
        raise ValueError(f"unknown dataset {dataset!r}; known: {sorted(DATASET_SPECS)}")
    return spec.label_fn(row)


def ingest_rows(dataset: str, rows: Iterable[dict]) -> list[Sample]:
    """Convert raw annotation rows to canonical samples.

    Rows are consumed in published order; for datasets without official
    splits the even/odd parity of that order decides the split, computed
    before any row is rejected. Rows with an empty document or summary are
    dropped with a warning rather than failing the whole ingest.
    """
    spec = DATASET_SPECS.get(dataset)
    if spec is None:
        raise ValueError(f"unknown dataset {dataset!r}; known: {sorted(DATASET_SPECS)}")
    samples: list[Sample] = []
    for index, row in enumerate(rows):
        sample_id = str(row.get("id", index))
        if spec.has_official_split:
            raw_split = _need(row, "split")
            try:
                split = Split(raw_split)
            except ValueError:
                raise SchemaMismatch(
                    f"row {sample_id}: split must be 'validation' or 'test', "
                    f"got {raw_split!r}"
                ) from None
        else:
            # parity of the published index, fixed before any row is dropped
            split = Split.VALIDATION if index % 2 == 0 else Split.TEST
        label = spec.label_fn(row)
        document = _need(row, "document")
        summary = row.get("summary", row.get("claim"))
        if summary is None:
            raise SchemaMismatch(f"row {sample_id}: missing 'summary' (or 'claim')")
        if not str(document).strip() or not str(summary).strip():
            logger.warning("dropping %s/%s: empty document or summary",
                           dataset, sample_id)
            continue
        annotations = {f: row[f] for f in spec.annotation_fields if f in row}
        samples.append(Sample(
            id=sample_id,
            dataset=dataset,
            split=split,
            document=str(document),
            summary=str(summary),
            label=label,
            annotations=annotations or None,
        ))
    return samples


def read_raw_jsonl(path: str | Path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def read_canonical_jsonl(path: str | Path) -> list[Sample]:
    return [Sample.from_dict(row) for row in read_raw_jsonl(path)]


def write_canonical_jsonl(samples: Sequence[Sample], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for s in samples:
            f.write(json.dumps(s.to_dict(), ensure_ascii=False) + "\n")


def dataset_stats(samples: Sequence[Sample]) -> dict:
    """Counts and positive rates per dataset, by split and overall."""
    out: dict[str, dict] = {}
    for s in samples:
        ds = out.setdefault(s.dataset, {
            key: {"n": 0, "n_positive": 0}
            for key in (*(sp.value for sp in Split), "overall")
        })
        for bucket in (ds[s.split.value], ds["overall"]):
            bucket["n"] += 1
            bucket["n_positive"] += s.label
    for ds in out.values():
        for bucket in ds.values():
            bucket["pct_positive"] = (
                100.0 * bucket["n_positive"] / bucket["n"] if bucket["n"] else 0.0
            )
    return out
