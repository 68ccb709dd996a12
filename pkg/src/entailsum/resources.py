"""Packaged demo data and helpers to export it for CLI walkthroughs."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .datasets import write_canonical_jsonl
from .synthetic import make_separable_samples

_DATA_FILES = ("demo_document.txt", "demo_summary.txt", "demo_fixture.json")


def read_data_text(name: str) -> str:
    return (resources.files("entailsum") / "data" / name).read_text(encoding="utf-8")


def export_demo(target_dir: str | Path) -> dict[str, Path]:
    """Copy the packaged demo files into target_dir and generate a small
    benchmark corpus next to them. Returns name -> written path."""
    target = Path(target_dir)
    target.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}
    for name in _DATA_FILES:
        path = target / name
        path.write_text(read_data_text(name), encoding="utf-8")
        written[name] = path
    corpus_path = target / "demo_benchmark.jsonl"
    write_canonical_jsonl(
        make_separable_samples(24, seed=0, dataset="demo"), corpus_path
    )
    written["demo_benchmark.jsonl"] = corpus_path
    return written
