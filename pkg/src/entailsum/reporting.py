"""Rendering benchmark results: leaderboards, JSON, and figures.

The text leaderboard is for terminals (percentages, significance stars);
the TSV carries plain machine-readable numbers with the stars in separate
columns; report.json keeps everything. Figures are rendered with the Agg
backend so no display is needed.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .harness import EvalReport


def _dataset_columns(reports: Sequence[EvalReport]) -> list[str]:
    cols: list[str] = []
    for report in reports:
        for ds in report.per_dataset:
            if ds not in cols:
                cols.append(ds)
    return cols


def _stars_for(report: EvalReport, dataset: str | None) -> str:
    if not report.significance:
        return ""
    if dataset is None:
        entry = report.significance["overall"]
    else:
        entry = report.significance["datasets"].get(dataset)
    return entry.stars if entry is not None else ""


def leaderboard_text(reports: Sequence[EvalReport]) -> str:
    """Fixed-width table of balanced accuracies (percent) with stars."""
    datasets = _dataset_columns(reports)
    headers = ["Model"] + datasets + ["Overall", "Doc./min"]
    rows: list[list[str]] = []
    for report in reports:
        row = [report.scorer_name]
        for ds in datasets:
            result = report.per_dataset.get(ds)
            if result is None:
                row.append("-")
            else:
                row.append(f"{100.0 * result.balanced_accuracy:.1f}{_stars_for(report, ds)}")
        row.append(f"{100.0 * report.overall:.1f}{_stars_for(report, None)}")
        if report.throughput is not None:
            row.append(f"{report.throughput.docs_per_min:.0f}")
        else:
            row.append("-")
        rows.append(row)
    widths = [max(len(headers[c]), *(len(r[c]) for r in rows)) for c in range(len(headers))]
    lines = []
    for r in [headers] + rows:
        first = r[0].ljust(widths[0])
        rest = "  ".join(r[c].rjust(widths[c]) for c in range(1, len(headers)))
        lines.append(f"{first}  {rest}".rstrip())
    lines.insert(1, "-" * max(len(line) for line in lines))
    return "\n".join(lines) + "\n"


def leaderboard_tsv(reports: Sequence[EvalReport]) -> str:
    """Tab-separated leaderboard: fractions, stars in sig_* columns."""
    datasets = _dataset_columns(reports)
    header = (["model"] + datasets + ["overall", "docs_per_min"]
              + [f"sig_{ds}" for ds in datasets] + ["sig_overall"])
    lines = ["\t".join(header)]
    for report in reports:
        cells = [report.scorer_name]
        for ds in datasets:
            result = report.per_dataset.get(ds)
            cells.append("" if result is None else repr(result.balanced_accuracy))
        cells.append(repr(report.overall))
        cells.append("" if report.throughput is None
                     else repr(report.throughput.docs_per_min))
        cells.extend(_stars_for(report, ds) for ds in datasets)
        cells.append(_stars_for(report, None))
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def report_json(reports: Sequence[EvalReport]) -> str:
    return json.dumps({"reports": [r.to_json_dict() for r in reports]}, indent=2)


def _roc_points(labels: np.ndarray, scores: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stepwise ROC curve points from raw scores, high threshold first."""
    order = np.argsort(-scores, kind="stable")
    lab = labels[order]
    sc = scores[order]
    tps = np.cumsum(lab == 1).astype(float)
    fps = np.cumsum(lab == 0).astype(float)
    # keep only the last point of each tied-score block
    boundary = np.r_[sc[1:] != sc[:-1], True]
    tpr = np.r_[0.0, tps[boundary] / max(tps[-1], 1.0)]
    fpr = np.r_[0.0, fps[boundary] / max(fps[-1], 1.0)]
    return fpr, tpr


def render_figures(
    reports: Sequence[EvalReport],
    out_dir: str | Path,
    arrays: Sequence[dict] | None = None,
) -> list[Path]:
    """Write PNG figures; returns the written paths.

    Always renders the balanced-accuracy bar chart. With per-scorer raw
    arrays (parallel to reports) it also renders per-dataset ROC curves
    and the pooled score distributions.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    datasets = _dataset_columns(reports)

    # grouped bars: one group per dataset (plus overall), one bar per scorer
    groups = datasets + ["Overall"]
    x = np.arange(len(groups))
    width = 0.8 / max(len(reports), 1)
    fig, ax = plt.subplots(figsize=(max(6.0, 1.8 * len(groups)), 4.0))
    for i, report in enumerate(reports):
        heights = [
            100.0 * report.per_dataset[ds].balanced_accuracy
            if ds in report.per_dataset else 0.0
            for ds in datasets
        ] + [100.0 * report.overall]
        ax.bar(x + (i - (len(reports) - 1) / 2.0) * width, heights, width,
               label=report.scorer_name)
    ax.set_xticks(x, groups, rotation=20, ha="right")
    ax.set_ylabel("Balanced accuracy (%)")
    ax.set_ylim(0, 100)
    ax.legend(fontsize="small")
    ax.set_title("Benchmark balanced accuracy")
    fig.tight_layout()
    path = out_dir / "balanced_accuracy.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    if arrays is None:
        return written

    for ds in datasets:
        fig, ax = plt.subplots(figsize=(4.5, 4.5))
        plotted = False
        for report, arr in zip(reports, arrays):
            if ds not in arr:
                continue
            a = arr[ds]
            fpr, tpr = _roc_points(a.test_labels, a.test_scores)
            auc = report.per_dataset[ds].roc_auc if ds in report.per_dataset else None
            label = report.scorer_name if auc is None else f"{report.scorer_name} (AUC {auc:.3f})"
            ax.plot(fpr, tpr, label=label, drawstyle="steps-post")
            plotted = True
        if not plotted:
            plt.close(fig)
            continue
        ax.plot([0, 1], [0, 1], linestyle=":", color="grey", linewidth=1)
        ax.set_xlabel("False positive rate")
        ax.set_ylabel("True positive rate")
        ax.set_title(f"ROC: {ds}")
        ax.legend(fontsize="small", loc="lower right")
        fig.tight_layout()
        path = out_dir / f"roc_curves_{ds}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    fig, axes = plt.subplots(len(reports), 1, sharex=True,
                             figsize=(6.0, 2.2 * len(reports)), squeeze=False)
    bins = np.linspace(0.0, 1.0, 33)
    for ax, (report, arr) in zip(axes[:, 0], zip(reports, arrays)):
        pooled_scores = np.concatenate([a.test_scores for a in arr.values()]) \
            if arr else np.empty(0)
        pooled_labels = np.concatenate([a.test_labels for a in arr.values()]) \
            if arr else np.empty(0, dtype=int)
        inside = np.clip(pooled_scores, 0.0, 1.0)
        ax.hist(inside[pooled_labels == 1], bins=bins, alpha=0.6,
                label="consistent", color="tab:green")
        ax.hist(inside[pooled_labels == 0], bins=bins, alpha=0.6,
                label="inconsistent", color="tab:red")
        ax.set_ylabel(report.scorer_name, fontsize="small")
        ax.legend(fontsize="x-small")
    axes[-1, 0].set_xlabel("Score")
    fig.suptitle("Test score distributions")
    fig.tight_layout()
    path = out_dir / "score_distributions.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written


def save_report_files(
    reports: Sequence[EvalReport],
    out_dir: str | Path,
    *,
    arrays: Sequence[dict] | None = None,
    figures: bool = True,
) -> dict[str, Path]:
    """Write report.json, leaderboard.txt, leaderboard.tsv and figures/."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    paths["report_json"] = out_dir / "report.json"
    paths["report_json"].write_text(report_json(reports), encoding="utf-8")
    paths["leaderboard_txt"] = out_dir / "leaderboard.txt"
    paths["leaderboard_txt"].write_text(leaderboard_text(reports), encoding="utf-8")
    paths["leaderboard_tsv"] = out_dir / "leaderboard.tsv"
    paths["leaderboard_tsv"].write_text(leaderboard_tsv(reports), encoding="utf-8")
    if figures:
        for p in render_figures(reports, out_dir / "figures", arrays):
            paths[p.name] = p
    return paths
