"""Evaluation metrics and statistical comparison, implemented from scratch.

Everything here is deliberately dependency-free (numpy only) so the test
suite can check each routine against an independent brute-force oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SingleClassLabels, UndefinedAgreement, UnequalRaterCounts


def _as_label_array(labels) -> np.ndarray:
    arr = np.asarray(labels, dtype=int)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("labels must be a non-empty 1-d sequence")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    return arr


def _require_both_classes(labels: np.ndarray, what: str) -> None:
    if labels.min() == labels.max():
        raise SingleClassLabels(f"{what} requires both classes, got only {labels[0]}")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @classmethod
    def from_predictions(cls, labels, predictions) -> "ConfusionCounts":
        lab = _as_label_array(labels)
        pred = np.asarray(predictions, dtype=bool)
        if pred.shape != lab.shape:
            raise ValueError("labels and predictions differ in length")
        pos = lab == 1
        return cls(
            tp=int(np.sum(pred & pos)),
            fp=int(np.sum(pred & ~pos)),
            tn=int(np.sum(~pred & ~pos)),
            fn=int(np.sum(~pred & pos)),
        )


def balanced_accuracy(labels, predictions) -> float:
    """Mean of sensitivity and specificity. Needs both classes present."""
    lab = _as_label_array(labels)
    _require_both_classes(lab, "balanced accuracy")
    c = ConfusionCounts.from_predictions(lab, predictions)
    sensitivity = c.tp / (c.tp + c.fn)
    specificity = c.tn / (c.tn + c.fp)
    return 0.5 * (sensitivity + specificity)


def roc_auc(labels, scores) -> float:
    """Area under the ROC curve via average ranks; ties get half credit."""
    lab = _as_label_array(labels)
    _require_both_classes(lab, "ROC AUC")
    s = np.asarray(scores, dtype=float)
    if s.shape != lab.shape:
        raise ValueError("labels and scores differ in length")
    order = np.argsort(s, kind="stable")
    ranks = np.empty(len(s), dtype=float)
    sorted_scores = s[order]
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0  # 1-based average rank
        i = j + 1
    n_pos = int(lab.sum())
    n_neg = len(lab) - n_pos
    rank_sum_pos = float(ranks[lab == 1].sum())
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _threshold_candidates(scores: np.ndarray) -> np.ndarray:
    distinct = np.unique(scores)
    mids = (distinct[:-1] + distinct[1:]) / 2.0
    return np.concatenate(([-np.inf], mids, [np.inf]))


def select_threshold(labels, scores) -> float:
    """Threshold maximizing balanced accuracy under 'score >= t is positive'.

    Candidates are midpoints between adjacent distinct scores plus two
    sentinels (everything positive / everything negative). Scanned in
    ascending order with strict improvement, so ties resolve to the
    smallest threshold.
    """
    lab = _as_label_array(labels)
    _require_both_classes(lab, "threshold selection")
    s = np.asarray(scores, dtype=float)
    if s.shape != lab.shape:
        raise ValueError("labels and scores differ in length")
    best_t = -np.inf
    best_bacc = -1.0
    for t in _threshold_candidates(s):
        bacc = balanced_accuracy(lab, s >= t)
        if bacc > best_bacc:
            best_bacc = bacc
            best_t = float(t)
    return best_t


def fleiss_kappa(counts: Sequence[Sequence[int]]) -> float:
    """Chance-corrected agreement from an items x categories count table.

    counts[i][k] is how many raters put item i in category k; every item
    must have the same total rater count (>= 2).
    """
    table = np.asarray(counts, dtype=float)
    if table.ndim != 2 or table.size == 0:
        raise ValueError("counts must be a non-empty items x categories table")
    if np.any(table < 0) or np.any(table != np.floor(table)):
        raise ValueError("counts must be non-negative integers")
    raters = table.sum(axis=1)
    n_raters = raters[0]
    if np.any(raters != n_raters):
        bad = int(np.flatnonzero(raters != n_raters)[0])
        raise UnequalRaterCounts(
            f"item {bad} has {int(raters[bad])} ratings, expected {int(n_raters)}"
        )
    if n_raters < 2:
        raise UnequalRaterCounts("need at least two raters per item")
    p_item = (np.sum(table * table, axis=1) - n_raters) / (n_raters * (n_raters - 1))
    p_bar = float(np.mean(p_item))
    p_cat = table.sum(axis=0) / table.sum()
    p_exp = float(np.sum(p_cat * p_cat))
    if p_exp >= 1.0:
        if p_bar >= 1.0:
            return 1.0  # unanimous single category: perfect agreement
        raise UndefinedAgreement("expected agreement is 1 but observed is not")
    return (p_bar - p_exp) / (1.0 - p_exp)


@dataclass(frozen=True)
class SignificanceResult:
    """Outcome of a paired bootstrap comparison of two scorers."""

    diff_point_estimate: float  # metric(a) - metric(b) on the full sample
    ci_low: float
    ci_high: float
    alpha: float
    alpha_corrected: float
    significant: bool  # the confidence interval excludes zero
    n_resamples: int
    resamples_redrawn: int


def _bacc_rows(lab_mat: np.ndarray, pred_mat: np.ndarray) -> np.ndarray:
    pos = lab_mat.sum(axis=1)
    neg = lab_mat.shape[1] - pos
    tp = np.sum(pred_mat & (lab_mat == 1), axis=1)
    tn = np.sum(~pred_mat & (lab_mat == 0), axis=1)
    return 0.5 * (tp / pos + tn / neg)


def bootstrap_diff_samples(
    labels,
    scores_a,
    scores_b,
    thresholds: tuple[float, float],
    *,
    n_resamples: int = 10_000,
    seed=0,
) -> tuple[np.ndarray, float, int]:
    """Paired bootstrap distribution of bacc(a) - bacc(b).

    Resamples where only one class survives are redrawn (capped at ten
    times n_resamples total). Returns (diffs, point_estimate, redrawn).
    The seed can be anything numpy's default_rng accepts.
    """
    lab = _as_label_array(labels)
    _require_both_classes(lab, "bootstrap comparison")
    if n_resamples < 1000:
        raise ValueError("n_resamples must be at least 1000")
    sa = np.asarray(scores_a, dtype=float)
    sb = np.asarray(scores_b, dtype=float)
    if sa.shape != lab.shape or sb.shape != lab.shape:
        raise ValueError("labels and scores differ in length")
    ta, tb = thresholds
    pred_a = sa >= ta
    pred_b = sb >= tb
    point = balanced_accuracy(lab, pred_a) - balanced_accuracy(lab, pred_b)

    rng = np.random.default_rng(seed)
    n = len(lab)
    idx = rng.integers(0, n, size=(n_resamples, n))
    redrawn = 0
    budget = 10 * n_resamples
    while True:
        row_pos = lab[idx].sum(axis=1)
        bad = (row_pos == 0) | (row_pos == n)
        n_bad = int(bad.sum())
        if n_bad == 0:
            break
        redrawn += n_bad
        if redrawn > budget:
            raise SingleClassLabels(
                "bootstrap resampling keeps producing single-class resamples"
            )
        idx[bad] = rng.integers(0, n, size=(n_bad, n))
    lab_mat = lab[idx]
    diffs = _bacc_rows(lab_mat, pred_a[idx]) - _bacc_rows(lab_mat, pred_b[idx])
    return diffs, point, redrawn


def bootstrap_compare(
    labels,
    scores_a,
    scores_b,
    thresholds: tuple[float, float],
    *,
    n_resamples: int = 10_000,
    alpha: float = 0.05,
    n_tests: int = 1,
    seed=0,
) -> SignificanceResult:
    """Compare two scorers on the same samples (difference = a minus b).

    The percentile confidence interval uses a Bonferroni-corrected level
    alpha / n_tests; the comparison counts as significant when the
    interval excludes zero.
    """
    if n_tests < 1:
        raise ValueError("n_tests must be >= 1")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must be in (0, 1)")
    diffs, point, redrawn = bootstrap_diff_samples(
        labels, scores_a, scores_b, thresholds,
        n_resamples=n_resamples, seed=seed,
    )
    corrected = alpha / n_tests
    ci_low = float(np.quantile(diffs, corrected / 2.0))
    ci_high = float(np.quantile(diffs, 1.0 - corrected / 2.0))
    return SignificanceResult(
        diff_point_estimate=float(point),
        ci_low=ci_low,
        ci_high=ci_high,
        alpha=alpha,
        alpha_corrected=corrected,
        significant=bool(ci_low > 0.0 or ci_high < 0.0),
        n_resamples=n_resamples,
        resamples_redrawn=redrawn,
    )
