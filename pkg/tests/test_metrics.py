import numpy as np
import pytest

from entailsum import (balanced_accuracy, bootstrap_compare,
                       bootstrap_diff_samples, fleiss_kappa, roc_auc,
                       select_threshold)
from entailsum.errors import SingleClassLabels, UnequalRaterCounts
from entailsum.metrics import ConfusionCounts, _threshold_candidates


# -------------------------------------------------------- balanced accuracy

def test_balanced_accuracy_hand_example():
    labels = [1, 1, 0, 0]
    preds = [True, False, False, False]
    assert balanced_accuracy(labels, preds) == 0.75  # sens 0.5, spec 1.0


def test_balanced_accuracy_perfect_and_inverted():
    labels = [0, 1, 0, 1, 1]
    assert balanced_accuracy(labels, [False, True, False, True, True]) == 1.0
    assert balanced_accuracy(labels, [True, False, True, False, False]) == 0.0


def test_constant_predictor_scores_exactly_one_half():
    rng = np.random.default_rng(31)
    for _ in range(100):
        n = int(rng.integers(2, 200))
        labels = rng.integers(0, 2, size=n)
        while labels.min() == labels.max():
            labels = rng.integers(0, 2, size=n)
        for value in (True, False):
            preds = np.full(n, value)
            assert balanced_accuracy(labels, preds) == 0.5


def test_balanced_accuracy_needs_both_classes():
    with pytest.raises(SingleClassLabels):
        balanced_accuracy([1, 1, 1], [True, True, False])


@pytest.mark.parametrize("labels,preds", [
    ([0, 1, 2], [True, True, False]),
    ([0, 1], [True]),
    ([], []),
])
def test_balanced_accuracy_input_validation(labels, preds):
    with pytest.raises(ValueError):
        balanced_accuracy(labels, preds)


def test_confusion_counts():
    c = ConfusionCounts.from_predictions([1, 1, 0, 0, 1],
                                         [True, False, True, False, True])
    assert (c.tp, c.fp, c.tn, c.fn) == (2, 1, 1, 1)


# ------------------------------------------------------------------ roc auc

def _auc_oracle(labels, scores):
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def test_roc_auc_perfect_reversed_and_tied():
    labels = np.array([0, 0, 1, 1])
    assert roc_auc(labels, [0.1, 0.2, 0.8, 0.9]) == 1.0
    assert roc_auc(labels, [0.9, 0.8, 0.2, 0.1]) == 0.0
    assert roc_auc(labels, [0.5, 0.5, 0.5, 0.5]) == 0.5


def test_roc_auc_hand_example():
    assert roc_auc([0, 1, 1, 0], [0.2, 0.3, 0.1, 0.4]) == 0.25


def test_roc_auc_matches_pairwise_oracle_with_ties():
    rng = np.random.default_rng(41)
    for _ in range(30):
        n = int(rng.integers(4, 60))
        labels = rng.integers(0, 2, size=n)
        while labels.min() == labels.max():
            labels = rng.integers(0, 2, size=n)
        # quantized scores so tie blocks actually occur
        scores = np.round(rng.random(n), 1)
        assert roc_auc(labels, scores) == pytest.approx(
            _auc_oracle(labels, scores), abs=1e-12)


def test_roc_auc_needs_both_classes_and_matching_shapes():
    with pytest.raises(SingleClassLabels):
        roc_auc([0, 0], [0.1, 0.2])
    with pytest.raises(ValueError):
        roc_auc([0, 1], [0.1, 0.2, 0.3])


# -------------------------------------------------------- threshold search

def test_select_threshold_returns_a_plain_float():
    t = select_threshold([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9])
    assert type(t) is float
    assert t == 0.5  # midpoint of the separating gap


def test_select_threshold_on_constant_scores_keeps_everything_positive():
    assert select_threshold([0, 1], [0.4, 0.4]) == -np.inf


def test_select_threshold_breaks_ties_toward_the_smallest():
    # anti-separating scores: both sentinels give 0.5, the midpoint gives 0
    assert select_threshold([1, 0], [0.2, 0.8]) == -np.inf


def test_select_threshold_matches_exhaustive_scan():
    rng = np.random.default_rng(43)
    for _ in range(30):
        n = int(rng.integers(4, 80))
        labels = rng.integers(0, 2, size=n)
        while labels.min() == labels.max():
            labels = rng.integers(0, 2, size=n)
        scores = np.round(rng.random(n), 2)
        t = select_threshold(labels, scores)
        achieved = balanced_accuracy(labels, scores >= t)
        best = max(balanced_accuracy(labels, scores >= c)
                   for c in _threshold_candidates(scores))
        assert achieved == pytest.approx(best, abs=1e-12)
        # no threshold anywhere can beat it: perturb around each score
        for c in np.concatenate([scores, scores - 1e-9, scores + 1e-9]):
            assert balanced_accuracy(labels, scores >= c) <= achieved + 1e-12


# -------------------------------------------------------------- fleiss kappa

def _fleiss_oracle(table):
    table = np.asarray(table, dtype=float)
    n_items = table.shape[0]
    n = table[0].sum()
    p_i = [(float(np.sum(row * row)) - n) / (n * (n - 1)) for row in table]
    p_bar = sum(p_i) / n_items
    p_j = table.sum(axis=0) / (n_items * n)
    p_e = float(np.sum(p_j * p_j))
    return (p_bar - p_e) / (1.0 - p_e)


def test_fleiss_perfect_agreement_is_exactly_one():
    assert fleiss_kappa([[5, 0], [5, 0], [0, 5]]) == 1.0


def test_fleiss_unanimous_single_category_is_one():
    assert fleiss_kappa([[3], [3], [3]]) == 1.0


def test_fleiss_even_split_is_negative():
    assert fleiss_kappa([[2, 2], [2, 2]]) == pytest.approx(-1.0 / 3.0)


def test_fleiss_matches_independent_formula_on_random_tables():
    rng = np.random.default_rng(47)
    done = 0
    while done < 20:
        n_items = int(rng.integers(2, 9))
        n_cats = int(rng.integers(2, 6))
        raters = int(rng.integers(2, 8))
        probs = rng.dirichlet(np.ones(n_cats))
        table = np.array([rng.multinomial(raters, probs)
                          for _ in range(n_items)])
        if np.count_nonzero(table.sum(axis=0)) < 2:
            continue  # everything in one category: agreement is undefined
        assert fleiss_kappa(table) == pytest.approx(
            _fleiss_oracle(table), abs=1e-12)
        done += 1


def test_fleiss_requires_equal_rater_counts():
    with pytest.raises(UnequalRaterCounts):
        fleiss_kappa([[2, 1], [1, 1]])
    with pytest.raises(UnequalRaterCounts):
        fleiss_kappa([[1, 0], [0, 1]])  # single rater


@pytest.mark.parametrize("table", [
    [[3, -1], [1, 1]],
    [[1.5, 0.5], [1, 1]],
    [],
    [3, 0],
])
def test_fleiss_rejects_malformed_tables(table):
    with pytest.raises(ValueError):
        fleiss_kappa(table)


# ---------------------------------------------------------------- bootstrap

def _perfect_setup(n=40):
    labels = np.array([0, 1] * (n // 2))
    scores_good = labels.astype(float)
    scores_bad = 1.0 - scores_good
    return labels, scores_good, scores_bad


def test_bootstrap_diff_direction_is_first_minus_second():
    labels, good, bad = _perfect_setup()
    diffs, point, _ = bootstrap_diff_samples(labels, good, bad, (0.5, 0.5),
                                             n_resamples=1000, seed=0)
    assert point == 1.0
    assert np.all(diffs == 1.0)
    diffs_r, point_r, _ = bootstrap_diff_samples(labels, bad, good, (0.5, 0.5),
                                                 n_resamples=1000, seed=0)
    assert point_r == -1.0
    assert np.all(diffs_r == -1.0)


def test_bootstrap_is_deterministic_per_seed():
    rng = np.random.default_rng(53)
    labels = rng.integers(0, 2, size=60)
    labels[:2] = [0, 1]
    sa, sb = rng.random(60), rng.random(60)
    d1, p1, r1 = bootstrap_diff_samples(labels, sa, sb, (0.5, 0.5),
                                        n_resamples=1000, seed=99)
    d2, p2, r2 = bootstrap_diff_samples(labels, sa, sb, (0.5, 0.5),
                                        n_resamples=1000, seed=99)
    assert np.array_equal(d1, d2) and p1 == p2 and r1 == r2
    d3, _, _ = bootstrap_diff_samples(labels, sa, sb, (0.5, 0.5),
                                      n_resamples=1000, seed=100)
    assert not np.array_equal(d1, d3)


def test_bootstrap_accepts_a_seed_sequence():
    labels, good, bad = _perfect_setup(10)
    seed = np.random.SeedSequence([7, 3])
    _, point, _ = bootstrap_diff_samples(labels, good, bad, (0.5, 0.5),
                                         n_resamples=1000, seed=seed)
    assert point == 1.0


def test_bootstrap_enforces_the_resample_floor():
    labels, good, bad = _perfect_setup(10)
    with pytest.raises(ValueError, match="1000"):
        bootstrap_diff_samples(labels, good, bad, (0.5, 0.5), n_resamples=999)


def test_bootstrap_redraws_single_class_resamples():
    labels = np.array([1, 0, 0, 0, 0])  # lone positive vanishes often
    scores = np.array([0.9, 0.1, 0.2, 0.3, 0.4])
    diffs, _, redrawn = bootstrap_diff_samples(labels, scores, scores,
                                               (0.5, 0.5), n_resamples=1000,
                                               seed=1)
    assert redrawn > 0
    assert diffs.shape == (1000,)
    assert np.all(np.isfinite(diffs))


def test_compare_identical_scorers_is_not_significant():
    rng = np.random.default_rng(59)
    labels = rng.integers(0, 2, size=50)
    labels[:2] = [0, 1]
    scores = rng.random(50)
    result = bootstrap_compare(labels, scores, scores, (0.5, 0.5),
                               n_resamples=1000)
    assert result.diff_point_estimate == 0.0
    assert not result.significant
    assert result.ci_low == result.ci_high == 0.0


def test_compare_perfect_vs_inverted_is_significant():
    labels, good, bad = _perfect_setup(60)
    result = bootstrap_compare(labels, good, bad, (0.5, 0.5),
                               n_resamples=1000, alpha=0.05, n_tests=10)
    assert result.significant
    assert result.ci_low > 0.0
    assert result.alpha_corrected == pytest.approx(0.005)
    flipped = bootstrap_compare(labels, bad, good, (0.5, 0.5),
                                n_resamples=1000)
    assert flipped.significant and flipped.ci_high < 0.0


def test_compare_correction_widens_the_interval():
    rng = np.random.default_rng(61)
    labels = rng.integers(0, 2, size=100)
    labels[:2] = [0, 1]
    sa, sb = rng.random(100), rng.random(100)
    plain = bootstrap_compare(labels, sa, sb, (0.5, 0.5),
                              n_resamples=2000, n_tests=1, seed=4)
    strict = bootstrap_compare(labels, sa, sb, (0.5, 0.5),
                               n_resamples=2000, n_tests=10, seed=4)
    assert strict.ci_low <= plain.ci_low
    assert strict.ci_high >= plain.ci_high


def test_compare_validates_alpha_and_n_tests():
    labels, good, bad = _perfect_setup(10)
    with pytest.raises(ValueError):
        bootstrap_compare(labels, good, bad, (0.5, 0.5), n_tests=0)
    for alpha in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            bootstrap_compare(labels, good, bad, (0.5, 0.5), alpha=alpha)
