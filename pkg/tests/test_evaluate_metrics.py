"""Metric correctness against brute-force oracles and hand-counted cases."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from healthpipe.core import ErrorCode, TaskKind, ValidationError
from healthpipe.evaluate import (
    DegenerateLabels,
    accuracy,
    auprc,
    auroc,
    f1,
    label_check,
    micro_f1,
    precision,
    recall,
    top1_accuracy,
)


def pairwise_auroc(scores, y):
    """O(n^2) concordance count; ties half credit. The definition, verbatim."""
    pos = [s for s, t in zip(scores, y) if t == 1]
    neg = [s for s, t in zip(scores, y) if t == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def enumerated_ap(scores, y):
    """Average precision by direct enumeration, stable tie order."""
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    hits = 0
    total = 0.0
    for rank, i in enumerate(order, start=1):
        if y[i] == 1:
            hits += 1
            total += hits / rank
    return total / hits


def random_binary_instance(rng, n, tie_prone=True):
    y = rng.integers(0, 2, size=n)
    if y.sum() == 0:
        y[rng.integers(0, n)] = 1
    if y.sum() == n:
        y[rng.integers(0, n)] = 0
    if tie_prone:
        # coarse grid forces score collisions
        scores = rng.integers(0, 5, size=n) / 4.0
    else:
        scores = rng.random(n)
    return scores, y


class TestLabelCheck:
    def test_single_column_is_binary(self):
        assert label_check([[0], [1], [1]]) is TaskKind.BINARY

    def test_one_hot_rows_are_multiclass(self):
        assert label_check([[1, 0, 0], [0, 0, 1]]) is TaskKind.MULTICLASS

    def test_other_rows_are_multilabel(self):
        assert label_check([[1, 1, 0], [0, 0, 0]]) is TaskKind.MULTILABEL

    def test_one_dimensional_labels_are_binary(self):
        assert label_check([0, 1, 0]) is TaskKind.BINARY

    def test_fractional_entry_rejected(self):
        with pytest.raises(ValidationError) as exc_info:
            label_check([[0.5], [1.0]])
        assert exc_info.value.code is ErrorCode.RANGE_VIOLATION

    def test_out_of_range_entry_rejected(self):
        with pytest.raises(ValidationError):
            label_check([[2, 0], [0, 1]])
        with pytest.raises(ValidationError):
            label_check([[-1], [0]])

    def test_empty_rejected(self):
        with pytest.raises(ValidationError) as exc_info:
            label_check(np.zeros((0, 2)))
        assert exc_info.value.code is ErrorCode.EMPTY_INPUT

    @given(st.integers(0, 2**32), st.integers(2, 20), st.integers(2, 5))
    @settings(max_examples=60, deadline=None)
    def test_row_permutation_invariance(self, seed, n, d):
        rng = np.random.default_rng(seed)
        y = (rng.random((n, d)) < 0.4).astype(float)
        kind = label_check(y)
        perm = rng.permutation(n)
        assert label_check(y[perm]) is kind

    @given(st.integers(0, 2**32), st.integers(2, 20), st.integers(2, 5))
    @settings(max_examples=60, deadline=None)
    def test_column_permutation_invariance(self, seed, n, d):
        rng = np.random.default_rng(seed)
        y = np.eye(d)[rng.integers(0, d, size=n)]
        if rng.random() < 0.5:
            y[0] = 0.0  # break one-hotness half the time
        kind = label_check(y)
        perm = rng.permutation(d)
        assert label_check(y[:, perm]) is kind


class TestAuroc:
    def test_perfect_ranking(self):
        assert auroc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_all_ties_is_half(self):
        assert auroc([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0]) == 0.5

    def test_hand_counted_pairs(self):
        # pairs: (0.8>0.4) yes, (0.8>0.3) yes, (0.2>0.4) no, (0.2>0.3) no
        assert auroc([0.4, 0.8, 0.2, 0.3], [0, 1, 1, 0]) == 0.5

    def test_single_class_raises(self):
        with pytest.raises(DegenerateLabels):
            auroc([0.1, 0.9], [1, 1])
        with pytest.raises(DegenerateLabels):
            auroc([0.1, 0.9], [0, 0])

    @pytest.mark.parametrize("seed", range(30))
    def test_matches_pairwise_oracle(self, seed):
        rng = np.random.default_rng(seed)
        scores, y = random_binary_instance(rng, int(rng.integers(2, 50)))
        assert abs(auroc(scores, y) - pairwise_auroc(scores, y)) <= 1e-12

    @pytest.mark.parametrize("seed", range(10))
    def test_monotone_transform_invariance(self, seed):
        rng = np.random.default_rng(seed)
        scores, y = random_binary_instance(rng, 30)
        transformed = np.exp(2.5 * scores) + 7.0
        assert abs(auroc(scores, y) - auroc(transformed, y)) <= 1e-12

    @pytest.mark.parametrize("seed", range(10))
    def test_reflection_symmetry_without_ties(self, seed):
        rng = np.random.default_rng(seed)
        scores, y = random_binary_instance(rng, 20, tie_prone=False)
        assert auroc(scores, y) + auroc(-scores + 1.0, y) == pytest.approx(1.0, abs=1e-12)


class TestAuprc:
    def test_positive_ranked_first(self):
        assert auprc([0.9, 0.1], [1, 0]) == 1.0

    def test_positive_ranked_second(self):
        assert auprc([0.9, 0.1], [0, 1]) == 0.5

    def test_all_positive(self):
        assert auprc([0.3, 0.7, 0.1], [1, 1, 1]) == 1.0

    def test_no_positive_raises(self):
        with pytest.raises(DegenerateLabels):
            auprc([0.4, 0.6], [0, 0])

    def test_stable_tie_order(self):
        # all scores equal: ranking is input order, positives at ranks 1 and 3
        assert auprc([0.5, 0.5, 0.5], [1, 0, 1]) == pytest.approx((1.0 + 2.0 / 3.0) / 2.0)

    @pytest.mark.parametrize("seed", range(30))
    def test_matches_enumeration_oracle(self, seed):
        rng = np.random.default_rng(seed)
        scores, y = random_binary_instance(rng, int(rng.integers(2, 50)))
        assert abs(auprc(scores, y) - enumerated_ap(scores, y)) <= 1e-12


class TestThresholded:
    def test_perfect_predictions(self):
        y = [1, 0, 1, 0]
        for metric in (accuracy, precision, recall, f1):
            assert metric([1.0, 0.0, 1.0, 0.0], y) == 1.0

    def test_hand_counted_confusion(self):
        # TP=1 FP=1 FN=1 TN=1
        y = [1, 1, 0, 0]
        s = [0.9, 0.1, 0.9, 0.1]
        assert accuracy(s, y) == 0.5
        assert precision(s, y) == 0.5
        assert recall(s, y) == 0.5
        assert f1(s, y) == 0.5

    def test_no_predicted_positives_precision_zero(self):
        assert precision([0.1, 0.2], [1, 0]) == 0.0

    def test_no_actual_positives_recall_zero(self):
        assert recall([0.9, 0.9], [0, 0]) == 0.0

    def test_f1_zero_when_both_zero(self):
        assert f1([0.1, 0.1], [0, 0]) == 0.0

    def test_threshold_is_inclusive(self):
        assert accuracy([0.5], [1]) == 1.0

    def test_micro_f1_pools_columns(self):
        y = np.array([[1, 0], [0, 1]])
        s = np.array([[0.9, 0.9], [0.1, 0.9]])
        # pooled: TP=2 FP=1 FN=0 -> p=2/3, r=1, f1=0.8
        assert micro_f1(s, y) == pytest.approx(0.8)


class TestTop1:
    def test_counts_argmax_hits(self):
        y = np.array([[1, 0, 0], [0, 1, 0]])
        s = np.array([[0.7, 0.2, 0.1], [0.5, 0.3, 0.2]])
        assert top1_accuracy(s, y) == 0.5
