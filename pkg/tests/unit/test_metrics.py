"""Unit tests for sentiment and emotion scoring."""

import numpy as np
import pytest

from intermodal_mtl.core.config import Thresholds
from intermodal_mtl.core.errors import DimensionError
from intermodal_mtl.processing.metrics import (
    Confusion,
    MetricsReport,
    binary_prf,
    multilabel_report,
    sentiment_report,
    weighted_accuracy,
)


class TestBinaryScores:
    """Precision, recall, F1 and weighted accuracy of one class."""

    def test_worked_example(self):
        pred = [1, 1, 0, 0, 1]
        gold = [1, 0, 0, 1, 1]
        scores = binary_prf(pred, gold)
        assert scores.precision == pytest.approx(2 / 3)
        assert scores.recall == pytest.approx(2 / 3)
        assert scores.f1 == pytest.approx(2 / 3)
        assert scores.accuracy == pytest.approx(3 / 5)
        assert weighted_accuracy(pred, gold) == pytest.approx((2 / 3 + 1 / 2) / 2)

    def test_no_predicted_positives_gives_zero(self):
        scores = binary_prf([0, 0, 0], [1, 0, 1])
        assert scores.precision == 0.0
        assert scores.f1 == 0.0

    def test_single_class_gold_has_no_weighted_accuracy(self):
        assert weighted_accuracy([1, 0, 1], [1, 1, 1]) is None
        assert weighted_accuracy([1, 0, 1], [0, 0, 0]) is None

    def test_perfect_prediction(self):
        gold = [0, 1, 1, 0]
        assert binary_prf(gold, gold).f1 == 1.0
        assert weighted_accuracy(gold, gold) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            Confusion.count([1, 0], [1])

    def test_empty_input(self):
        with pytest.raises(DimensionError):
            Confusion.count([], [])

    def test_matches_brute_force_counts(self):
        for seed in range(500):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(1, 30))
            pred = rng.integers(0, 2, size=n)
            gold = rng.integers(0, 2, size=n)
            tp = fp = fn = tn = 0
            for p, g in zip(pred, gold):
                if p and g:
                    tp += 1
                elif p:
                    fp += 1
                elif g:
                    fn += 1
                else:
                    tn += 1
            scores = binary_prf(pred, gold)
            precision = tp / (tp + fp) if tp + fp else 0.0
            recall = tp / (tp + fn) if tp + fn else 0.0
            f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
            assert scores.precision == pytest.approx(precision)
            assert scores.recall == pytest.approx(recall)
            assert scores.f1 == pytest.approx(f1)
            assert scores.accuracy == pytest.approx((tp + tn) / n)
            wacc = weighted_accuracy(pred, gold)
            if tp + fn and tn + fp:
                assert wacc == pytest.approx((tp / (tp + fn) + tn / (tn + fp)) / 2)
            else:
                assert wacc is None

    def test_weighted_accuracy_ignores_polarity(self):
        for seed in range(100):
            rng = np.random.default_rng(seed)
            pred = rng.integers(0, 2, size=12)
            gold = rng.integers(0, 2, size=12)
            assert weighted_accuracy(pred, gold) == weighted_accuracy(1 - pred, 1 - gold)

    def test_sentiment_report_keeps_counts(self):
        report = sentiment_report([1, 0, 1], [1, 1, 0])
        assert report.counts == Confusion(tp=1, fp=1, fn=1, tn=0)
        assert report.accuracy == pytest.approx(1 / 3)


def _gold_with_both_classes(n, rng):
    gold = rng.integers(0, 2, size=(n, 7))
    gold[0, :] = 1
    gold[1, :] = 0
    return gold


class TestMultilabelReport:
    """Per-class emotion scores with two thresholds."""

    def test_uniform_low_probabilities(self):
        gold = _gold_with_both_classes(6, np.random.default_rng(0))
        report = multilabel_report(np.full((6, 7), 0.3), gold)
        assert report.average_f1 == 0.0
        assert report.empty_predictions == 6
        # Everything is positive at the weighted-accuracy threshold
        assert report.average_weighted_accuracy == pytest.approx(0.5)
        assert report.wacc_defined_classes == 6

    def test_no_emotion_excluded_from_averages(self):
        rng = np.random.default_rng(1)
        gold = _gold_with_both_classes(10, rng)
        probs = rng.random((10, 7))
        report = multilabel_report(probs, gold)
        six = [report.per_class[name].f1 for name in list(report.per_class)[:6]]
        assert report.average_f1 == pytest.approx(np.mean(six))
        assert 'no_emotion' in report.per_class

    def test_threshold_is_strict(self):
        gold = np.zeros((2, 7), dtype=int)
        gold[0, 0] = 1
        probs = np.zeros((2, 7))
        probs[0, 0] = 0.4
        report = multilabel_report(probs, gold)
        assert report.per_class['anger'].counts_f1.tp == 0
        assert report.per_class['anger'].counts_wacc.tp == 1

    def test_equal_thresholds_give_equal_counts(self):
        rng = np.random.default_rng(2)
        gold = _gold_with_both_classes(8, rng)
        report = multilabel_report(rng.random((8, 7)), gold, Thresholds(f1=0.5, wacc=0.5))
        for cls in report.per_class.values():
            assert cls.counts_f1 == cls.counts_wacc

    def test_undefined_classes_skipped(self):
        gold = np.zeros((4, 7), dtype=int)
        gold[:2, 0] = 1
        report = multilabel_report(np.full((4, 7), 0.9), gold)
        assert report.wacc_defined_classes == 1
        assert report.per_class['disgust'].weighted_accuracy is None
        assert report.average_weighted_accuracy == pytest.approx(0.5)

    def test_all_undefined_gives_none(self):
        report = multilabel_report(np.full((3, 7), 0.9), np.zeros((3, 7), dtype=int))
        assert report.average_weighted_accuracy is None

    def test_shape_checked(self):
        with pytest.raises(DimensionError):
            multilabel_report(np.zeros((3, 6)), np.zeros((3, 6)))


class TestMetricsReport:
    """Rendering and model-selection score."""

    def _report(self):
        rng = np.random.default_rng(3)
        gold = _gold_with_both_classes(6, rng)
        return MetricsReport(
            sentiment=sentiment_report([1, 0, 1, 1], [1, 0, 0, 1]),
            emotion=multilabel_report(rng.random((6, 7)), gold),
            num_utterances=6,
        )

    def test_selection_score_is_mean_of_tasks(self):
        report = self._report()
        expected = (report.sentiment.accuracy + report.emotion.average_weighted_accuracy) / 2
        assert report.selection_score() == pytest.approx(expected)

    def test_selection_score_single_task(self):
        report = MetricsReport(sentiment=sentiment_report([1, 0], [1, 1]))
        assert report.selection_score() == pytest.approx(0.5)

    def test_text_marks_undefined(self):
        report = MetricsReport(
            emotion=multilabel_report(np.full((2, 7), 0.9), np.zeros((2, 7), dtype=int)),
            num_utterances=2,
        )
        text = report.to_text()
        assert 'emotion.average.weighted_accuracy = undefined' in text
        assert 'sentiment.f1' not in text

    def test_json_is_stable(self):
        report = self._report()
        assert report.to_json() == self._report().to_json()
        assert report.to_dict()['emotion']['thresholds'] == {'f1': 0.4, 'wacc': 0.2}
