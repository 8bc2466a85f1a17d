"""Sentiment and multi-label emotion scores.

Conventions:
- precision, recall and F1 are 0 when their denominator is 0; the raw
  confusion counts are kept in the report so the context is not lost.
- weighted accuracy is the mean of positive-class recall and negative-class
  recall, (TP/P + TN/N) / 2. It is undefined (None) when gold has a single class.
- sentiment F1 is the binary F1 of the positive class.
- emotion averages cover the six emotions; no_emotion is reported but excluded.
"""

import json
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..core.config import Thresholds
from ..core.errors import DimensionError
from ..persistence.models import EMOTION_LABELS, NUM_EMOTIONS, SIX_EMOTIONS


@dataclass
class Confusion:
    """Binary confusion tallies of one class."""
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.tn + self.fp

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @classmethod
    def count(cls, pred: Sequence[int], gold: Sequence[int]) -> "Confusion":
        p = np.asarray(pred, dtype=np.int64)
        g = np.asarray(gold, dtype=np.int64)
        if p.shape != g.shape:
            raise DimensionError(f"pred/gold length mismatch: {p.shape} vs {g.shape}")
        if p.size == 0:
            raise DimensionError("pred/gold must not be empty")
        return cls(
            tp=int(np.sum((p == 1) & (g == 1))),
            fp=int(np.sum((p == 1) & (g == 0))),
            fn=int(np.sum((p == 0) & (g == 1))),
            tn=int(np.sum((p == 0) & (g == 0))),
        )


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


@dataclass
class BinaryScores:
    """Precision, recall, F1 (positive class) and accuracy."""
    precision: float
    recall: float
    f1: float
    accuracy: float


def scores_from_confusion(c: Confusion) -> BinaryScores:
    precision = _ratio(c.tp, c.tp + c.fp)
    recall = _ratio(c.tp, c.tp + c.fn)
    return BinaryScores(
        precision=precision,
        recall=recall,
        f1=_ratio(2 * precision * recall, precision + recall),
        accuracy=_ratio(c.tp + c.tn, c.total),
    )


def binary_prf(pred: Sequence[int], gold: Sequence[int]) -> BinaryScores:
    """Standard binary scores of the positive class."""
    return scores_from_confusion(Confusion.count(pred, gold))


def weighted_accuracy_from_confusion(c: Confusion) -> Optional[float]:
    if c.positives == 0 or c.negatives == 0:
        return None
    return (c.tp / c.positives + c.tn / c.negatives) / 2.0


def weighted_accuracy(pred: Sequence[int], gold: Sequence[int]) -> Optional[float]:
    """Balanced accuracy; None when gold holds a single class."""
    return weighted_accuracy_from_confusion(Confusion.count(pred, gold))


@dataclass
class SentimentReport:
    f1: float
    accuracy: float
    precision: float
    recall: float
    counts: Confusion


@dataclass
class EmotionClassReport:
    """One-vs-rest scores of one emotion class."""
    f1: float
    weighted_accuracy: Optional[float]
    counts_f1: Confusion
    counts_wacc: Confusion


@dataclass
class EmotionReport:
    per_class: Dict[str, EmotionClassReport]
    average_f1: float
    average_weighted_accuracy: Optional[float]
    wacc_defined_classes: int
    # utterances whose F1-threshold label set is empty
    empty_predictions: int
    thresholds: Dict[str, float]


@dataclass
class MetricsReport:
    """Per-task scores; a task absent from the model is None."""
    sentiment: Optional[SentimentReport] = None
    emotion: Optional[EmotionReport] = None
    num_utterances: int = 0
    extras: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def flat(self) -> Dict[str, Any]:
        """Flat key-value view used by the text rendering."""
        items: Dict[str, Any] = {'num_utterances': self.num_utterances}
        if self.sentiment is not None:
            s = self.sentiment
            items.update({
                'sentiment.f1': s.f1,
                'sentiment.accuracy': s.accuracy,
                'sentiment.precision': s.precision,
                'sentiment.recall': s.recall,
            })
        if self.emotion is not None:
            e = self.emotion
            for name, report in e.per_class.items():
                items[f'emotion.{name}.f1'] = report.f1
                items[f'emotion.{name}.weighted_accuracy'] = report.weighted_accuracy
            items['emotion.average.f1'] = e.average_f1
            items['emotion.average.weighted_accuracy'] = e.average_weighted_accuracy
            items['emotion.empty_predictions'] = e.empty_predictions
        return items

    def to_text(self) -> str:
        lines = []
        for key, value in self.flat().items():
            if value is None:
                rendered = 'undefined'
            elif isinstance(value, float):
                rendered = f'{value:.6f}'
            else:
                rendered = str(value)
            lines.append(f'{key} = {rendered}')
        return "\n".join(lines) + "\n"

    def selection_score(self) -> float:
        """Dev-set model selection score.

        Sentiment accuracy, emotion average weighted accuracy, or their mean.
        """
        scores = []
        if self.sentiment is not None:
            scores.append(self.sentiment.accuracy)
        if self.emotion is not None:
            wacc = self.emotion.average_weighted_accuracy
            scores.append(wacc if wacc is not None else self.emotion.average_f1)
        return float(np.mean(scores)) if scores else 0.0


def sentiment_report(pred: Sequence[int], gold: Sequence[int]) -> SentimentReport:
    counts = Confusion.count(pred, gold)
    scores = scores_from_confusion(counts)
    return SentimentReport(
        f1=scores.f1,
        accuracy=scores.accuracy,
        precision=scores.precision,
        recall=scores.recall,
        counts=counts,
    )


def multilabel_report(
    probs: np.ndarray,
    gold: np.ndarray,
    thresholds: Optional[Thresholds] = None
) -> EmotionReport:
    """
    Per-class emotion scores with metric-specific thresholds.

    F1 is computed on labels binarized at ``thresholds.f1`` and weighted
    accuracy on labels binarized at ``thresholds.wacc`` (strict ``>``).

    Args:
        probs: n x 7 sigmoid outputs
        gold: n x 7 gold flags
        thresholds: Binarization thresholds (0.4 / 0.2 by default)

    Returns:
        EmotionReport with six-class averages
    """
    thresholds = thresholds or Thresholds()
    probs = np.asarray(probs, dtype=np.float64)
    gold = np.asarray(gold, dtype=np.int64)
    if probs.ndim != 2 or probs.shape[1] != NUM_EMOTIONS or probs.shape != gold.shape:
        raise DimensionError(f"probs {probs.shape} and gold {gold.shape} must both be n x 7")

    labels_f1 = (probs > thresholds.f1).astype(np.int64)
    labels_wacc = (probs > thresholds.wacc).astype(np.int64)

    per_class: Dict[str, EmotionClassReport] = {}
    for index, name in enumerate(EMOTION_LABELS):
        counts_f1 = Confusion.count(labels_f1[:, index], gold[:, index])
        counts_wacc = Confusion.count(labels_wacc[:, index], gold[:, index])
        per_class[name] = EmotionClassReport(
            f1=scores_from_confusion(counts_f1).f1,
            weighted_accuracy=weighted_accuracy_from_confusion(counts_wacc),
            counts_f1=counts_f1,
            counts_wacc=counts_wacc,
        )

    f1_values = [per_class[name].f1 for name in SIX_EMOTIONS]
    wacc_values: List[float] = [
        per_class[name].weighted_accuracy
        for name in SIX_EMOTIONS
        if per_class[name].weighted_accuracy is not None
    ]
    return EmotionReport(
        per_class=per_class,
        average_f1=float(np.mean(f1_values)),
        average_weighted_accuracy=float(np.mean(wacc_values)) if wacc_values else None,
        wacc_defined_classes=len(wacc_values),
        empty_predictions=int(np.sum(labels_f1.sum(axis=1) == 0)),
        thresholds={'f1': thresholds.f1, 'wacc': thresholds.wacc},
    )
