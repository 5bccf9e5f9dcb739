from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from errors import DimensionMismatchError, EmptySetError, InvalidInputError, UndefinedMetricError


def _check_inputs(values: Sequence[float], labels: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    values = np.asarray(values, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if len(values) != len(labels):
        raise DimensionMismatchError(len(labels), len(values), "predictions")
    if len(values) == 0:
        raise EmptySetError("metrics of an empty set are undefined")
    if not np.all((labels == 0) | (labels == 1)):
        raise InvalidInputError("labels must be 0 or 1")
    return values, labels.astype(bool)


def brier(probs: Sequence[float], labels: Sequence[int]) -> float:
    """Mean squared error between probabilities and binary labels.
    :param probs: predicted probabilities in [0, 1]
    :param labels: ground truth labels
    :return: Brier score in [0, 1]
    """
    probs, labels = _check_inputs(probs, labels)
    if np.any((probs < 0) | (probs > 1)):
        raise InvalidInputError("probabilities must lie in [0, 1]")
    return float(np.mean((probs - labels) ** 2))


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Wilcoxon-Mann-Whitney AUC: share of (positive, negative) pairs won by the positive, ties count 1/2.
    Computed from average ranks, which reproduces the pairwise count exactly: the rank sum is a
    multiple of 1/2 and stays exact in double precision.
    :param scores: any real-valued scores
    :param labels: ground truth labels
    :return: AUC in [0, 1]
    """
    scores, labels = _check_inputs(scores, labels)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC", f"needs both classes, got {n_pos} positives and {n_neg} negatives")
    ranks = rankdata(scores, method="average")
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def iou(probs: Sequence[float], labels: Sequence[int], tau: float = 0.5) -> float:
    """Intersection over union of {p >= tau} and the positive set.
    :param probs: predicted probabilities
    :param labels: ground truth labels
    :param tau: decision threshold in (0, 1)
    :return: IoU in [0, 1]; raises when both sets are empty
    """
    if not 0.0 < tau < 1.0:
        raise InvalidInputError(f"tau must lie in (0, 1), got {tau}")
    probs, labels = _check_inputs(probs, labels)
    predicted = probs >= tau
    union = np.logical_or(predicted, labels).sum()
    if union == 0:
        raise UndefinedMetricError("IoU", "no predicted and no actual positives")
    return float(np.logical_and(predicted, labels).sum() / union)


@dataclass
class MetricsReport:
    """Brier/AUC/IoU of one evaluation; undefined metrics are None."""
    brier: float
    auc: Optional[float]
    iou: Optional[float]
    tau: float
    n_pos: int
    n_neg: int
    bce: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(probs: Sequence[float], labels: Sequence[int], tau: float = 0.5,
             bce: Optional[float] = None) -> MetricsReport:
    probs, labels_b = _check_inputs(probs, labels)

    def _defined(metric, *args) -> Optional[float]:
        try:
            return metric(*args)
        except UndefinedMetricError:
            return None

    n_pos = int(labels_b.sum())
    return MetricsReport(brier=brier(probs, labels_b),
                         auc=_defined(auc, probs, labels_b),
                         iou=_defined(iou, probs, labels_b, tau),
                         tau=tau,
                         n_pos=n_pos,
                         n_neg=len(labels_b) - n_pos,
                         bce=bce)
