"""
Classification Metrics
======================

Grouped prediction records, confusion matrices, UAR and accuracy.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import structlog
from sklearn import metrics as skm

from emotrust.core.exceptions import MetricError
from emotrust.core.types import Gender

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class GroupedPredictions:
    """Per-item true label, predicted label and optional protected group."""

    y_true: np.ndarray
    y_pred: np.ndarray
    num_classes: int
    groups: Optional[np.ndarray] = None
    warnings: List[str] = field(default_factory=list)

    @classmethod
    def build(
        cls,
        y_true: Sequence[int],
        y_pred: Sequence[int],
        num_classes: Optional[int] = None,
        groups: Optional[Sequence[object]] = None,
    ) -> "GroupedPredictions":
        truth = np.asarray(y_true, dtype=np.int64).reshape(-1)
        pred = np.asarray(y_pred, dtype=np.int64).reshape(-1)
        if truth.shape != pred.shape:
            raise MetricError(
                f"{len(truth)} true labels but {len(pred)} predictions", metric="predictions"
            )
        if num_classes is None:
            num_classes = int(max(truth.max(initial=0), pred.max(initial=0))) + 1
        if truth.size and (truth.min() < 0 or pred.min() < 0):
            raise MetricError("Labels must be non-negative", metric="predictions")
        if truth.size and max(truth.max(), pred.max()) >= num_classes:
            raise MetricError(f"Labels must be below {num_classes}", metric="predictions")

        group_array = None
        if groups is not None:
            group_array = np.asarray([Gender(g).value for g in groups], dtype=object)
            if group_array.shape != truth.shape:
                raise MetricError("One group per item is required", metric="predictions")
        return cls(truth, pred, num_classes, group_array)

    def __len__(self) -> int:
        return int(self.y_true.size)

    def select(self, group: Gender) -> "GroupedPredictions":
        if self.groups is None:
            raise MetricError("Predictions carry no group labels", metric="predictions")
        mask = self.groups == Gender(group).value
        return GroupedPredictions(self.y_true[mask], self.y_pred[mask], self.num_classes)


def confusion_matrix(preds: GroupedPredictions) -> np.ndarray:
    """Counts indexed [true, predicted], one row and column per class."""
    labels = np.arange(preds.num_classes)
    return skm.confusion_matrix(preds.y_true, preds.y_pred, labels=labels).astype(np.int64)


def uar(preds: GroupedPredictions) -> float:
    """
    Unweighted average recall over the classes present in the true labels.

    Classes with no true instances are excluded and reported as a warning.
    """
    if len(preds) == 0:
        raise MetricError("UAR of an empty prediction set", metric="uar")
    present = np.unique(preds.y_true)
    if present.size < preds.num_classes:
        absent = sorted(set(range(preds.num_classes)) - set(present.tolist()))
        message = f"classes {absent} absent from true labels; excluded from UAR"
        preds.warnings.append(message)
        logger.warning("Absent classes excluded from UAR", classes=absent)
    return float(
        skm.recall_score(
            preds.y_true, preds.y_pred, labels=present, average="macro", zero_division=0
        )
    )


def accuracy(preds: GroupedPredictions) -> float:
    if len(preds) == 0:
        raise MetricError("Accuracy of an empty prediction set", metric="accuracy")
    return float(skm.accuracy_score(preds.y_true, preds.y_pred))
