"""
Group Fairness
==============

Gender-gap metrics over grouped predictions, in percent. Multi-class rates
are one-vs-rest: for class c, TPR_c = P(pred = c | true = c) and
FPR_c = P(pred = c | true != c) within a group.
"""

from typing import List, Optional, Tuple

import numpy as np
import structlog

from emotrust.core.exceptions import MetricError
from emotrust.core.types import Gender
from emotrust.metrics.classification import GroupedPredictions

logger = structlog.get_logger(__name__)


def _split(preds: GroupedPredictions, metric: str) -> Tuple[GroupedPredictions, GroupedPredictions]:
    if preds.groups is None:
        raise MetricError("Fairness metrics need group labels", metric=metric)
    female, male = preds.select(Gender.FEMALE), preds.select(Gender.MALE)
    for group, subset in ((Gender.FEMALE, female), (Gender.MALE, male)):
        if len(subset) == 0:
            raise MetricError(f"Group '{group.value}' is empty", metric=metric)
    return female, male


def _rate(hit: np.ndarray, given: np.ndarray) -> Optional[float]:
    n = int(given.sum())
    if n == 0:
        return None
    return float((hit & given).sum()) / n


def _class_rates(g: GroupedPredictions, c: int) -> Tuple[Optional[float], Optional[float]]:
    predicted = g.y_pred == c
    actual = g.y_true == c
    return _rate(predicted, actual), _rate(predicted, ~actual)


def _rate_gaps(
    preds: GroupedPredictions, metric: str, use_fpr: bool
) -> List[float]:
    female, male = _split(preds, metric)
    present = set(np.unique(preds.y_true).tolist())
    gaps: List[float] = []
    for c in range(preds.num_classes):
        if c not in present:
            continue
        tpr_f, fpr_f = _class_rates(female, c)
        tpr_m, fpr_m = _class_rates(male, c)
        if tpr_f is None or tpr_m is None or (use_fpr and (fpr_f is None or fpr_m is None)):
            message = f"class {c} has undefined rates in one group; skipped in {metric}"
            preds.warnings.append(message)
            logger.warning("Class skipped in fairness metric", metric=metric, label=c)
            continue
        gap = abs(tpr_f - tpr_m)
        if use_fpr:
            gap = (gap + abs(fpr_f - fpr_m)) / 2.0  # type: ignore[operator]
        gaps.append(gap)
    if not gaps:
        raise MetricError("No class has defined rates in both groups", metric=metric)
    return gaps


def equality_of_odds(preds: GroupedPredictions) -> float:
    """
    100 * mean over classes of (|TPR gap| + |FPR gap|) / 2.

    Classes whose rates are undefined in either group are skipped with a
    warning.
    """
    return 100.0 * float(np.mean(_rate_gaps(preds, "equality_of_odds", use_fpr=True)))


def equal_opportunity(preds: GroupedPredictions) -> float:
    """100 * mean over classes of the TPR gap only."""
    return 100.0 * float(np.mean(_rate_gaps(preds, "equal_opportunity", use_fpr=False)))


def statistical_parity(preds: GroupedPredictions) -> float:
    """100 * mean over classes of |P(pred = c | female) - P(pred = c | male)|."""
    female, male = _split(preds, "statistical_parity")
    gaps = [
        abs(float(np.mean(female.y_pred == c)) - float(np.mean(male.y_pred == c)))
        for c in range(preds.num_classes)
    ]
    return 100.0 * float(np.mean(gaps))
