"""
Trust-axis measurements.

Import the gender probe from ``emotrust.metrics.privacy``.
"""

from emotrust.metrics.classification import GroupedPredictions, accuracy, confusion_matrix, uar
from emotrust.metrics.fairness import equal_opportunity, equality_of_odds, statistical_parity
from emotrust.metrics.flops import FlopsReport, FlopsStage, flops_count
from emotrust.metrics.report import MetricsReport, load_report

__all__ = [
    "GroupedPredictions",
    "confusion_matrix",
    "uar",
    "accuracy",
    "equality_of_odds",
    "equal_opportunity",
    "statistical_parity",
    "flops_count",
    "FlopsReport",
    "FlopsStage",
    "MetricsReport",
    "load_report",
]
