"""Head training, prediction and cross-validation."""

from emotrust.training.config import TrainConfig
from emotrust.training.crossval import CrossValidationResult, FoldResult, cross_validate
from emotrust.training.data import Example, load_examples
from emotrust.training.optimizer import Adam
from emotrust.training.trainer import EpochRecord, Prediction, TrainedModel, predict, train

__all__ = [
    "TrainConfig",
    "Adam",
    "Example",
    "load_examples",
    "EpochRecord",
    "Prediction",
    "TrainedModel",
    "train",
    "predict",
    "FoldResult",
    "CrossValidationResult",
    "cross_validate",
]
