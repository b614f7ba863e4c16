"""Core emotrust components and shared vocabulary."""

from emotrust.core.exceptions import (
    AttackError,
    ConfigError,
    DataError,
    EmotrustError,
    MetricError,
    ModelError,
    ProfileError,
    TensorError,
    TrainingError,
)
from emotrust.core.types import AXES, EMOTIONS, GENDERS, Axis, Emotion, Gender

__all__ = [
    "EmotrustError",
    "TensorError",
    "DataError",
    "ConfigError",
    "ModelError",
    "TrainingError",
    "AttackError",
    "MetricError",
    "ProfileError",
    "Axis",
    "AXES",
    "Emotion",
    "EMOTIONS",
    "Gender",
    "GENDERS",
]
