"""
Emotrust Core Types
===================

Shared enumerations and engine-wide constants. Records that belong to a
single module live next to that module; only vocabulary used across module
boundaries is defined here.
"""

from enum import Enum
from typing import List

SAMPLE_RATE = 16000
FRAME_LEN = 400
HOP = 160


class Emotion(str, Enum):
    """The four emotion categories kept from every corpus."""

    NEUTRAL = "neutral"
    HAPPY = "happy"
    SAD = "sad"
    ANGRY = "angry"

    @property
    def index(self) -> int:
        return EMOTIONS.index(self)


class Gender(str, Enum):
    """Protected attribute used by fairness metrics and the privacy probe."""

    FEMALE = "female"
    MALE = "male"

    @property
    def index(self) -> int:
        return GENDERS.index(self)


EMOTIONS: List[Emotion] = [Emotion.NEUTRAL, Emotion.HAPPY, Emotion.SAD, Emotion.ANGRY]
GENDERS: List[Gender] = [Gender.FEMALE, Gender.MALE]


class TargetAttribute(str, Enum):
    """Which record field a head is trained to predict."""

    EMOTION = "emotion"  # the SER task
    GENDER = "gender"  # privacy axis target


class DataKind(str, Enum):
    """What a manifest's tensor files hold."""

    EMBEDDING = "embedding"  # [L, T, D]
    WAVEFORM = "waveform"  # [N] at SAMPLE_RATE


class FoldScheme(str, Enum):
    """Cross-validation split schemes."""

    SESSION = "session-fold"
    SPEAKER_FRACTION = "speaker-fraction-fold"


class ValPolicy(str, Enum):
    """How a fold's validation set is carved out of its training side."""

    ONE_SESSION = "one-session"
    FRACTION = "fraction"


class AttackKind(str, Enum):
    """Perturbation families."""

    FGSM = "fgsm"
    PGD = "pgd"
    GAUSSIAN = "gaussian"


class AttackSurface(str, Enum):
    """Where a perturbation is applied."""

    WAVEFORM = "waveform"
    EMBEDDING = "embedding"


class Axis(str, Enum):
    """The five trust axes, in rendering order."""

    PERFORMANCE = "performance"
    PRIVACY = "privacy"
    SAFETY = "safety"
    FAIRNESS = "fairness"
    SUSTAINABILITY = "sustainability"


AXES: List[Axis] = [
    Axis.PERFORMANCE,
    Axis.PRIVACY,
    Axis.SAFETY,
    Axis.FAIRNESS,
    Axis.SUSTAINABILITY,
]


class Direction(str, Enum):
    """Whether a larger raw value is better (forward) or worse (backward)."""

    FORWARD = "forward"
    BACKWARD = "backward"


class Normalization(str, Enum):
    """Raw value to radial score mappings."""

    COHORT_MINMAX = "cohort-minmax"
    ABSOLUTE = "absolute"
    LOG_ABSOLUTE = "log-absolute"


class Scenario(str, Enum):
    """Deployment scenarios for model recommendation."""

    EDGE = "edge"
    CLOUD = "cloud"
    CRITICAL = "critical"


def frames_for_samples(num_samples: int, frame_len: int = FRAME_LEN, hop: int = HOP) -> int:
    """Number of analysis frames for a signal of ``num_samples`` samples."""
    if num_samples < frame_len:
        return 0
    return (num_samples - frame_len) // hop + 1


def frames_for_duration(duration_s: float, sample_rate: int = SAMPLE_RATE) -> int:
    """Number of analysis frames covering ``duration_s`` seconds of audio."""
    return frames_for_samples(int(round(duration_s * sample_rate)))
