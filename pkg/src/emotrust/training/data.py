"""
Example Loading
===============

Turns manifest records into in-memory training examples. Embedding files are
used directly; waveform files are passed through the frozen toy encoder.
Inputs longer than the duration cap are truncated from the end.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
import structlog

from emotrust.core.exceptions import DataError
from emotrust.core.types import SAMPLE_RATE, TargetAttribute, frames_for_duration
from emotrust.dataio.manifest import Manifest, UtteranceRecord
from emotrust.dataio.tensorfile import read_tensor
from emotrust.model.encoder import ToyEncoderConfig, encode

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class Example:
    """One utterance ready for the head."""

    id: str
    emb: np.ndarray  # [L, T, D] float32
    label: int
    record: UtteranceRecord
    waveform: Optional[np.ndarray] = None  # kept for waveform-surface attacks


def label_of(record: UtteranceRecord, target: TargetAttribute) -> int:
    if target == TargetAttribute.GENDER:
        return record.gender.index
    return record.emotion.index


def truncate_embedding(emb: np.ndarray, max_audio_s: float) -> np.ndarray:
    """Keep at most the frames covering ``max_audio_s`` seconds."""
    cap = max(1, frames_for_duration(max_audio_s))
    return emb[:, :cap, :]


def truncate_waveform(wave: np.ndarray, max_audio_s: float) -> np.ndarray:
    return wave[: int(round(max_audio_s * SAMPLE_RATE))]


def load_examples(
    manifest: Manifest,
    target: TargetAttribute = TargetAttribute.EMOTION,
    max_audio_s: float = 6.0,
    encoder: Optional[ToyEncoderConfig] = None,
) -> Dict[str, Example]:
    """
    Load every record of ``manifest``, keyed by id in manifest order.

    Args:
        manifest: Records to load
        target: Attribute used as the class label
        max_audio_s: Duration cap applied before encoding
        encoder: Encoder for waveform files (default configuration if omitted)

    Raises:
        DataError: If a tensor file is neither [L, T, D] nor [N]
    """
    target = TargetAttribute(target)
    examples: Dict[str, Example] = {}
    encoded = 0
    for record in manifest.records:
        path = manifest.resolve(record)
        values = read_tensor(path).data
        waveform = None
        if values.ndim == 3:
            emb = truncate_embedding(values, max_audio_s)
        elif values.ndim == 1:
            waveform = truncate_waveform(values, max_audio_s)
            emb = encode(encoder or ToyEncoderConfig(), waveform)
            encoded += 1
        else:
            raise DataError(
                f"Expected an [L, T, D] embedding or [N] waveform, got shape {values.shape}",
                path=str(path),
            )
        examples[record.id] = Example(
            id=record.id,
            emb=np.ascontiguousarray(emb, dtype=np.float32),
            label=label_of(record, target),
            record=record,
            waveform=waveform,
        )
    logger.info("Examples loaded", count=len(examples), encoded=encoded, target=target.value)
    return examples


def class_counts(examples: List[Example], num_classes: int) -> List[int]:
    counts = [0] * num_classes
    for ex in examples:
        counts[ex.label] += 1
    return counts
