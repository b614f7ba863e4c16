"""
Synthetic Corpora
=================

Seeded generator of labelled embedding sequences (or raw waveforms) with a
controllable amount of emotion signal and gender leakage. Stands in for the
licensed corpora; presets reproduce their per-emotion class counts.
"""

from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator

from emotrust.core.exceptions import DataError
from emotrust.core.types import (
    EMOTIONS,
    FRAME_LEN,
    GENDERS,
    HOP,
    SAMPLE_RATE,
    DataKind,
    Emotion,
    Gender,
)
from emotrust.dataio.manifest import Manifest, UtteranceRecord, write_manifest
from emotrust.dataio.tensorfile import write_tensor

logger = structlog.get_logger(__name__)

CellCounts = Dict[Tuple[Emotion, Gender], int]

# neutral, happy, sad, angry
CORPUS_PRESETS: Dict[str, Tuple[int, int, int, int]] = {
    "iemocap": (1708, 1636, 1084, 1103),
    "crema-d": (1972, 1219, 588, 1019),
    "msp-improv": (3477, 2644, 885, 792),
    "msp-podcast": (20986, 12060, 2166, 2712),
}

CLASS_TONES_HZ = (400.0, 700.0, 1000.0, 1300.0)
GENDER_PITCH_HZ = {Gender.FEMALE: 250.0, Gender.MALE: 150.0}
WAVE_NOISE_STD = 0.1
WAVE_AMPLITUDE = 0.1


def preset_counts(name: str) -> CellCounts:
    """Per-(emotion, gender) counts of a corpus preset, females taking the odd one."""
    try:
        totals = CORPUS_PRESETS[name.lower()]
    except KeyError:
        raise DataError(
            f"Unknown corpus preset '{name}'; choose from {', '.join(sorted(CORPUS_PRESETS))}"
        )
    counts: CellCounts = {}
    for emotion, total in zip(EMOTIONS, totals):
        counts[(emotion, Gender.FEMALE)] = total - total // 2
        counts[(emotion, Gender.MALE)] = total // 2
    return counts


class SynthConfig(BaseModel):
    """Generator settings; also the ``[data.synth]`` section of a run config."""

    model_config = ConfigDict(extra="forbid")

    dataset_name: str = "synthetic"
    kind: DataKind = DataKind.EMBEDDING
    preset: Optional[str] = None
    counts: Dict[Emotion, List[int]] = Field(
        default_factory=lambda: {e: [25, 25] for e in EMOTIONS},
        description="Per emotion: [female count, male count]",
    )
    layers: int = Field(default=4, ge=1)
    frames: int = Field(default=20, ge=1)
    dim: int = Field(default=16, ge=1)
    duration_s: float = Field(default=0.5, gt=0, description="Waveform length")
    separation: float = Field(default=1.0, ge=0)
    gender_leakage: float = Field(default=0.0, ge=0)
    speakers_per_gender: int = Field(default=5, ge=1)
    sessions: int = Field(default=5, ge=1)

    @field_validator("counts")
    @classmethod
    def _check_counts(cls, v: Dict[Emotion, List[int]]) -> Dict[Emotion, List[int]]:
        for emotion, pair in v.items():
            if len(pair) != 2 or any(c < 0 for c in pair):
                raise ValueError(f"counts for {emotion.value} must be [female, male] >= 0")
        return v

    def cell_counts(self) -> CellCounts:
        if self.preset:
            return preset_counts(self.preset)
        return {
            (emotion, gender): pair[gender.index]
            for emotion, pair in self.counts.items()
            for gender in GENDERS
        }


def _unit_directions(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    raw = rng.standard_normal((max(count, dim), dim))
    if dim >= count:
        q, _ = np.linalg.qr(raw[:dim].T)
        return q.T[:count]
    return raw[:count] / np.linalg.norm(raw[:count], axis=1, keepdims=True)


def _embedding(
    rng: np.random.Generator,
    cfg: SynthConfig,
    class_dir: np.ndarray,
    gender_dir: np.ndarray,
    gender_sign: float,
) -> np.ndarray:
    noise = rng.standard_normal((cfg.layers, cfg.frames, cfg.dim))
    mean = cfg.separation * class_dir + cfg.gender_leakage * gender_sign * gender_dir
    return (noise + mean).astype(np.float32)


def _waveform(
    rng: np.random.Generator, cfg: SynthConfig, emotion: Emotion, gender: Gender
) -> np.ndarray:
    n = int(round(cfg.duration_s * SAMPLE_RATE))
    t = np.arange(n) / SAMPLE_RATE
    phase = rng.uniform(0.0, 2.0 * np.pi, size=2)
    tone = np.sin(2.0 * np.pi * CLASS_TONES_HZ[emotion.index] * t + phase[0])
    pitch = np.sin(2.0 * np.pi * GENDER_PITCH_HZ[gender] * t + phase[1])
    noise = rng.normal(0.0, WAVE_NOISE_STD, size=n)
    wave = (
        WAVE_AMPLITUDE * cfg.separation * tone
        + WAVE_AMPLITUDE * cfg.gender_leakage * pitch
        + noise
    )
    return wave.astype(np.float32)


def synth_dataset(
    cfg: SynthConfig, output_dir: Union[str, Path], seed: int = 0
) -> Manifest:
    """
    Generate a labelled corpus under ``output_dir``.

    Writes ``manifest.jsonl`` and one ``tensors/<id>.tsr`` per utterance.
    Each utterance draws from its own generator seeded by (seed, index), so
    identical inputs give byte-identical files.

    Args:
        cfg: Counts, shapes and signal strengths
        output_dir: Destination directory
        seed: Base seed

    Returns:
        The written manifest
    """
    counts = cfg.cell_counts()
    total = sum(counts.values())
    if total == 0:
        raise DataError("Synthetic dataset has zero utterances")

    kind = DataKind(cfg.kind)
    if kind == DataKind.WAVEFORM and int(round(cfg.duration_s * SAMPLE_RATE)) < FRAME_LEN:
        raise DataError(f"Waveforms of {cfg.duration_s}s are shorter than one frame")

    root = Path(output_dir)
    directions = _unit_directions(np.random.default_rng(seed), len(EMOTIONS) + 1, cfg.dim)
    class_dirs, gender_dir = directions[: len(EMOTIONS)], directions[len(EMOTIONS)]

    if kind == DataKind.EMBEDDING:
        duration = ((cfg.frames - 1) * HOP + FRAME_LEN) / SAMPLE_RATE
    else:
        duration = cfg.duration_s

    records: List[UtteranceRecord] = []
    speaker_counter = {g: 0 for g in GENDERS}
    index = 0
    for emotion in EMOTIONS:
        for gender in GENDERS:
            for _ in range(counts.get((emotion, gender), 0)):
                rng = np.random.default_rng([seed, index])
                speaker = speaker_counter[gender] % cfg.speakers_per_gender
                speaker_counter[gender] += 1

                if kind == DataKind.EMBEDDING:
                    sign = 1.0 if gender == Gender.FEMALE else -1.0
                    values = _embedding(rng, cfg, class_dirs[emotion.index], gender_dir, sign)
                else:
                    values = _waveform(rng, cfg, emotion, gender)

                uid = f"utt{index:06d}"
                rel = f"tensors/{uid}.tsr"
                write_tensor(root / rel, values)
                records.append(
                    UtteranceRecord(
                        id=uid,
                        tensor_path=rel,
                        emotion=emotion,
                        speaker_id=f"{gender.value[0].upper()}{speaker:02d}",
                        gender=gender,
                        session_id=f"S{speaker % cfg.sessions:02d}",
                        duration_s=duration,
                    )
                )
                index += 1

    manifest = Manifest(dataset_name=cfg.dataset_name, records=records, root=root)
    write_manifest(manifest, root / "manifest.jsonl")
    logger.info(
        "Synthetic dataset written",
        path=str(root),
        kind=kind.value,
        records=total,
        separation=cfg.separation,
        gender_leakage=cfg.gender_leakage,
    )
    return manifest
