"""Shared fixtures for emotrust tests."""

from pathlib import Path

import numpy as np
import pytest

from emotrust.core.logging import configure_logging
from emotrust.core.types import EMOTIONS, Gender
from emotrust.dataio.manifest import Manifest, UtteranceRecord
from emotrust.dataio.synth import SynthConfig, synth_dataset
from emotrust.model.head import HeadConfig, init_head


@pytest.fixture(autouse=True, scope="session")
def quiet_logging():
    configure_logging("WARNING", "text")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def small_head_config() -> HeadConfig:
    return HeadConfig(num_layers=2, input_dim=3, num_classes=4, fc_hidden=8)


@pytest.fixture
def small_head(small_head_config):
    return init_head(small_head_config, seed=7)


def make_records(speakers_per_gender: int = 2, sessions: int = 2, per_speaker: int = 4):
    """In-memory records: F00.., M00.. spread over sessions, emotions cycled."""
    records = []
    index = 0
    for gender in (Gender.FEMALE, Gender.MALE):
        for s in range(speakers_per_gender):
            speaker = f"{gender.value[0].upper()}{s:02d}"
            for j in range(per_speaker):
                records.append(
                    UtteranceRecord(
                        id=f"utt{index:04d}",
                        tensor_path=f"tensors/utt{index:04d}.tsr",
                        emotion=EMOTIONS[j % len(EMOTIONS)],
                        speaker_id=speaker,
                        gender=gender,
                        session_id=f"S{s % sessions}",
                        duration_s=1.0,
                    )
                )
                index += 1
    return records


@pytest.fixture
def small_manifest() -> Manifest:
    return Manifest(dataset_name="toy", records=make_records())


@pytest.fixture
def synth_dir(tmp_path: Path) -> Path:
    cfg = SynthConfig(
        counts={e: [6, 6] for e in EMOTIONS},
        layers=2,
        frames=5,
        dim=4,
        separation=4.0,
        speakers_per_gender=5,
        sessions=5,
    )
    synth_dataset(cfg, tmp_path / "data", seed=3)
    return tmp_path / "data"


@pytest.fixture
def record_factory():
    return make_records
