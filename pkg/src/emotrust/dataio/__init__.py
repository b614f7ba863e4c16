"""Manifests, tensor files, fold planning and synthetic corpora."""

from emotrust.dataio.folds import Fold, FoldPlan, make_folds
from emotrust.dataio.manifest import Manifest, UtteranceRecord, load_manifest, write_manifest
from emotrust.dataio.synth import CORPUS_PRESETS, SynthConfig, preset_counts, synth_dataset
from emotrust.dataio.tensorfile import read_tensor, write_tensor

__all__ = [
    "UtteranceRecord",
    "Manifest",
    "load_manifest",
    "write_manifest",
    "read_tensor",
    "write_tensor",
    "Fold",
    "FoldPlan",
    "make_folds",
    "SynthConfig",
    "synth_dataset",
    "preset_counts",
    "CORPUS_PRESETS",
]
