"""
Backbone Catalogue
==================

Published architecture figures of the public speech backbones the engine
can report against. The engine does not run these models; their inference
cost enters FLOPs reports as a declared constant.
"""

from typing import Dict

from pydantic import BaseModel, ConfigDict

from emotrust.core.exceptions import ModelError


class BackboneSpec(BaseModel):
    """Size and per-6-second inference cost of one backbone."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    layers: int
    hidden: int
    params_millions: float
    inference_flops: float  # head included, 6 s of audio


BACKBONES: Dict[str, BackboneSpec] = {
    spec.name: spec
    for spec in (
        BackboneSpec(name="APC", layers=3, hidden=512, params_millions=4.11, inference_flops=2.5e9),
        BackboneSpec(
            name="TERA", layers=4, hidden=768, params_millions=21.33, inference_flops=12.8e9
        ),
        BackboneSpec(
            name="Whisper Tiny", layers=4, hidden=376, params_millions=8.21, inference_flops=2.3e9
        ),
        BackboneSpec(
            name="Whisper Base", layers=8, hidden=512, params_millions=20.59, inference_flops=6.0e9
        ),
        BackboneSpec(
            name="Whisper Small",
            layers=12,
            hidden=768,
            params_millions=88.15,
            inference_flops=26.2e9,
        ),
        BackboneSpec(
            name="Wav2vec 2.0 Base",
            layers=12,
            hidden=768,
            params_millions=95.04,
            inference_flops=41.7e9,
        ),
        BackboneSpec(
            name="WavLM Base+", layers=12, hidden=768, params_millions=94.70, inference_flops=33.2e9
        ),
    )
}


def get_backbone(name: str) -> BackboneSpec:
    """Case-insensitive catalogue lookup."""
    for key, spec in BACKBONES.items():
        if key.lower() == name.lower():
            return spec
    raise ModelError(
        f"Unknown backbone '{name}'; known: {', '.join(BACKBONES)}", component="backbones"
    )
