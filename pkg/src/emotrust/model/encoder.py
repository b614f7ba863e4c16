"""
Toy Encoder
===========

A frozen, seeded stand-in for a pretrained speech backbone. It maps a 16 kHz
waveform to K layers of frame embeddings through a fully differentiable path,
so input gradients reach the raw samples:

    frame (400/160) -> Hann-windowed DFT magnitude -> log(1 + |X|)
    -> linear bins->D -> K x (linear D->D, tanh)
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, List

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from emotrust.core.exceptions import ModelError
from emotrust.core.types import FRAME_LEN, HOP, SAMPLE_RATE, frames_for_samples
from emotrust.tensor import ComputationTape, Primitive, Tensor, apply

logger = structlog.get_logger(__name__)

MAGNITUDE_FLOOR = 1e-8


class ToyEncoderConfig(BaseModel):
    """Encoder geometry; all weights derive from ``seed``."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    sample_rate: int = Field(default=SAMPLE_RATE, gt=0)
    frame_len: int = Field(default=FRAME_LEN, ge=2)
    hop: int = Field(default=HOP, ge=1)
    num_layers: int = Field(default=4, ge=1, description="K, emitted layers")
    dim: int = Field(default=16, ge=1, description="D, per-layer width")
    seed: int = 0

    @property
    def bins(self) -> int:
        return self.frame_len // 2 + 1

    def frames(self, num_samples: int) -> int:
        return frames_for_samples(num_samples, self.frame_len, self.hop)


@dataclass(frozen=True)
class EncoderConstants:
    """Seeded frozen weights of one encoder configuration."""

    dft_real: np.ndarray
    dft_imag: np.ndarray
    proj_weight: np.ndarray
    proj_bias: np.ndarray
    layer_weights: List[np.ndarray]
    layer_biases: List[np.ndarray]


def _readonly(array: np.ndarray) -> np.ndarray:
    out = np.asarray(array, dtype=np.float32)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=8)
def encoder_constants(cfg: ToyEncoderConfig) -> EncoderConstants:
    """Build (once per configuration) the encoder's frozen matrices."""
    n = np.arange(cfg.frame_len)[:, None]
    k = np.arange(cfg.bins)[None, :]
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(cfg.frame_len) / cfg.frame_len)
    angle = 2.0 * np.pi * n * k / cfg.frame_len

    rng = np.random.default_rng(cfg.seed)
    bound = 1.0 / np.sqrt(cfg.bins)
    proj_weight = rng.uniform(-bound, bound, size=(cfg.bins, cfg.dim))
    proj_bias = rng.uniform(-bound, bound, size=(cfg.dim,))
    weights, biases = [], []
    bound = 1.0 / np.sqrt(cfg.dim)
    for _ in range(cfg.num_layers):
        weights.append(_readonly(rng.uniform(-bound, bound, size=(cfg.dim, cfg.dim))))
        biases.append(_readonly(rng.uniform(-bound, bound, size=(cfg.dim,))))

    logger.debug("Encoder constants built", layers=cfg.num_layers, dim=cfg.dim, seed=cfg.seed)
    return EncoderConstants(
        dft_real=_readonly(window[:, None] * np.cos(angle)),
        dft_imag=_readonly(-window[:, None] * np.sin(angle)),
        proj_weight=_readonly(proj_weight),
        proj_bias=_readonly(proj_bias),
        layer_weights=weights,
        layer_biases=biases,
    )


def encoder_forward(cfg: ToyEncoderConfig, waveform: Any, tape: ComputationTape) -> Tensor:
    """
    Encode a waveform into a [K, T, D] embedding sequence.

    Args:
        cfg: Encoder configuration
        waveform: [N] samples (tape tensor or array); N >= frame_len
        tape: Tape to record on

    Returns:
        Stacked layer outputs with T = (N - frame_len) // hop + 1
    """
    shape = waveform.shape if isinstance(waveform, Tensor) else np.shape(waveform)
    if len(shape) != 1:
        raise ModelError(f"Waveform must be 1-D, got shape {tuple(shape)}", component="encoder")
    if shape[0] < cfg.frame_len:
        raise ModelError(
            f"Waveform of {shape[0]} samples is shorter than one frame ({cfg.frame_len})",
            component="encoder",
        )
    c = encoder_constants(cfg)

    frames = apply(tape, Primitive.FRAME, waveform, frame_len=cfg.frame_len, hop=cfg.hop)
    re = apply(tape, Primitive.MATMUL, frames, c.dft_real)
    im = apply(tape, Primitive.MATMUL, frames, c.dft_imag)
    power = apply(
        tape,
        Primitive.ADD,
        apply(tape, Primitive.MUL, re, re),
        apply(tape, Primitive.MUL, im, im),
    )
    power = apply(tape, Primitive.ADD_BIAS, power, np.full(cfg.bins, MAGNITUDE_FLOOR))
    magnitude = apply(tape, Primitive.SQRT, power)
    features = apply(
        tape, Primitive.LOG, apply(tape, Primitive.ADD_BIAS, magnitude, np.ones(cfg.bins))
    )

    h = apply(tape, Primitive.MATMUL, features, c.proj_weight)
    h = apply(tape, Primitive.ADD_BIAS, h, c.proj_bias)
    layers = []
    for weight, bias in zip(c.layer_weights, c.layer_biases):
        h = apply(tape, Primitive.ADD_BIAS, apply(tape, Primitive.MATMUL, h, weight), bias)
        h = apply(tape, Primitive.TANH, h)
        layers.append(h)
    return apply(tape, Primitive.STACK, *layers)


def encode(cfg: ToyEncoderConfig, waveform: np.ndarray) -> np.ndarray:
    """Encode without keeping gradients; returns a float32 [K, T, D] array."""
    tape = ComputationTape()
    return np.array(encoder_forward(cfg, waveform, tape).data)
