"""
Downstream Head
===============

The trainable classifier over frozen multi-layer embeddings:

    softmax(layer_logits) -> weighted layer average [T, D]
    -> pointwise conv D->128, relu -> pointwise conv 128->128, relu
    -> mean over frames [128]
    -> fc 128->fc_hidden, relu -> fc fc_hidden->C

Pointwise convolutions are per-frame linear maps.
"""

from dataclasses import dataclass
from types import MappingProxyType
from typing import Any, Dict, Iterator, List, Literal, Mapping, Optional, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from emotrust.core.exceptions import ModelError
from emotrust.tensor import ComputationTape, Primitive, Tensor, apply

logger = structlog.get_logger(__name__)

CONV_CHANNELS = 128

PARAM_NAMES: Tuple[str, ...] = (
    "layer_logits",
    "conv1_weight",
    "conv1_bias",
    "conv2_weight",
    "conv2_bias",
    "fc1_weight",
    "fc1_bias",
    "fc2_weight",
    "fc2_bias",
)


class HeadConfig(BaseModel):
    """Shape of a downstream head."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    num_layers: int = Field(ge=1, description="L, encoder layers averaged")
    input_dim: int = Field(ge=1, description="D, embedding width")
    num_classes: int = Field(default=4, ge=2)
    fc_hidden: int = Field(default=64, ge=1)
    conv_channels: Literal[128] = CONV_CHANNELS

    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        """Parameter shapes keyed by name."""
        d, c, h, k = self.input_dim, self.conv_channels, self.fc_hidden, self.num_classes
        return {
            "layer_logits": (self.num_layers,),
            "conv1_weight": (d, c),
            "conv1_bias": (c,),
            "conv2_weight": (c, c),
            "conv2_bias": (c,),
            "fc1_weight": (c, h),
            "fc1_bias": (h,),
            "fc2_weight": (h, k),
            "fc2_bias": (k,),
        }


@dataclass(frozen=True, eq=False)
class HeadParams:
    """Immutable head parameters. Updates build a new instance."""

    config: HeadConfig
    values: Mapping[str, np.ndarray]

    def __post_init__(self) -> None:
        expected = self.config.shapes()
        if set(self.values) != set(expected):
            raise ModelError(
                f"Parameter names {sorted(self.values)} do not match the head layout",
                component="head",
            )
        frozen: Dict[str, np.ndarray] = {}
        for name in PARAM_NAMES:
            array = np.array(self.values[name], dtype=np.float32, copy=True)
            if array.shape != expected[name]:
                raise ModelError(
                    f"{name} has shape {array.shape}, expected {expected[name]}",
                    component="head",
                )
            if not np.all(np.isfinite(array)):
                raise ModelError(f"{name} holds non-finite values", component="head")
            array.setflags(write=False)
            frozen[name] = array
        object.__setattr__(self, "values", MappingProxyType(frozen))

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[name]

    def __iter__(self) -> Iterator[str]:
        return iter(PARAM_NAMES)

    def replace(self, updates: Mapping[str, np.ndarray]) -> "HeadParams":
        merged = dict(self.values)
        merged.update(updates)
        return HeadParams(self.config, merged)

    def equals(self, other: "HeadParams") -> bool:
        """Bitwise equality of every tensor."""
        return self.config == other.config and all(
            np.array_equal(self[n], other[n]) for n in PARAM_NAMES
        )


def init_head(config: HeadConfig, seed: int = 0) -> HeadParams:
    """
    Seeded initialization.

    Weights and biases are uniform in +-1/sqrt(fan_in); layer logits start
    at zero so the first forward averages layers uniformly.
    """
    rng = np.random.default_rng(seed)
    values: Dict[str, np.ndarray] = {"layer_logits": np.zeros(config.num_layers)}
    for prefix in ("conv1", "conv2", "fc1", "fc2"):
        fan_in, fan_out = config.shapes()[f"{prefix}_weight"]
        bound = 1.0 / np.sqrt(fan_in)
        values[f"{prefix}_weight"] = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        values[f"{prefix}_bias"] = rng.uniform(-bound, bound, size=(fan_out,))
    return HeadParams(config, values)


def bind_params(
    params: HeadParams, tape: ComputationTape, trainable: bool = True
) -> Dict[str, Tensor]:
    """Record parameters on a tape, as leaves when ``trainable``."""
    record = tape.leaf if trainable else tape.constant
    return {name: record(params[name], name=name) for name in PARAM_NAMES}


def head_forward(
    params: HeadParams,
    emb: Any,
    tape: ComputationTape,
    bound: Optional[Dict[str, Tensor]] = None,
) -> Tensor:
    """
    Logits of one utterance.

    Args:
        params: Head parameters
        emb: [L, T, D] embeddings (a tape tensor or an array)
        tape: Tape to record on
        bound: Parameter tensors from ``bind_params``; recorded as
            constants when omitted

    Returns:
        Logits of shape [C]
    """
    cfg = params.config
    shape = emb.shape if isinstance(emb, Tensor) else np.shape(emb)
    if len(shape) != 3 or shape[0] != cfg.num_layers or shape[2] != cfg.input_dim or shape[1] < 1:
        raise ModelError(
            f"Embedding shape {tuple(shape)} does not match head "
            f"[L={cfg.num_layers}, T, D={cfg.input_dim}]",
            component="head",
        )
    p = bound if bound is not None else bind_params(params, tape, trainable=False)

    weights = apply(tape, Primitive.SOFTMAX, p["layer_logits"])
    h = apply(tape, Primitive.WEIGHTED_SUM, weights, emb)
    for conv in ("conv1", "conv2"):
        h = apply(tape, Primitive.MATMUL, h, p[f"{conv}_weight"])
        h = apply(tape, Primitive.RELU, apply(tape, Primitive.ADD_BIAS, h, p[f"{conv}_bias"]))
    pooled = apply(tape, Primitive.MEAN, h, axis=0)
    hidden = apply(tape, Primitive.MATMUL, pooled, p["fc1_weight"])
    hidden = apply(tape, Primitive.RELU, apply(tape, Primitive.ADD_BIAS, hidden, p["fc1_bias"]))
    logits = apply(tape, Primitive.MATMUL, hidden, p["fc2_weight"])
    return apply(tape, Primitive.ADD_BIAS, logits, p["fc2_bias"])


def one_hot(label: int, num_classes: int) -> np.ndarray:
    if not 0 <= label < num_classes:
        raise ModelError(f"Label {label} outside 0..{num_classes - 1}", component="loss")
    target = np.zeros(num_classes, dtype=np.float32)
    target[label] = 1.0
    return target


def cross_entropy(tape: ComputationTape, logits: Tensor, label: int) -> Tensor:
    """Scalar cross-entropy of ``logits`` against a class index."""
    return apply(tape, Primitive.CROSS_ENTROPY, logits, one_hot(label, logits.shape[0]))


def argmax(logits: np.ndarray) -> int:
    """Index of the largest logit; ties go to the lowest index."""
    return int(np.argmax(np.asarray(logits)))


def layer_weights(params: HeadParams) -> List[float]:
    """Softmax of the layer logits, as reported in training summaries."""
    w = np.asarray(params["layer_logits"], dtype=np.float64)
    e = np.exp(w - w.max())
    return (e / e.sum()).tolist()
