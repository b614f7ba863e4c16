"""
Analytic FLOPs
==============

Operation counts for one inference pass, enumerated stage by stage.
Multiplies and adds count separately (2 per multiply-accumulate), bias adds
are included, activations cost one operation per element and softmax costs
3 per element plus the normalizing sum.
"""

from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from emotrust.core.types import SAMPLE_RATE, frames_for_duration
from emotrust.model.backbones import BackboneSpec, get_backbone
from emotrust.model.encoder import ToyEncoderConfig
from emotrust.model.head import HeadConfig

STANDARD_DURATION_S = 6.0


def linear_flops(frames: int, d_in: int, d_out: int, bias: bool = True) -> int:
    """Per-frame linear map (pointwise conv) over ``frames`` frames."""
    return frames * (2 * d_in * d_out + (d_out if bias else 0))


def elementwise_flops(*shape: int) -> int:
    total = 1
    for dim in shape:
        total *= dim
    return total


def mean_flops(frames: int, dim: int) -> int:
    return frames * dim + dim


def softmax_flops(n: int) -> int:
    return 3 * n + (n - 1)


def weighted_sum_flops(layers: int, frames: int, dim: int) -> int:
    return layers * frames * dim + (layers - 1) * frames * dim


class FlopsStage(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    flops: int


class FlopsReport(BaseModel):
    """Per-stage breakdown; ``total`` is their sum."""

    model_config = ConfigDict(extra="forbid")

    duration_s: float
    frames: int
    stages: List[FlopsStage] = Field(default_factory=list)
    backbone: Optional[str] = None

    @property
    def total(self) -> int:
        return sum(s.flops for s in self.stages)

    def as_dict(self) -> dict:
        data = self.model_dump(mode="json")
        data["total"] = self.total
        return data


def head_stages(cfg: HeadConfig, frames: int) -> List[FlopsStage]:
    """Stages of the downstream head for a ``frames``-frame input."""
    L, D, C = cfg.num_layers, cfg.input_dim, cfg.conv_channels
    H, K = cfg.fc_hidden, cfg.num_classes
    return [
        FlopsStage(name="layer_softmax", flops=softmax_flops(L)),
        FlopsStage(name="layer_average", flops=weighted_sum_flops(L, frames, D)),
        FlopsStage(name="conv1", flops=linear_flops(frames, D, C)),
        FlopsStage(name="conv1_relu", flops=elementwise_flops(frames, C)),
        FlopsStage(name="conv2", flops=linear_flops(frames, C, C)),
        FlopsStage(name="conv2_relu", flops=elementwise_flops(frames, C)),
        FlopsStage(name="pool", flops=mean_flops(frames, C)),
        FlopsStage(name="fc1", flops=linear_flops(1, C, H)),
        FlopsStage(name="fc1_relu", flops=elementwise_flops(H)),
        FlopsStage(name="fc2", flops=linear_flops(1, H, K)),
    ]


def encoder_stages(cfg: ToyEncoderConfig, frames: int) -> List[FlopsStage]:
    """Stages of the toy encoder; framing is a copy and costs nothing."""
    bins, D = cfg.bins, cfg.dim
    stages = [
        FlopsStage(name="dft", flops=2 * linear_flops(frames, cfg.frame_len, bins, bias=False)),
        FlopsStage(name="magnitude", flops=5 * elementwise_flops(frames, bins)),
        FlopsStage(name="log1p", flops=2 * elementwise_flops(frames, bins)),
        FlopsStage(name="projection", flops=linear_flops(frames, bins, D)),
    ]
    for k in range(cfg.num_layers):
        stages.append(FlopsStage(name=f"layer{k + 1}", flops=linear_flops(frames, D, D)))
        stages.append(FlopsStage(name=f"layer{k + 1}_tanh", flops=elementwise_flops(frames, D)))
    return stages


def flops_count(
    head_cfg: HeadConfig,
    encoder: Union[ToyEncoderConfig, BackboneSpec, str, float, None] = None,
    duration_s: float = STANDARD_DURATION_S,
) -> FlopsReport:
    """
    Count the FLOPs of one ``duration_s``-second inference.

    Args:
        head_cfg: Head shape
        encoder: The toy encoder (counted op by op), a catalogued backbone
            or name, or a declared constant added as-is; None counts the
            head alone
        duration_s: Input length in seconds

    Returns:
        The stage breakdown
    """
    if isinstance(encoder, ToyEncoderConfig):
        frames = encoder.frames(int(round(duration_s * encoder.sample_rate)))
        stages = encoder_stages(encoder, frames)
        name: Optional[str] = "toy-encoder"
    else:
        frames = frames_for_duration(duration_s, SAMPLE_RATE)
        stages = []
        name = None
        if isinstance(encoder, str):
            encoder = get_backbone(encoder)
        if isinstance(encoder, BackboneSpec):
            stages.append(FlopsStage(name="backbone", flops=int(round(encoder.inference_flops))))
            name = encoder.name
        elif encoder is not None:
            stages.append(FlopsStage(name="backbone", flops=int(round(float(encoder)))))
            name = "declared"

    stages.extend(head_stages(head_cfg, frames))
    return FlopsReport(duration_s=duration_s, frames=frames, stages=stages, backbone=name)
