"""Downstream head, toy encoder and backbone catalogue."""

from emotrust.model.backbones import BACKBONES, BackboneSpec, get_backbone
from emotrust.model.bundle import load_head, save_head
from emotrust.model.counting import ParamCount, count_params
from emotrust.model.encoder import ToyEncoderConfig, encode, encoder_forward
from emotrust.model.head import (
    HeadConfig,
    HeadParams,
    argmax,
    bind_params,
    cross_entropy,
    head_forward,
    init_head,
)

__all__ = [
    "HeadConfig",
    "HeadParams",
    "init_head",
    "bind_params",
    "head_forward",
    "cross_entropy",
    "argmax",
    "ToyEncoderConfig",
    "encoder_forward",
    "encode",
    "count_params",
    "ParamCount",
    "save_head",
    "load_head",
    "BackboneSpec",
    "BACKBONES",
    "get_backbone",
]
