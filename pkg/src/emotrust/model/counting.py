"""Parameter counts of heads and encoders."""

from typing import NamedTuple, Union

from emotrust.model.encoder import ToyEncoderConfig
from emotrust.model.head import HeadConfig, HeadParams


class ParamCount(NamedTuple):
    trainable: int
    frozen: int

    @property
    def total(self) -> int:
        return self.trainable + self.frozen


def count_params(model: Union[HeadConfig, HeadParams, ToyEncoderConfig]) -> ParamCount:
    """
    Exact scalar counts.

    Heads are fully trainable. The toy encoder reports its projection and
    layer weights as frozen; the fixed DFT basis is not a parameter.
    """
    if isinstance(model, HeadParams):
        model = model.config
    if isinstance(model, HeadConfig):
        total = 0
        for shape in model.shapes().values():
            size = 1
            for dim in shape:
                size *= dim
            total += size
        return ParamCount(trainable=total, frozen=0)

    d = model.dim
    frozen = model.bins * d + d + model.num_layers * (d * d + d)
    return ParamCount(trainable=0, frozen=frozen)
