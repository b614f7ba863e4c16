"""
Attack Targets
==============

Differentiable models an attack can query. Each query builds its own tape,
so one target can serve many items concurrently; the gradient counter is
the only shared state and is lock-protected.
"""

import threading
from abc import ABC, abstractmethod
from typing import Any, Tuple

import numpy as np
import structlog

from emotrust.core.exceptions import AttackError, ModelError
from emotrust.core.types import AttackSurface
from emotrust.model.encoder import ToyEncoderConfig, encoder_forward
from emotrust.model.head import HeadParams, cross_entropy, head_forward
from emotrust.tensor import ComputationTape, Primitive, Tensor, apply, backward

logger = structlog.get_logger(__name__)


class AttackTarget(ABC):
    """A classifier with input gradients of its cross-entropy loss."""

    surface: AttackSurface

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._gradient_calls = 0

    @property
    def gradient_calls(self) -> int:
        return self._gradient_calls

    @property
    @abstractmethod
    def num_classes(self) -> int:
        """Number of output classes."""

    @abstractmethod
    def forward(self, tape: ComputationTape, x: Tensor) -> Tensor:
        """Record the logits of input ``x`` on ``tape``."""

    def logits(self, x: np.ndarray) -> np.ndarray:
        tape = ComputationTape()
        return np.array(self.forward(tape, tape.constant(x)).data)

    def loss(self, x: np.ndarray, label: int) -> float:
        tape = ComputationTape()
        return cross_entropy(tape, self.forward(tape, tape.constant(x)), label).item()

    def gradient(self, x: np.ndarray, label: int) -> Tuple[float, np.ndarray]:
        """Loss and its gradient with respect to the input."""
        with self._lock:
            self._gradient_calls += 1
        tape = ComputationTape()
        leaf = tape.leaf(x, name="input")
        loss = cross_entropy(tape, self.forward(tape, leaf), label)
        grads = backward(tape, loss)
        grad = grads.array(leaf) if leaf in grads else np.zeros_like(leaf.data)
        return loss.item(), np.array(grad)


class HeadTarget(AttackTarget):
    """A trained head attacked at its embedding input."""

    surface = AttackSurface.EMBEDDING

    def __init__(self, params: HeadParams):
        super().__init__()
        self.params = params

    @property
    def num_classes(self) -> int:
        return self.params.config.num_classes

    def forward(self, tape: ComputationTape, x: Tensor) -> Tensor:
        return head_forward(self.params, x, tape)


class EncoderHeadTarget(AttackTarget):
    """Toy encoder followed by a head, attacked at the raw waveform."""

    surface = AttackSurface.WAVEFORM

    def __init__(self, params: HeadParams, encoder: ToyEncoderConfig):
        super().__init__()
        if encoder.num_layers != params.config.num_layers or encoder.dim != params.config.input_dim:
            raise ModelError(
                f"Encoder emits [{encoder.num_layers}, T, {encoder.dim}] but the head expects "
                f"[{params.config.num_layers}, T, {params.config.input_dim}]",
                component="encoder",
            )
        self.params = params
        self.encoder = encoder

    @property
    def num_classes(self) -> int:
        return self.params.config.num_classes

    def forward(self, tape: ComputationTape, x: Tensor) -> Tensor:
        return head_forward(self.params, encoder_forward(self.encoder, x, tape), tape)


class LinearTarget(AttackTarget):
    """Logits ``x @ weight + bias`` for a flat input; an exact first-order model."""

    surface = AttackSurface.EMBEDDING

    def __init__(self, weight: Any, bias: Any):
        super().__init__()
        self.weight = np.asarray(weight, dtype=np.float32)
        self.bias = np.asarray(bias, dtype=np.float32)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[1],):
            raise AttackError("Linear target needs weight [D, C] and bias [C]")

    @property
    def num_classes(self) -> int:
        return int(self.weight.shape[1])

    def forward(self, tape: ComputationTape, x: Tensor) -> Tensor:
        logits = apply(tape, Primitive.MATMUL, x, self.weight)
        return apply(tape, Primitive.ADD_BIAS, logits, self.bias)


def build_target(
    params: HeadParams, surface: AttackSurface, encoder: ToyEncoderConfig
) -> AttackTarget:
    if AttackSurface(surface) == AttackSurface.WAVEFORM:
        return EncoderHeadTarget(params, encoder)
    return HeadTarget(params)
