"""Minimal reverse-mode tensor engine."""

from emotrust.tensor.gradcheck import GradCheckResult, check_gradient, grad_check
from emotrust.tensor.primitives import Primitive
from emotrust.tensor.tape import ComputationTape, Gradients, Tensor, apply, backward

__all__ = [
    "Tensor",
    "ComputationTape",
    "Gradients",
    "Primitive",
    "apply",
    "backward",
    "grad_check",
    "check_gradient",
    "GradCheckResult",
]
