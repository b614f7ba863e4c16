"""
Gradient Checking
=================

Central finite differences against reverse-mode gradients.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Union

import numpy as np
import structlog

from emotrust.core.exceptions import TensorError
from emotrust.tensor.primitives import Primitive
from emotrust.tensor.tape import ComputationTape, Tensor, backward

logger = structlog.get_logger(__name__)

DENOMINATOR_FLOOR = 1e-8


@dataclass(frozen=True)
class GradCheckResult:
    """Outcome of a finite-difference check on one leaf."""

    max_relative_error: float
    checked: int
    skipped: int

    def __float__(self) -> float:
        return self.max_relative_error


def _relu_masks(tape: ComputationTape) -> Dict[int, np.ndarray]:
    return {
        ref: tape.nodes[node.operands[0]].value > 0
        for ref, node in enumerate(tape.nodes)
        if node.primitive == Primitive.RELU
    }


def _same_kinks(a: Dict[int, np.ndarray], b: Dict[int, np.ndarray]) -> bool:
    return all(np.array_equal(a[ref], b[ref]) for ref in a)


def check_gradient(
    tape: ComputationTape,
    loss: Union[Tensor, int],
    leaf: Union[Tensor, int],
    step: float = 1e-3,
    max_elements: Optional[int] = None,
    dtype: Any = np.float64,
    seed: int = 0,
) -> GradCheckResult:
    """
    Compare analytic and central-difference gradients of ``loss`` w.r.t. ``leaf``.

    The recorded computation is replayed in ``dtype`` (float64 by default) so
    the difference quotient is not dominated by rounding. Elements whose
    perturbation flips the sign of any relu input are skipped, since the
    function is not differentiable across the kink.

    Args:
        tape: Tape holding the computation
        loss: Scalar result on the tape
        leaf: Differentiable leaf on the tape
        step: Finite-difference step
        max_elements: Check at most this many randomly chosen elements
        dtype: Arithmetic dtype of the replays
        seed: Seed for element sampling

    Returns:
        Largest relative error over the checked elements, with the counts
        of checked and skipped elements
    """
    if step <= 0:
        raise TensorError("Finite-difference step must be positive")
    loss_ref = tape.ref_of(loss)
    leaf_ref = tape.ref_of(leaf)
    if tape.nodes[loss_ref].value.size != 1:
        raise TensorError(
            "Gradient check needs a scalar loss",
            shapes=[tape.nodes[loss_ref].value.shape],
        )
    if not tape.nodes[leaf_ref].is_leaf or not tape.nodes[leaf_ref].requires_grad:
        raise TensorError(f"Node {leaf_ref} is not a differentiable leaf")

    base = tape.replay(dtype=dtype)
    grads = backward(base, loss_ref)
    base_value = np.asarray(base.nodes[leaf_ref].value, dtype=np.float64)
    analytic = (
        np.asarray(grads.array(leaf_ref), dtype=np.float64)
        if leaf_ref in grads
        else np.zeros_like(base_value)
    ).reshape(-1)
    base_masks = _relu_masks(base)

    size = base_value.size
    indices = np.arange(size)
    if max_elements is not None and size > max_elements:
        indices = np.sort(np.random.default_rng(seed).choice(size, max_elements, replace=False))

    worst = 0.0
    skipped = 0
    for index in indices:
        plus = base_value.copy().reshape(-1)
        minus = base_value.copy().reshape(-1)
        plus[index] += step
        minus[index] -= step
        tape_plus = base.replay({leaf_ref: plus.reshape(base_value.shape)})
        tape_minus = base.replay({leaf_ref: minus.reshape(base_value.shape)})
        if not (
            _same_kinks(base_masks, _relu_masks(tape_plus))
            and _same_kinks(base_masks, _relu_masks(tape_minus))
        ):
            skipped += 1
            continue
        numeric = (
            float(tape_plus.nodes[loss_ref].value.reshape(-1)[0])
            - float(tape_minus.nodes[loss_ref].value.reshape(-1)[0])
        ) / (2.0 * step)
        a = float(analytic[index])
        error = abs(a - numeric) / max(abs(a), abs(numeric), DENOMINATOR_FLOOR)
        worst = max(worst, error)

    checked = len(indices) - skipped
    if checked == 0:
        logger.warning("No element could be checked", leaf=leaf_ref, skipped=skipped)
    logger.debug(
        "Gradient check finished",
        leaf=leaf_ref,
        checked=checked,
        skipped=skipped,
        max_relative_error=worst,
    )
    return GradCheckResult(worst, checked, skipped)


def grad_check(
    tape: ComputationTape,
    loss: Union[Tensor, int],
    leaf: Union[Tensor, int],
    step: float = 1e-3,
    **kwargs: Any,
) -> float:
    """
    Maximum relative error between analytic and numeric gradients.

    Raises:
        TensorError: If every sampled element sat on a relu kink, so no
            error could be measured
    """
    result = check_gradient(tape, loss, leaf, step, **kwargs)
    if result.checked == 0:
        raise TensorError(
            f"Gradient check skipped all {result.skipped} elements",
            context={"leaf": tape.ref_of(leaf)},
        )
    return result.max_relative_error
