"""
Computation Tape
================

Immutable tensors, the per-computation tape that records primitive
applications, and reverse-mode gradients over that record.

A tape has a single writer. Independent computations (one per training
example, one per attacked item) each build their own tape, so tapes are
never shared between threads.
"""

import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from emotrust.core.exceptions import TensorError
from emotrust.tensor.primitives import Primitive, get_rule, resolve

logger = structlog.get_logger(__name__)

_TAPE_IDS = itertools.count(1)

ArrayLike = Union[np.ndarray, Sequence[float], float]


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Tensor:
    """
    A dense float array, optionally tied to a node of a tape.

    ``data`` is read-only. ``ref`` and ``tape_id`` are set only for tensors
    produced by a tape.
    """

    data: np.ndarray
    ref: Optional[int] = None
    tape_id: Optional[int] = None

    @classmethod
    def from_array(cls, values: ArrayLike, dtype: Any = np.float32) -> "Tensor":
        """Copy ``values`` into a new read-only tensor."""
        return cls(_frozen(np.array(values, dtype=dtype, copy=True)))

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])


@dataclass
class TapeNode:
    """One recorded leaf or primitive application."""

    value: np.ndarray
    primitive: Optional[Primitive] = None
    operands: Tuple[int, ...] = ()
    attrs: Dict[str, Any] = field(default_factory=dict)
    requires_grad: bool = False
    name: Optional[str] = None

    @property
    def is_leaf(self) -> bool:
        return self.primitive is None


class ComputationTape:
    """Append-only record of a computation."""

    def __init__(self, dtype: Any = np.float32):
        self.id = next(_TAPE_IDS)
        self.dtype = np.dtype(dtype)
        self.nodes: List[TapeNode] = []

    def __len__(self) -> int:
        return len(self.nodes)

    def _tensor(self, ref: int) -> Tensor:
        return Tensor(self.nodes[ref].value, ref=ref, tape_id=self.id)

    def _push(self, node: TapeNode) -> Tensor:
        self.nodes.append(node)
        return self._tensor(len(self.nodes) - 1)

    def _as_value(self, values: Any) -> np.ndarray:
        if isinstance(values, Tensor):
            values = values.data
        value = np.array(values, dtype=self.dtype, copy=True)
        if not np.all(np.isfinite(value)):
            raise TensorError("Leaf values must be finite", shapes=[value.shape])
        return _frozen(value)

    def leaf(self, values: Any, name: Optional[str] = None) -> Tensor:
        """Record a differentiable input."""
        return self._push(TapeNode(self._as_value(values), requires_grad=True, name=name))

    def constant(self, values: Any, name: Optional[str] = None) -> Tensor:
        """Record a non-differentiable input."""
        return self._push(TapeNode(self._as_value(values), name=name))

    def node(self, tensor: Union[Tensor, int]) -> TapeNode:
        """Return the node behind a tensor, rejecting tensors of other tapes."""
        ref = self.ref_of(tensor)
        return self.nodes[ref]

    def ref_of(self, tensor: Union[Tensor, int]) -> int:
        if isinstance(tensor, Tensor):
            if tensor.tape_id != self.id or tensor.ref is None:
                raise TensorError("Tensor is not recorded on this tape")
            return tensor.ref
        if not 0 <= tensor < len(self.nodes):
            raise TensorError(f"No node {tensor} on this tape")
        return tensor

    def tensor(self, ref: int) -> Tensor:
        return self._tensor(self.ref_of(ref))

    def operand_ref(self, operand: Any) -> int:
        """Resolve an operand, recording off-tape arrays as constants."""
        if isinstance(operand, Tensor):
            if operand.tape_id == self.id and operand.ref is not None:
                return operand.ref
            if operand.tape_id is not None:
                raise TensorError("Operand is recorded on a different tape")
            return self.constant(operand.data).ref  # type: ignore[return-value]
        return self.constant(operand).ref  # type: ignore[return-value]

    def record(
        self,
        primitive: Primitive,
        operands: Sequence[int],
        attrs: Dict[str, Any],
        value: np.ndarray,
    ) -> Tensor:
        requires_grad = any(self.nodes[r].requires_grad for r in operands)
        return self._push(
            TapeNode(
                value=value,
                primitive=primitive,
                operands=tuple(operands),
                attrs=dict(attrs),
                requires_grad=requires_grad,
            )
        )

    def replay(
        self,
        overrides: Optional[Mapping[Union[Tensor, int], Any]] = None,
        dtype: Any = None,
    ) -> "ComputationTape":
        """
        Re-execute the recorded computation on a fresh tape.

        Args:
            overrides: Replacement values for leaves, keyed by tensor or ref
            dtype: Arithmetic dtype of the new tape (defaults to this tape's)

        Returns:
            A new tape whose refs line up one-to-one with this one
        """
        replacements = {self.ref_of(k): v for k, v in (overrides or {}).items()}
        for ref in replacements:
            if not self.nodes[ref].is_leaf:
                raise TensorError(f"Node {ref} is not a leaf and cannot be overridden")

        tape = ComputationTape(dtype=self.dtype if dtype is None else dtype)
        for ref, node in enumerate(self.nodes):
            if node.is_leaf:
                value = replacements.get(ref, node.value)
                if np.shape(value) != node.value.shape:
                    raise TensorError(
                        "Override shape does not match leaf",
                        shapes=[node.value.shape, np.shape(value)],
                    )
                tape._push(
                    TapeNode(
                        tape._as_value(value),
                        requires_grad=node.requires_grad,
                        name=node.name,
                    )
                )
            else:
                assert node.primitive is not None
                inputs = [tape.nodes[r].value for r in node.operands]
                value = evaluate(node.primitive, inputs, node.attrs, tape.dtype)
                tape.record(node.primitive, node.operands, node.attrs, value)
        return tape


def evaluate(
    primitive: Primitive,
    inputs: Sequence[np.ndarray],
    attrs: Dict[str, Any],
    dtype: np.dtype,
) -> np.ndarray:
    """Check shapes, run the forward rule in float64 and round to ``dtype``."""
    rule = get_rule(primitive)
    shapes = [tuple(x.shape) for x in inputs]
    expected = rule.output_shape(shapes, attrs)
    with np.errstate(all="ignore"):
        out = rule.forward([np.asarray(x, dtype=np.float64) for x in inputs], attrs)
    out = np.asarray(out, dtype=dtype)
    if out.shape != expected:
        raise TensorError(
            f"{primitive.value} produced shape {out.shape}, expected {expected}",
            primitive=primitive.value,
            shapes=shapes,
        )
    if not np.all(np.isfinite(out)):
        raise TensorError(
            "Primitive produced a non-finite value",
            primitive=primitive.value,
            shapes=shapes,
        )
    return _frozen(out)


def apply(tape: ComputationTape, primitive: Any, *operands: Any, **attrs: Any) -> Tensor:
    """
    Apply a primitive to operands and record it on ``tape``.

    Operands that are not on any tape are recorded as constants first.
    """
    op = resolve(primitive)
    refs = [tape.operand_ref(x) for x in operands]
    value = evaluate(op, [tape.nodes[r].value for r in refs], attrs, tape.dtype)
    return tape.record(op, refs, attrs, value)


class Gradients(Mapping[int, Tensor]):
    """Gradients of a scalar loss with respect to the tape's leaves."""

    def __init__(self, tape: ComputationTape, grads: Dict[int, np.ndarray]):
        self._tape = tape
        self._grads = grads

    def __getitem__(self, key: Union[Tensor, int]) -> Tensor:
        ref = self._tape.ref_of(key)
        if ref not in self._grads:
            raise KeyError(ref)
        return Tensor(self._grads[ref], ref=ref, tape_id=self._tape.id)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._grads))

    def __len__(self) -> int:
        return len(self._grads)

    def __contains__(self, key: object) -> bool:
        try:
            return self._tape.ref_of(key) in self._grads  # type: ignore[arg-type]
        except TensorError:
            return False

    def array(self, key: Union[Tensor, int]) -> np.ndarray:
        return self[key].data


def backward(tape: ComputationTape, loss: Union[Tensor, int]) -> Gradients:
    """
    Reverse-mode gradients of a scalar ``loss`` recorded on ``tape``.

    Every differentiable leaf the loss depends on gets an entry with the
    leaf's shape. Contributions are accumulated in float64 and rounded to the
    tape dtype once.
    """
    root = tape.ref_of(loss)
    if tape.nodes[root].value.size != 1:
        raise TensorError(
            "backward needs a scalar loss", shapes=[tape.nodes[root].value.shape]
        )

    cotangents: Dict[int, np.ndarray] = {
        root: np.ones(tape.nodes[root].value.shape, dtype=np.float64)
    }
    for ref in range(root, -1, -1):
        node = tape.nodes[ref]
        g = cotangents.get(ref)
        if g is None or node.is_leaf or not node.requires_grad:
            continue
        assert node.primitive is not None
        inputs = [np.asarray(tape.nodes[r].value, dtype=np.float64) for r in node.operands]
        needs = [tape.nodes[r].requires_grad for r in node.operands]
        with np.errstate(all="ignore"):
            pulled = get_rule(node.primitive).vjp(
                g, inputs, np.asarray(node.value, dtype=np.float64), node.attrs, needs
            )
        for operand, need, contribution in zip(node.operands, needs, pulled):
            if not need or contribution is None:
                continue
            contribution = np.asarray(contribution, dtype=np.float64)
            if not np.all(np.isfinite(contribution)):
                raise TensorError(
                    "Gradient became non-finite",
                    primitive=node.primitive.value,
                    shapes=[x.shape for x in inputs],
                )
            if operand in cotangents:
                cotangents[operand] = cotangents[operand] + contribution
            else:
                cotangents[operand] = contribution

    grads = {
        ref: _frozen(np.asarray(g, dtype=tape.dtype))
        for ref, g in cotangents.items()
        if tape.nodes[ref].is_leaf and tape.nodes[ref].requires_grad
    }
    logger.debug("backward complete", tape=tape.id, nodes=len(tape), leaves=len(grads))
    return Gradients(tape, grads)
