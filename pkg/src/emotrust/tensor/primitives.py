"""
Primitive Catalogue
===================

Forward rules and vector-Jacobian products for every tensor primitive the
engine records. Each rule validates operand shapes, computes in float64 and
leaves the rounding to the recording tape's dtype.
"""

from abc import ABC, abstractmethod
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Type

import numpy as np

from emotrust.core.exceptions import TensorError

Shape = Tuple[int, ...]
Grads = List[Optional[np.ndarray]]


class Primitive(str, Enum):
    """Identifiers of the recordable primitives."""

    MATMUL = "matmul"
    ADD_BIAS = "add-bias"
    RELU = "relu"
    TANH = "tanh"
    SOFTMAX = "softmax-last-axis"
    LOG = "log"
    MEAN = "mean-over-axis"
    WEIGHTED_SUM = "weighted-sum-over-leading-axis"
    MUL = "elementwise-mul"
    ADD = "elementwise-add"
    CROSS_ENTROPY = "cross-entropy-with-logits"
    FRAME = "frame-signal"
    SQRT = "sqrt"
    SUM = "sum-all"
    STACK = "stack-leading-axis"


class PrimitiveRule(ABC):
    """Shape rule, forward and VJP of one primitive."""

    primitive: Primitive
    arity: Optional[int] = 1  # None means variadic

    def reject(self, message: str, shapes: Sequence[Shape]) -> TensorError:
        return TensorError(message, primitive=self.primitive.value, shapes=shapes)

    def check_arity(self, shapes: Sequence[Shape]) -> None:
        if self.arity is not None and len(shapes) != self.arity:
            raise self.reject(
                f"{self.primitive.value} expects {self.arity} operand(s), "
                f"got {len(shapes)}",
                shapes,
            )

    @abstractmethod
    def output_shape(self, shapes: Sequence[Shape], attrs: Dict[str, Any]) -> Shape:
        """Validate operand shapes and return the result shape."""

    @abstractmethod
    def forward(self, xs: Sequence[np.ndarray], attrs: Dict[str, Any]) -> np.ndarray:
        """Compute the result from float64 operands."""

    @abstractmethod
    def vjp(
        self,
        g: np.ndarray,
        xs: Sequence[np.ndarray],
        out: np.ndarray,
        attrs: Dict[str, Any],
        needs: Sequence[bool],
    ) -> Grads:
        """Pull the output cotangent ``g`` back to each operand that needs it."""


_RULES: Dict[Primitive, PrimitiveRule] = {}


def register(primitive: Primitive) -> Callable[[Type[PrimitiveRule]], Type[PrimitiveRule]]:
    """Class decorator adding a rule to the catalogue."""

    def decorator(cls: Type[PrimitiveRule]) -> Type[PrimitiveRule]:
        rule = cls()
        rule.primitive = primitive
        _RULES[primitive] = rule
        return cls

    return decorator


def get_rule(primitive: Primitive) -> PrimitiveRule:
    """Look up the rule of a primitive."""
    return _RULES[primitive]


def resolve(primitive: Any) -> Primitive:
    """Accept a ``Primitive`` or its catalogue id string."""
    try:
        return Primitive(primitive)
    except ValueError as e:
        raise TensorError(f"Unknown primitive '{primitive}'", cause=e)


class _Elementwise(PrimitiveRule):
    arity = 1

    def output_shape(self, shapes: Sequence[Shape], attrs: Dict[str, Any]) -> Shape:
        self.check_arity(shapes)
        return shapes[0]


class _SameShapeBinary(PrimitiveRule):
    arity = 2

    def output_shape(self, shapes: Sequence[Shape], attrs: Dict[str, Any]) -> Shape:
        self.check_arity(shapes)
        if shapes[0] != shapes[1]:
            raise self.reject("Operand shapes must match exactly", shapes)
        return shapes[0]


@register(Primitive.MATMUL)
class MatMul(PrimitiveRule):
    arity = 2

    def output_shape(self, shapes: Sequence[Shape], attrs: Dict[str, Any]) -> Shape:
        self.check_arity(shapes)
        a, b = shapes
        if len(a) not in (1, 2) or len(b) != 2 or a[-1] != b[0]:
            raise self.reject("matmul needs [m,k] or [k] times [k,n]", shapes)
        return a[:-1] + (b[1],)

    def forward(self, xs: Sequence[np.ndarray], attrs: Dict[str, Any]) -> np.ndarray:
        return xs[0] @ xs[1]

    def vjp(self, g, xs, out, attrs, needs) -> Grads:
        a, b = xs
        ga = g @ b.T if needs[0] else None
        gb = None
        if needs[1]:
            gb = np.outer(a, g) if a.ndim == 1 else a.T @ g
        return [ga, gb]


@register(Primitive.ADD_BIAS)
class AddBias(PrimitiveRule):
    arity = 2

    def output_shape(self, shapes: Sequence[Shape], attrs: Dict[str, Any]) -> Shape:
        self.check_arity(shapes)
        x, b = shapes
        if len(b) != 1 or len(x) < 1 or x[-1] != b[0]:
            raise self.reject("add-bias needs [..., n] and [n]", shapes)
        return x

    def forward(self, xs: Sequence[np.ndarray], attrs: Dict[str, Any]) -> np.ndarray:
        return xs[0] + xs[1]

    def vjp(self, g, xs, out, attrs, needs) -> Grads:
        gb = g.reshape(-1, g.shape[-1]).sum(axis=0) if needs[1] else None
        return [g, gb]


@register(Primitive.RELU)
class Relu(_Elementwise):
    def forward(self, xs: Sequence[np.ndarray], attrs: Dict[str, Any]) -> np.ndarray:
        return np.where(xs[0] > 0.0, xs[0], 0.0)

    def vjp(self, g, xs, out, attrs, needs) -> Grads:
        # grad at exactly 0 is 0
        return [np.where(xs[0] > 0.0, g, 0.0)]


@register(Primitive.TANH)
class Tanh(_Elementwise):
    def forward(self, xs: Sequence[np.ndarray], attrs: Dict[str, Any]) -> np.ndarray:
        return np.tanh(xs[0])

    def vjp(self, g, xs, out, attrs, needs) -> Grads:
        return [g * (1.0 - out * out)]


@register(Primitive.SOFTMAX)
class Softmax(_Elementwise):
    def output_shape(self, shapes: Sequence[Shape], attrs: Dict[str, Any]) -> Shape:
        shape = super().output_shape(shapes, attrs)
        if len(shape) < 1 or shape[-1] < 1:
            raise self.reject("softmax needs a non-empty last axis", shapes)
        return shape

    def forward(self, xs: Sequence[np.ndarray], attrs: Dict[str, Any]) -> np.ndarray:
        shifted = xs[0] - xs[0].max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=-1, keepdims=True)

    def vjp(self, g, xs, out, attrs, needs) -> Grads:
        return [out * (g - (g * out).sum(axis=-1, keepdims=True))]


@register(Primitive.LOG)
class Log(_Elementwise):
    def forward(self, xs: Sequence[np.ndarray], attrs: Dict[str, Any]) -> np.ndarray:
        return np.log(xs[0])

    def vjp(self, g, xs, out, attrs, needs) -> Grads:
        return [g / xs[0]]


@register(Primitive.SQRT)
class Sqrt(_Elementwise):
    def forward(self, xs: Sequence[np.ndarray], attrs: Dict[str, Any]) -> np.ndarray:
        return np.sqrt(xs[0])

    def vjp(self, g, xs, out, attrs, needs) -> Grads:
        return [g / (2.0 * out)]


@register(Primitive.MEAN)
class Mean(PrimitiveRule):
    arity = 1

    def output_shape(self, shapes: Sequence[Shape], attrs: Dict[str, Any]) -> Shape:
        self.check_arity(shapes)
        shape = shapes[0]
        axis = attrs.get("axis", 0)
        if not -len(shape) <= axis < len(shape) or shape[axis] == 0:
            raise self.reject(f"mean over invalid axis {axis}", shapes)
        axis %= len(shape)
        return shape[:axis] + shape[axis + 1 :]

    def forward(self, xs: Sequence[np.ndarray], attrs: Dict[str, Any]) -> np.ndarray:
        return xs[0].mean(axis=attrs.get("axis", 0))

    def vjp(self, g, xs, out, attrs, needs) -> Grads:
        axis = attrs.get("axis", 0) % xs[0].ndim
        n = xs[0].shape[axis]
        return [np.broadcast_to(np.expand_dims(g, axis) / n, xs[0].shape).copy()]


@register(Primitive.WEIGHTED_SUM)
class WeightedSum(PrimitiveRule):
    arity = 2

    def output_shape(self, shapes: Sequence[Shape], attrs: Dict[str, Any]) -> Shape:
        self.check_arity(shapes)
        w, x = shapes
        if len(w) != 1 or len(x) < 1 or x[0] != w[0]:
            raise self.reject("weighted sum needs [L] and [L, ...]", shapes)
        return x[1:]

    def forward(self, xs: Sequence[np.ndarray], attrs: Dict[str, Any]) -> np.ndarray:
        return np.tensordot(xs[0], xs[1], axes=1)

    def vjp(self, g, xs, out, attrs, needs) -> Grads:
        w, x = xs
        gw = x.reshape(x.shape[0], -1) @ g.reshape(-1) if needs[0] else None
        gx = np.multiply.outer(w, g) if needs[1] else None
        return [gw, gx]


@register(Primitive.MUL)
class Mul(_SameShapeBinary):
    def forward(self, xs: Sequence[np.ndarray], attrs: Dict[str, Any]) -> np.ndarray:
        return xs[0] * xs[1]

    def vjp(self, g, xs, out, attrs, needs) -> Grads:
        return [g * xs[1], g * xs[0]]


@register(Primitive.ADD)
class Add(_SameShapeBinary):
    def forward(self, xs: Sequence[np.ndarray], attrs: Dict[str, Any]) -> np.ndarray:
        return xs[0] + xs[1]

    def vjp(self, g, xs, out, attrs, needs) -> Grads:
        return [g, g]


def _log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max()
    return shifted - np.log(np.exp(shifted).sum())


@register(Primitive.CROSS_ENTROPY)
class CrossEntropy(PrimitiveRule):
    arity = 2

    def output_shape(self, shapes: Sequence[Shape], attrs: Dict[str, Any]) -> Shape:
        self.check_arity(shapes)
        z, y = shapes
        if len(z) != 1 or z != y:
            raise self.reject("cross-entropy needs logits [C] and target [C]", shapes)
        return ()

    def forward(self, xs: Sequence[np.ndarray], attrs: Dict[str, Any]) -> np.ndarray:
        z, y = xs
        return np.asarray(-(y * _log_softmax(z)).sum())

    def vjp(self, g, xs, out, attrs, needs) -> Grads:
        z, y = xs
        log_p = _log_softmax(z)
        gz = g * (np.exp(log_p) * y.sum() - y) if needs[0] else None
        gy = -g * log_p if needs[1] else None
        return [gz, gy]


@register(Primitive.FRAME)
class FrameSignal(PrimitiveRule):
    arity = 1

    @staticmethod
    def _index(n: int, frame_len: int, hop: int) -> np.ndarray:
        count = (n - frame_len) // hop + 1
        return np.arange(frame_len)[None, :] + hop * np.arange(count)[:, None]

    def output_shape(self, shapes: Sequence[Shape], attrs: Dict[str, Any]) -> Shape:
        self.check_arity(shapes)
        frame_len, hop = attrs["frame_len"], attrs["hop"]
        if len(shapes[0]) != 1 or frame_len < 1 or hop < 1:
            raise self.reject("frame-signal needs a 1-D signal", shapes)
        n = shapes[0][0]
        if n < frame_len:
            raise self.reject(
                f"signal of {n} samples is shorter than one frame ({frame_len})",
                shapes,
            )
        return ((n - frame_len) // hop + 1, frame_len)

    def forward(self, xs: Sequence[np.ndarray], attrs: Dict[str, Any]) -> np.ndarray:
        return xs[0][self._index(xs[0].shape[0], attrs["frame_len"], attrs["hop"])]

    def vjp(self, g, xs, out, attrs, needs) -> Grads:
        gx = np.zeros_like(xs[0])
        np.add.at(gx, self._index(xs[0].shape[0], attrs["frame_len"], attrs["hop"]), g)
        return [gx]


@register(Primitive.SUM)
class SumAll(PrimitiveRule):
    arity = 1

    def output_shape(self, shapes: Sequence[Shape], attrs: Dict[str, Any]) -> Shape:
        self.check_arity(shapes)
        return ()

    def forward(self, xs: Sequence[np.ndarray], attrs: Dict[str, Any]) -> np.ndarray:
        return np.asarray(xs[0].sum())

    def vjp(self, g, xs, out, attrs, needs) -> Grads:
        return [np.full(xs[0].shape, float(g))]


@register(Primitive.STACK)
class Stack(PrimitiveRule):
    arity = None

    def output_shape(self, shapes: Sequence[Shape], attrs: Dict[str, Any]) -> Shape:
        if not shapes or any(s != shapes[0] for s in shapes):
            raise self.reject("stack needs one or more equal-shaped operands", shapes)
        return (len(shapes),) + shapes[0]

    def forward(self, xs: Sequence[np.ndarray], attrs: Dict[str, Any]) -> np.ndarray:
        return np.stack(xs, axis=0)

    def vjp(self, g, xs, out, attrs, needs) -> Grads:
        return [g[k] for k in range(len(xs))]
