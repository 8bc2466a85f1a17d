"""Dense 2-D tensors with reverse-mode automatic differentiation.

Every tensor is a float64 matrix. Operations record their inputs and a
backward closure on the output tensor; ``ComputeGraph.trace`` orders the
recorded operations topologically and ``backward`` replays them in reverse,
accumulating gradients into every tensor that requires them.
"""

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import DimensionError, NumericError

_ids = itertools.count()


class Tensor:
    """A float64 matrix that optionally tracks gradients."""

    __slots__ = ('data', 'requires_grad', 'grad', 'name', 'op', 'id', '_parents', '_backward')

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        name: Optional[str] = None,
        op: str = 'leaf'
    ):
        array = np.array(data, dtype=np.float64)
        if array.ndim == 0:
            array = array.reshape(1, 1)
        elif array.ndim == 1:
            array = array.reshape(1, -1)
        elif array.ndim != 2:
            raise DimensionError(f"Tensors are 2-D, got shape {array.shape}")

        self.data: np.ndarray = array
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self.op = op
        self.id = next(_ids)
        self._parents: Tuple["Tensor", ...] = ()
        self._backward: Callable[[np.ndarray], None] = _no_backward

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def parents(self) -> Tuple["Tensor", ...]:
        return self._parents

    @property
    def is_leaf(self) -> bool:
        return not self._parents

    def item(self) -> float:
        if self.data.size != 1:
            raise DimensionError(f"item() needs a 1x1 tensor, got {self.shape}")
        return float(self.data[0, 0])

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self):
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def accumulate_grad(self, grad: np.ndarray):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad

    def __repr__(self) -> str:
        req = ", requires_grad=True" if self.requires_grad else ""
        nm = f", name={self.name}" if self.name else ""
        return f"Tensor(shape={self.shape}, op={self.op}{req}{nm})"

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    def __add__(self, other: "Tensor") -> "Tensor":
        return elementwise(ElementwiseKind.ADD, self, other)

    def __mul__(self, other: "Tensor") -> "Tensor":
        return elementwise(ElementwiseKind.MUL, self, other)

    @property
    def T(self) -> "Tensor":
        return transpose(self)


def _no_backward(grad: np.ndarray) -> None:
    return None


def _result(
    data: np.ndarray,
    op: str,
    parents: Sequence[Tensor],
    backward: Callable[[np.ndarray], None]
) -> Tensor:
    out = Tensor(data, op=op)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def _feed(tensor: Tensor, grad: np.ndarray):
    if tensor.requires_grad:
        tensor.accumulate_grad(grad)


def zeros(rows: int, cols: int, requires_grad: bool = False, name: Optional[str] = None) -> Tensor:
    return Tensor(np.zeros((rows, cols)), requires_grad=requires_grad, name=name)


def ones_like(tensor: Tensor) -> Tensor:
    return Tensor(np.ones_like(tensor.data))


# ---------------------------------------------------------------------------
# Linear algebra
# ---------------------------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product ``a @ b``."""
    if a.cols != b.rows:
        raise DimensionError(f"matmul shape mismatch: {a.shape} x {b.shape}")

    def backward(g: np.ndarray):
        _feed(a, g @ b.data.T)
        _feed(b, a.data.T @ g)

    return _result(a.data @ b.data, 'matmul', (a, b), backward)


def outer_dot(x: Tensor, y: Tensor) -> Tensor:
    """``x @ y.T`` with a fixed summation order.

    Entry (i, j) sums ``x[i, k] * y[j, k]`` over k in the same order for any
    argument order, so ``outer_dot(y, x)`` is bitwise the transpose of
    ``outer_dot(x, y)``.
    """
    if x.cols != y.cols:
        raise DimensionError(f"outer_dot shape mismatch: {x.shape} vs {y.shape}")

    def backward(g: np.ndarray):
        _feed(x, g @ y.data)
        _feed(y, g.T @ x.data)

    products = x.data[:, None, :] * y.data[None, :, :]
    return _result(products.sum(axis=2), 'outer_dot', (x, y), backward)


def transpose(a: Tensor) -> Tensor:
    def backward(g: np.ndarray):
        _feed(a, g.T)

    return _result(np.ascontiguousarray(a.data.T), 'transpose', (a,), backward)


# ---------------------------------------------------------------------------
# Elementwise
# ---------------------------------------------------------------------------

class ElementwiseKind(str, Enum):
    """Pointwise operations."""
    MUL = "mul"
    ADD = "add"
    TANH = "tanh"
    SIGMOID = "sigmoid"
    RELU = "relu"
    DROPOUT_MASK_APPLY = "dropout_mask_apply"


_BINARY_KINDS = {ElementwiseKind.MUL, ElementwiseKind.ADD, ElementwiseKind.DROPOUT_MASK_APPLY}


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # tanh form never overflows
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def elementwise(kind: ElementwiseKind, a: Tensor, b: Optional[Tensor] = None) -> Tensor:
    """
    Apply a pointwise operation.

    Args:
        kind: Operation kind
        a: First operand
        b: Second operand for binary kinds; for ``dropout_mask_apply`` it is
            the constant mask (already scaled by the inverse keep probability)

    Returns:
        Result tensor with the shape of ``a``
    """
    kind = ElementwiseKind(kind)

    if kind in _BINARY_KINDS:
        if b is None:
            raise DimensionError(f"{kind.value} needs two operands")
        if a.shape != b.shape:
            raise DimensionError(f"{kind.value} shape mismatch: {a.shape} vs {b.shape}")

    if kind is ElementwiseKind.MUL:
        def backward(g: np.ndarray):
            _feed(a, g * b.data)
            _feed(b, g * a.data)
        return _result(a.data * b.data, kind.value, (a, b), backward)

    if kind is ElementwiseKind.ADD:
        def backward(g: np.ndarray):
            _feed(a, g)
            _feed(b, g)
        return _result(a.data + b.data, kind.value, (a, b), backward)

    if kind is ElementwiseKind.DROPOUT_MASK_APPLY:
        mask = b.data

        def backward(g: np.ndarray):
            _feed(a, g * mask)
        return _result(a.data * mask, kind.value, (a,), backward)

    if kind is ElementwiseKind.TANH:
        out_data = np.tanh(a.data)

        def backward(g: np.ndarray):
            _feed(a, g * (1.0 - out_data ** 2))
        return _result(out_data, kind.value, (a,), backward)

    if kind is ElementwiseKind.SIGMOID:
        out_data = _sigmoid(a.data)

        def backward(g: np.ndarray):
            _feed(a, g * out_data * (1.0 - out_data))
        return _result(out_data, kind.value, (a,), backward)

    # RELU
    positive = a.data > 0.0

    def backward(g: np.ndarray):
        _feed(a, g * positive)
    return _result(np.where(positive, a.data, 0.0), kind.value, (a,), backward)


def tanh(a: Tensor) -> Tensor:
    return elementwise(ElementwiseKind.TANH, a)


def sigmoid(a: Tensor) -> Tensor:
    return elementwise(ElementwiseKind.SIGMOID, a)


def relu(a: Tensor) -> Tensor:
    return elementwise(ElementwiseKind.RELU, a)


def affine(a: Tensor, scale: float, shift: float = 0.0) -> Tensor:
    """``scale * a + shift`` with scalar constants."""
    def backward(g: np.ndarray):
        _feed(a, g * scale)

    return _result(scale * a.data + shift, 'affine', (a,), backward)


def add_row(a: Tensor, row: Tensor) -> Tensor:
    """Add a 1 x c row to every row of ``a`` (bias broadcast)."""
    if row.rows != 1 or row.cols != a.cols:
        raise DimensionError(f"add_row shape mismatch: {a.shape} + {row.shape}")

    def backward(g: np.ndarray):
        _feed(a, g)
        _feed(row, g.sum(axis=0, keepdims=True))

    return _result(a.data + row.data, 'add_row', (a, row), backward)


def clip(a: Tensor, low: float, high: float) -> Tensor:
    """Clamp into [low, high]; gradient flows only where unclamped."""
    inside = (a.data >= low) & (a.data <= high)

    def backward(g: np.ndarray):
        _feed(a, g * inside)

    return _result(np.clip(a.data, low, high), 'clip', (a,), backward)


def log(a: Tensor) -> Tensor:
    if np.any(a.data <= 0.0):
        raise NumericError("log of a non-positive value")

    def backward(g: np.ndarray):
        _feed(a, g / a.data)

    return _result(np.log(a.data), 'log', (a,), backward)


# ---------------------------------------------------------------------------
# Softmax and reductions
# ---------------------------------------------------------------------------

def row_softmax(m: Tensor) -> Tensor:
    """Softmax over each row, computed with max-subtraction."""
    if not np.all(np.isfinite(m.data)):
        raise NumericError(f"row_softmax received non-finite input of shape {m.shape}")

    shifted = m.data - m.data.max(axis=1, keepdims=True)
    exps = np.exp(shifted)
    out_data = exps / exps.sum(axis=1, keepdims=True)

    def backward(g: np.ndarray):
        inner = (g * out_data).sum(axis=1, keepdims=True)
        _feed(m, out_data * (g - inner))

    return _result(out_data, 'row_softmax', (m,), backward)


def sum_all(a: Tensor) -> Tensor:
    def backward(g: np.ndarray):
        _feed(a, np.full_like(a.data, g[0, 0]))

    return _result(a.data.sum().reshape(1, 1), 'sum', (a,), backward)


def mean_all(a: Tensor) -> Tensor:
    return affine(sum_all(a), 1.0 / a.data.size)


# ---------------------------------------------------------------------------
# Structural
# ---------------------------------------------------------------------------

def concat_cols(parts: Sequence[Tensor]) -> Tensor:
    """Column-wise concatenation in the given order."""
    if not parts:
        raise DimensionError("concat_cols needs at least one part")
    rows = parts[0].rows
    for part in parts:
        if part.rows != rows:
            raise DimensionError(
                f"concat_cols row mismatch: {[p.shape for p in parts]}"
            )
    if len(parts) == 1:
        return parts[0]

    offsets = np.cumsum([0] + [p.cols for p in parts])

    def backward(g: np.ndarray):
        for part, start, stop in zip(parts, offsets[:-1], offsets[1:]):
            _feed(part, g[:, start:stop])

    data = np.concatenate([p.data for p in parts], axis=1)
    return _result(data, 'concat_cols', tuple(parts), backward)


def concat_rows(parts: Sequence[Tensor]) -> Tensor:
    """Row-wise concatenation in the given order."""
    if not parts:
        raise DimensionError("concat_rows needs at least one part")
    cols = parts[0].cols
    for part in parts:
        if part.cols != cols:
            raise DimensionError(
                f"concat_rows column mismatch: {[p.shape for p in parts]}"
            )
    if len(parts) == 1:
        return parts[0]

    offsets = np.cumsum([0] + [p.rows for p in parts])

    def backward(g: np.ndarray):
        for part, start, stop in zip(parts, offsets[:-1], offsets[1:]):
            _feed(part, g[start:stop, :])

    data = np.concatenate([p.data for p in parts], axis=0)
    return _result(data, 'concat_rows', tuple(parts), backward)


def slice_rows(a: Tensor, start: int, stop: int) -> Tensor:
    """Rows ``start:stop`` as a new tensor."""
    if not 0 <= start < stop <= a.rows:
        raise DimensionError(f"slice_rows [{start}:{stop}] out of range for {a.shape}")

    def backward(g: np.ndarray):
        if a.requires_grad:
            full = np.zeros_like(a.data)
            full[start:stop, :] = g
            a.accumulate_grad(full)

    return _result(a.data[start:stop, :].copy(), 'slice_rows', (a,), backward)


def slice_cols(a: Tensor, start: int, stop: int) -> Tensor:
    """Columns ``start:stop`` as a new tensor."""
    if not 0 <= start < stop <= a.cols:
        raise DimensionError(f"slice_cols [{start}:{stop}] out of range for {a.shape}")

    def backward(g: np.ndarray):
        if a.requires_grad:
            full = np.zeros_like(a.data)
            full[:, start:stop] = g
            a.accumulate_grad(full)

    return _result(a.data[:, start:stop].copy(), 'slice_cols', (a,), backward)


# ---------------------------------------------------------------------------
# Graph and backward pass
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Node:
    """One recorded operation."""
    op: str
    inputs: Tuple[int, ...]
    output: int


class ComputeGraph:
    """Operations reachable from a tensor, in topological order."""

    def __init__(self):
        self.nodes: List[Node] = []
        self._tensors: Dict[int, Tensor] = {}
        self._order: List[Tensor] = []

    @classmethod
    def trace(cls, root: Tensor) -> "ComputeGraph":
        """Collect every tensor ``root`` depends on, inputs before consumers."""
        graph = cls()
        visited = set()
        stack: List[Tuple[Tensor, bool]] = [(root, False)]
        while stack:
            tensor, expanded = stack.pop()
            if expanded:
                graph._append(tensor)
                continue
            if tensor.id in visited:
                continue
            visited.add(tensor.id)
            stack.append((tensor, True))
            for parent in reversed(tensor.parents):
                if parent.id not in visited:
                    stack.append((parent, False))
        return graph

    def _append(self, tensor: Tensor):
        self._tensors[tensor.id] = tensor
        self._order.append(tensor)
        if not tensor.is_leaf:
            self.nodes.append(
                Node(op=tensor.op, inputs=tuple(p.id for p in tensor.parents), output=tensor.id)
            )

    def __contains__(self, tensor: Tensor) -> bool:
        return tensor.id in self._tensors

    def __len__(self) -> int:
        return len(self.nodes)

    def leaves(self) -> List[Tensor]:
        """Leaf tensors that require gradients."""
        return [t for t in self._order if t.is_leaf and t.requires_grad]

    def tensors(self) -> List[Tensor]:
        return list(self._order)


def backward(loss: Tensor, graph: Optional[ComputeGraph] = None) -> ComputeGraph:
    """
    Populate gradients of every ``requires_grad`` tensor reachable from ``loss``.

    Gradients accumulate into leaves, so callers zero them between steps.

    Args:
        loss: 1x1 tensor
        graph: Graph traced from ``loss``; traced here when omitted

    Returns:
        The graph that was replayed
    """
    if loss.shape != (1, 1):
        raise DimensionError(f"backward needs a scalar loss, got shape {loss.shape}")
    if graph is None:
        graph = ComputeGraph.trace(loss)
    elif loss not in graph:
        raise ValueError("loss is not part of the given graph")

    if not loss.requires_grad:
        return graph

    # Intermediate grads are rebuilt each pass; leaves keep accumulating
    for tensor in graph.tensors():
        if not tensor.is_leaf:
            tensor.grad = None

    loss.accumulate_grad(np.ones((1, 1)))
    for tensor in reversed(graph.tensors()):
        if tensor.is_leaf or tensor.grad is None:
            continue
        tensor._backward(tensor.grad)
    return graph


def dropout(a: Tensor, rate: float, rng: np.random.Generator, training: bool) -> Tensor:
    """Inverted dropout: kept activations are divided by the keep probability.

    Identity when not training or when ``rate`` is 0.
    """
    if not training or rate <= 0.0:
        return a
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    keep = 1.0 - rate
    mask = (rng.random(a.shape) < keep) / keep
    return elementwise(ElementwiseKind.DROPOUT_MASK_APPLY, a, Tensor(mask))
