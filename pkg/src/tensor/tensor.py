"""
Dense tensor type and the computation graph used for reverse-mode autodiff.

Ops record themselves on the graph that is active in the current context
(``with Graph() as g:``). Outside an active graph nothing is recorded, which
is how decoding and evaluation run without paying for gradients.
"""

from contextvars import ContextVar
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import DimensionError, GraphUsageError, NumericError

DEFAULT_DTYPE = np.float32

ArrayLike = Union[np.ndarray, Sequence, float, int]
BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]

_active_graph: ContextVar[Optional["Graph"]] = ContextVar("active_graph", default=None)


class Tensor:
    """
    Row-major dense array with an optional gradient buffer.

    Values are stored as a contiguous numpy array. Floating inputs keep their
    dtype (float64 tensors are used by the gradient oracle); everything else
    is converted to 32-bit floats.
    """

    __slots__ = ("values", "requires_grad", "grad", "name", "_node")

    def __init__(
        self,
        values: ArrayLike,
        requires_grad: bool = False,
        name: Optional[str] = None,
        dtype: Optional[np.dtype] = None,
    ):
        array = np.asarray(values)
        if dtype is not None:
            array = array.astype(dtype, copy=False)
        elif not np.issubdtype(array.dtype, np.floating):
            array = array.astype(DEFAULT_DTYPE)
        self.values = np.ascontiguousarray(array)
        self.requires_grad = requires_grad
        self.grad = np.zeros_like(self.values) if requires_grad else None
        self.name = name
        self._node: Optional["Node"] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def dtype(self) -> np.dtype:
        return self.values.dtype

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def size(self) -> int:
        return int(self.values.size)

    @property
    def is_leaf(self) -> bool:
        return self._node is None

    def item(self) -> float:
        if self.values.size != 1:
            raise DimensionError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.values.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.values

    def zero_grad(self) -> None:
        if self.requires_grad:
            self.grad = np.zeros_like(self.values)

    def detach(self) -> "Tensor":
        return Tensor(self.values, requires_grad=False, name=self.name)

    def copy(self, requires_grad: Optional[bool] = None) -> "Tensor":
        """Deep copy of the values; the gradient buffer starts at zero."""
        rg = self.requires_grad if requires_grad is None else requires_grad
        return Tensor(self.values.copy(), requires_grad=rg, name=self.name)

    def astype(self, dtype: np.dtype, requires_grad: Optional[bool] = None) -> "Tensor":
        rg = self.requires_grad if requires_grad is None else requires_grad
        return Tensor(self.values.astype(dtype), requires_grad=rg, name=self.name)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{label}, requires_grad={self.requires_grad})"


class Node:
    """One executed primitive: its inputs, output and the backward closure."""

    __slots__ = ("inputs", "output", "backward_fn", "op")

    def __init__(self, op: str, inputs: Sequence[Tensor], output: Tensor, backward_fn: BackwardFn):
        self.op = op
        self.inputs = tuple(inputs)
        self.output = output
        self.backward_fn = backward_fn


class Graph:
    """
    Ordered record of executed ops, consumed by exactly one backward pass.

    Usage:
        with Graph() as graph:
            loss = cross_entropy_ls(logits, targets, 0.1, PAD_ID)
        backward(loss, graph)
    """

    def __init__(self):
        self.nodes: List[Node] = []
        self.consumed = False
        self._token = None

    def __enter__(self) -> "Graph":
        if self.consumed:
            raise GraphUsageError("cannot record on a graph that was already consumed")
        self._token = _active_graph.set(self)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        _active_graph.reset(self._token)
        self._token = None
        return False

    def __len__(self) -> int:
        return len(self.nodes)

    def record(self, node: Node) -> None:
        if self.consumed:
            raise GraphUsageError("cannot record on a graph that was already consumed")
        node.output._node = node
        self.nodes.append(node)


def active_graph() -> Optional[Graph]:
    """Graph recording in the current context, if any."""
    return _active_graph.get()


def check_finite(array: np.ndarray, op: str) -> np.ndarray:
    if not np.all(np.isfinite(array)):
        raise NumericError(f"{op} produced non-finite values")
    return array


def make_output(
    op: str,
    values: np.ndarray,
    inputs: Sequence[Tensor],
    backward_fn: BackwardFn,
) -> Tensor:
    """
    Wrap op results in a tensor and record the op when a graph is active.

    ``backward_fn`` maps the output gradient to one gradient per input
    (``None`` for inputs that need none).
    """
    check_finite(values, op)
    needs_grad = any(t.requires_grad for t in inputs)
    out = Tensor(values)
    graph = _active_graph.get()
    if needs_grad and graph is not None:
        out.requires_grad = True
        graph.record(Node(op, inputs, out, backward_fn))
    return out


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def backward(loss: Tensor, graph: Graph) -> None:
    """
    Populate ``grad`` of every leaf tensor reachable from ``loss``.

    Gradients accumulate into existing buffers, so callers zero them
    between optimizer steps.

    Raises:
        GraphUsageError: If the graph was already consumed or did not
            produce ``loss``.
        DimensionError: If ``loss`` is not a single-element tensor.
    """
    if graph.consumed:
        raise GraphUsageError("backward called twice on the same graph")
    if loss.size != 1:
        raise DimensionError(f"backward needs a scalar loss, got shape {loss.shape}")
    if loss._node is not None and not _produced_by(loss, graph):
        raise GraphUsageError("loss was not produced by this graph")
    graph.consumed = True

    grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.values)}
    for node in reversed(graph.nodes):
        gout = grads.pop(id(node.output), None)
        if gout is None:
            continue
        input_grads = node.backward_fn(gout)
        for tensor, g in zip(node.inputs, input_grads):
            if g is None or not tensor.requires_grad:
                continue
            key = id(tensor)
            if key in grads:
                grads[key] = grads[key] + g
            else:
                grads[key] = g
        # Saved intermediates are released once the node is processed.
        node.backward_fn = _spent

    # Whatever is left belongs to leaves (or tensors from other graphs).
    _assign_leaf_grads(loss, graph, grads)


def _produced_by(loss: Tensor, graph: Graph) -> bool:
    return any(node is loss._node for node in reversed(graph.nodes))


def _assign_leaf_grads(loss: Tensor, graph: Graph, grads: Dict[int, np.ndarray]) -> None:
    leaves: Dict[int, Tensor] = {}
    if loss.is_leaf and loss.requires_grad:
        leaves[id(loss)] = loss
    for node in graph.nodes:
        for tensor in node.inputs:
            if tensor.requires_grad and tensor.is_leaf:
                leaves[id(tensor)] = tensor
    for key, tensor in leaves.items():
        g = grads.get(key)
        if g is None:
            continue
        if tensor.grad is None:
            tensor.grad = np.zeros_like(tensor.values)
        tensor.grad += g.astype(tensor.values.dtype, copy=False)


def _spent(_gout):
    raise GraphUsageError("graph node already consumed")
