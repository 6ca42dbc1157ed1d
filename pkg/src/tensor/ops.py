"""
Differentiable primitives over :class:`Tensor`.

Each op computes its forward value with numpy, checks it for NaN/Inf and,
when a graph is recording, registers a backward closure. Reductions
(softmax denominators, normalization statistics, loss means) accumulate
in 64-bit floats and cast back to the input dtype.
"""

from typing import Optional, Sequence, Union

import numpy as np

from ..errors import ConfigError, DimensionError, TokenIndexError, UsageError
from .tensor import Tensor, make_output, unbroadcast

Operand = Union[Tensor, float, int, np.ndarray]

LAYER_NORM_EPS = 1e-6


def _as_tensor(x: Operand) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _swap_last(a: np.ndarray) -> np.ndarray:
    return np.swapaxes(a, -1, -2)


def add(a: Operand, b: Operand) -> Tensor:
    """Elementwise sum with numpy broadcasting."""
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        values = a.values + b.values
    except ValueError as e:
        raise DimensionError(f"add: cannot broadcast {a.shape} with {b.shape}") from e

    def backward_fn(g):
        return unbroadcast(g, a.shape), unbroadcast(g, b.shape)

    return make_output("add", values, (a, b), backward_fn)


def mul(a: Operand, b: Operand) -> Tensor:
    """Elementwise product with numpy broadcasting."""
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        values = a.values * b.values
    except ValueError as e:
        raise DimensionError(f"mul: cannot broadcast {a.shape} with {b.shape}") from e

    def backward_fn(g):
        return unbroadcast(g * b.values, a.shape), unbroadcast(g * a.values, b.shape)

    return make_output("mul", values, (a, b), backward_fn)


def scale(x: Tensor, factor: float) -> Tensor:
    values = x.values * x.values.dtype.type(factor)

    def backward_fn(g):
        return (g * factor,)

    return make_output("scale", values, (x,), backward_fn)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """
    Matrix product over the last two axes, batched over leading axes.

    Args:
        a: Tensor of shape [..., m, k].
        b: Tensor of shape [..., k, n] (a plain [k, n] matrix broadcasts).

    Returns:
        Tensor of shape [..., m, n].

    Raises:
        DimensionError: If either operand has rank < 2 or inner extents differ.
    """
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise DimensionError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    try:
        values = np.matmul(a.values, b.values)
    except ValueError as e:
        raise DimensionError(f"matmul: incompatible shapes {a.shape} and {b.shape}") from e

    def backward_fn(g):
        grad_a = unbroadcast(np.matmul(g, _swap_last(b.values)), a.shape) if a.requires_grad else None
        grad_b = unbroadcast(np.matmul(_swap_last(a.values), g), b.shape) if b.requires_grad else None
        return grad_a, grad_b

    return make_output("matmul", values, (a, b), backward_fn)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    values = x.values.reshape(shape)

    def backward_fn(g):
        return (g.reshape(x.shape),)

    return make_output("reshape", values, (x,), backward_fn)


def transpose(x: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))
    values = np.ascontiguousarray(np.transpose(x.values, axes))

    def backward_fn(g):
        return (np.transpose(g, inverse),)

    return make_output("transpose", values, (x,), backward_fn)


def sum(x: Tensor) -> Tensor:  # noqa: A001 - mirrors the numpy name
    """Sum of every element, as a scalar tensor."""
    values = np.asarray(x.values.sum(dtype=np.float64), dtype=x.dtype)

    def backward_fn(g):
        return (np.broadcast_to(g, x.shape).astype(x.dtype),)

    return make_output("sum", values, (x,), backward_fn)


def relu(x: Tensor) -> Tensor:
    mask = x.values > 0
    values = np.where(mask, x.values, 0).astype(x.dtype)

    def backward_fn(g):
        return (g * mask,)

    return make_output("relu", values, (x,), backward_fn)


def _softmax64(values: np.ndarray) -> np.ndarray:
    shifted = values.astype(np.float64) - values.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _log_softmax64(values: np.ndarray) -> np.ndarray:
    shifted = values.astype(np.float64) - values.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax(x: Tensor) -> Tensor:
    """Softmax over the last axis, with max-subtraction."""
    if x.ndim == 0 or x.shape[-1] < 1:
        raise DimensionError(f"softmax needs a non-empty last axis, got shape {x.shape}")
    probs = _softmax64(x.values)
    values = probs.astype(x.dtype)

    def backward_fn(g):
        g64 = g.astype(np.float64)
        inner = (g64 * probs).sum(axis=-1, keepdims=True)
        return ((probs * (g64 - inner)).astype(x.dtype),)

    return make_output("softmax", values, (x,), backward_fn)


def log_softmax(x: Tensor) -> Tensor:
    if x.ndim == 0 or x.shape[-1] < 1:
        raise DimensionError(f"log_softmax needs a non-empty last axis, got shape {x.shape}")
    logp = _log_softmax64(x.values)
    values = logp.astype(x.dtype)

    def backward_fn(g):
        g64 = g.astype(np.float64)
        probs = np.exp(logp)
        return ((g64 - probs * g64.sum(axis=-1, keepdims=True)).astype(x.dtype),)

    return make_output("log_softmax", values, (x,), backward_fn)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = LAYER_NORM_EPS) -> Tensor:
    """
    Normalize each slice along the last axis to zero mean and unit variance,
    then apply ``gain`` and ``bias``.

    Raises:
        DimensionError: If the last axis is empty or gain/bias do not match it.
    """
    if x.ndim == 0 or x.shape[-1] == 0:
        raise DimensionError(f"layer_norm needs a non-empty last axis, got shape {x.shape}")
    d = x.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise DimensionError(
            f"layer_norm: gain {gain.shape} and bias {bias.shape} must both be ({d},)"
        )
    if eps <= 0:
        raise DimensionError("layer_norm: eps must be positive")

    x64 = x.values.astype(np.float64)
    mean = x64.mean(axis=-1, keepdims=True)
    centered = x64 - mean
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    normed = centered * inv_std
    out_dtype = np.result_type(x.dtype, gain.dtype, bias.dtype)
    values = (normed * gain.values + bias.values).astype(out_dtype)

    def backward_fn(g):
        g64 = g.astype(np.float64)
        lead = tuple(range(g.ndim - 1))
        grad_gain = (g64 * normed).sum(axis=lead).astype(gain.dtype)
        grad_bias = g64.sum(axis=lead).astype(bias.dtype)
        dnorm = g64 * gain.values.astype(np.float64)
        grad_x = inv_std * (
            dnorm
            - dnorm.mean(axis=-1, keepdims=True)
            - normed * (dnorm * normed).mean(axis=-1, keepdims=True)
        )
        return grad_x.astype(x.dtype), grad_gain, grad_bias

    return make_output("layer_norm", values, (x, gain, bias), backward_fn)


def embedding(weight: Tensor, ids: np.ndarray) -> Tensor:
    """
    Gather rows of ``weight`` for an integer id array.

    Raises:
        TokenIndexError: If any id is negative or >= the number of rows.
    """
    ids = np.asarray(ids, dtype=np.int64)
    vocab = weight.shape[0]
    if ids.size and (ids.min() < 0 or ids.max() >= vocab):
        raise TokenIndexError(f"embedding: ids must lie in [0, {vocab}), got max {ids.max()}")
    values = weight.values[ids]

    def backward_fn(g):
        grad = np.zeros_like(weight.values)
        np.add.at(grad, ids.reshape(-1), g.reshape(-1, weight.shape[1]))
        return (grad,)

    return make_output("embedding", values, (weight,), backward_fn)


def dropout(
    x: Tensor,
    rate: float,
    rng: Optional[np.random.Generator],
    train_mode: bool = True,
) -> Tensor:
    """
    Inverted dropout with a mask drawn from the caller's generator.

    Identity when ``train_mode`` is off or ``rate`` is zero.
    """
    if not train_mode or rate <= 0.0:
        return x
    if rng is None:
        raise UsageError("dropout in train mode needs an explicit random generator")
    keep = (rng.random(x.shape) >= rate).astype(x.dtype)
    mask = keep / x.dtype.type(1.0 - rate)
    values = x.values * mask

    def backward_fn(g):
        return (g * mask,)

    return make_output("dropout", values, (x,), backward_fn)


def cross_entropy_ls(
    logits: Tensor,
    targets: np.ndarray,
    smoothing: float,
    pad_id: int,
) -> Tensor:
    """
    Label-smoothed cross-entropy averaged over non-pad target positions.

    The target distribution puts ``1 - smoothing`` on the gold token plus
    ``smoothing / V`` on every token. An all-pad batch yields a zero loss.

    Args:
        logits: Tensor of shape [..., V].
        targets: Integer array matching ``logits.shape[:-1]``.
        smoothing: Mass moved to the uniform distribution, in [0, 1).
        pad_id: Target id excluded from the mean.

    Raises:
        DimensionError: If target and logits shapes disagree.
        TokenIndexError: If a target id is outside [0, V).
    """
    if not 0.0 <= smoothing < 1.0:
        raise ConfigError(f"smoothing must lie in [0, 1), got {smoothing}")
    targets = np.asarray(targets, dtype=np.int64)
    vocab = logits.shape[-1]
    if targets.shape != logits.shape[:-1]:
        raise DimensionError(
            f"cross_entropy_ls: targets {targets.shape} do not match logits {logits.shape}"
        )
    if targets.size and (targets.min() < 0 or targets.max() >= vocab):
        raise TokenIndexError(f"cross_entropy_ls: targets must lie in [0, {vocab})")

    flat_logits = logits.values.reshape(-1, vocab)
    flat_targets = targets.reshape(-1)
    keep = (flat_targets != pad_id).astype(np.float64)
    count = keep.sum()

    smoothed = np.full(flat_logits.shape, smoothing / vocab, dtype=np.float64)
    smoothed[np.arange(flat_targets.size), flat_targets] += 1.0 - smoothing

    logp = _log_softmax64(flat_logits)
    per_position = -(smoothed * logp).sum(axis=-1)
    loss = float((per_position * keep).sum() / count) if count > 0 else 0.0
    values = np.asarray(loss, dtype=logits.dtype)

    def backward_fn(g):
        if count == 0:
            return (np.zeros_like(logits.values),)
        grad = (np.exp(logp) - smoothed) * (keep / count)[:, None] * float(g)
        return (grad.reshape(logits.shape).astype(logits.dtype),)

    return make_output("cross_entropy_ls", values, (logits,), backward_fn)


def split_heads(x: Tensor, n_heads: int) -> Tensor:
    """[b, s, d] -> [b, h, s, d/h]."""
    b, s, d = x.shape
    return transpose(reshape(x, (b, s, n_heads, d // n_heads)), (0, 2, 1, 3))


def merge_heads(x: Tensor) -> Tensor:
    """[b, h, s, dh] -> [b, s, h*dh]."""
    b, h, s, dh = x.shape
    return reshape(transpose(x, (0, 2, 1, 3)), (b, s, h * dh))

