"""
Adam with bias correction over named parameter tensors.
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping, Tuple

import numpy as np

from ..errors import DimensionError
from ..tensor import Tensor


@dataclass
class AdamState:
    """First/second moment estimates keyed by canonical parameter path."""
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    def reset(self) -> None:
        self.step = 0
        self.m.clear()
        self.v.clear()


def adam_step(
    params: Mapping[str, Tensor],
    grads: Mapping[str, np.ndarray],
    state: AdamState,
    lr: float,
    betas: Tuple[float, float] = (0.9, 0.98),
    eps: float = 1e-9,
) -> AdamState:
    """
    Apply one Adam update in place.

    Only the paths in ``params`` move; callers leave frozen paths out.
    Moments live in the parameter dtype so checkpoints restore them
    exactly.

    Raises:
        DimensionError: If a gradient shape differs from its parameter.
    """
    beta1, beta2 = betas
    state.step += 1
    t = state.step
    correction1 = 1.0 - beta1 ** t
    correction2 = 1.0 - beta2 ** t

    for name, tensor in params.items():
        grad = grads[name]
        if grad.shape != tensor.shape:
            raise DimensionError(f"{name}: gradient {grad.shape} does not match parameter {tensor.shape}")
        dtype = tensor.values.dtype
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(tensor.values)
            v = np.zeros_like(tensor.values)
        m = (beta1 * m + (1.0 - beta1) * grad).astype(dtype)
        v = (beta2 * v + (1.0 - beta2) * grad * grad).astype(dtype)
        m_hat = m / correction1
        v_hat = v / correction2
        tensor.values -= (lr * m_hat / (np.sqrt(v_hat) + eps)).astype(dtype)
        state.m[name] = m
        state.v[name] = v
    return state
