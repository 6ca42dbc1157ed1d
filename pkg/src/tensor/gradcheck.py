"""
Finite-difference oracle for checking autodiff gradients.
"""

from typing import Callable

import numpy as np

from ..errors import DimensionError, NonDeterminismError
from ..logging_config import get_logger
from .tensor import Graph, Tensor, backward

logger = get_logger(__name__)

ScalarFn = Callable[[Tensor], Tensor]


def _evaluate(f: ScalarFn, values: np.ndarray) -> float:
    out = f(Tensor(values, requires_grad=False))
    if out.size != 1:
        raise DimensionError(f"finite_diff_check needs a scalar function, got shape {out.shape}")
    return float(out.values.reshape(-1)[0])


def finite_diff_check(
    f: ScalarFn,
    x: Tensor,
    step: float = 1e-5,
    floor: float = 1e-8,
) -> float:
    """
    Compare autodiff gradients of ``f`` at ``x`` with central differences.

    The check runs in float64: ``x`` is copied to double precision before
    both the analytic and the numeric evaluation.

    Args:
        f: Deterministic function mapping a tensor to a scalar tensor.
        x: Point at which to differentiate.
        step: Central difference step h.
        floor: Lower bound of the relative-error denominator.

    Returns:
        max over coordinates of |a - n| / max(|a|, |n|, floor).

    Raises:
        NonDeterminismError: If re-evaluating ``f`` at ``x`` changes its value.
    """
    point = x.values.astype(np.float64)
    variable = Tensor(point.copy(), requires_grad=True)
    with Graph() as graph:
        out = f(variable)
    if out.size != 1:
        raise DimensionError(f"finite_diff_check needs a scalar function, got shape {out.shape}")
    first = float(out.values.reshape(-1)[0])
    backward(out, graph)
    analytic = variable.grad.astype(np.float64).reshape(-1)

    second = _evaluate(f, point.copy())
    if first != second:
        raise NonDeterminismError(
            f"function returned {first!r} then {second!r} for the same input; disable dropout"
        )

    numeric = np.empty_like(analytic)
    flat = point.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + step
        plus = _evaluate(f, point.copy())
        flat[i] = original - step
        minus = _evaluate(f, point.copy())
        flat[i] = original
        numeric[i] = (plus - minus) / (2.0 * step)

    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    errors = np.abs(analytic - numeric) / denom
    worst = float(errors.max()) if errors.size else 0.0
    logger.debug("finite difference check", coordinates=int(flat.size), max_rel_error=worst)
    return worst
