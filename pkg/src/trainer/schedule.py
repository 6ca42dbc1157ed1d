"""
Inverse square-root learning-rate schedule with linear warmup.
"""

from ..errors import UsageError


def lr_at_step(step: int, d_model: int, warmup_steps: int) -> float:
    """
    Learning rate at a 1-based optimizer step.

    d_model^-0.5 * min(step^-0.5, step * warmup^-1.5): linear growth up to
    ``warmup_steps``, inverse square-root decay afterwards.

    Raises:
        UsageError: If ``step`` is below 1.
    """
    if step < 1:
        raise UsageError(f"learning-rate steps start at 1, got {step}")
    if warmup_steps < 1:
        raise UsageError(f"warmup_steps must be at least 1, got {warmup_steps}")
    return d_model ** -0.5 * min(step ** -0.5, step * warmup_steps ** -1.5)
