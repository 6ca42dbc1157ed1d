"""
Training hyper-parameters.
"""

from dataclasses import asdict, dataclass
from typing import Any, Dict, Tuple

from ..errors import ConfigError


@dataclass(frozen=True)
class TrainConfig:
    """
    Optimization settings of one training run.

    Attributes:
        epochs: Full passes over the training corpus.
        batch_tokens: Padded target-token budget per batch.
        warmup_steps: Steps of linear learning-rate warmup.
        label_smoothing: Mass moved from the gold token to the uniform distribution.
        seed: Seed of batching order and dropout masks.
        freeze: Parameter path globs kept constant during the run.
        betas: Adam decay rates.
        eps: Adam denominator epsilon.
        lr_scale: Multiplier on the warmup schedule.
    """

    epochs: int = 10
    batch_tokens: int = 4096
    warmup_steps: int = 4000
    label_smoothing: float = 0.1
    seed: int = 1
    freeze: Tuple[str, ...] = ()
    betas: Tuple[float, float] = (0.9, 0.98)
    eps: float = 1e-9
    lr_scale: float = 1.0

    def __post_init__(self):
        if self.epochs < 0:
            raise ConfigError(f"train.epochs must be non-negative, got {self.epochs}")
        if self.batch_tokens < 1:
            raise ConfigError(f"train.batch_tokens must be positive, got {self.batch_tokens}")
        if self.warmup_steps < 1:
            raise ConfigError(f"train.warmup_steps must be at least 1, got {self.warmup_steps}")
        if not 0.0 <= self.label_smoothing < 1.0:
            raise ConfigError(
                f"train.label_smoothing must lie in [0, 1), got {self.label_smoothing}"
            )
        if len(self.betas) != 2 or not all(0.0 <= b < 1.0 for b in self.betas):
            raise ConfigError(f"train.betas must be two values in [0, 1), got {self.betas}")
        if self.eps <= 0:
            raise ConfigError(f"train.eps must be positive, got {self.eps}")
        if self.lr_scale <= 0:
            raise ConfigError(f"train.lr_scale must be positive, got {self.lr_scale}")
        object.__setattr__(self, "freeze", tuple(self.freeze))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))

    def check_max_len(self, max_len: int) -> None:
        """A batch must be able to hold at least one maximal sequence."""
        if self.batch_tokens < max_len:
            raise ConfigError(
                f"train.batch_tokens ({self.batch_tokens}) must be at least model.max_len ({max_len})"
            )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
