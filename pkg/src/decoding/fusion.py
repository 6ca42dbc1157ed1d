"""
Combining translation-model and language-model scores at decode time.

Shallow fusion adds the weighted LM log-probabilities to the translation
log-probabilities. PostNorm multiplies the two distributions and
renormalizes, either with a softmax over the products or by dividing by
their sum.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Type

import numpy as np

from ..errors import ConfigError, DimensionError, UsageError
from ..tensor import Tensor, log_softmax, softmax

LOG_FLOOR = -1e9
DEFAULT_FUSION_WEIGHT = 0.003


class FusionMode(str, Enum):
    """How the language model joins the search."""
    NONE = "none"
    SHALLOW = "shallow"
    POSTNORM = "postnorm"


class PostNormNormalization(str, Enum):
    SOFTMAX = "softmax"
    SUM = "sum"


@dataclass(frozen=True)
class FusionConfig:
    mode: FusionMode = FusionMode.NONE
    weight: float = DEFAULT_FUSION_WEIGHT
    postnorm_norm: PostNormNormalization = PostNormNormalization.SOFTMAX

    def __post_init__(self):
        try:
            object.__setattr__(self, "mode", FusionMode(self.mode))
            object.__setattr__(self, "postnorm_norm", PostNormNormalization(self.postnorm_norm))
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if self.weight < 0:
            raise ConfigError(f"fusion.weight must be non-negative, got {self.weight}")

    @property
    def uses_lm(self) -> bool:
        return self.mode != FusionMode.NONE


def _log_probs(logits: np.ndarray) -> np.ndarray:
    return np.maximum(log_softmax(Tensor(logits, dtype=np.float64)).values, LOG_FLOOR)


def _probs(logits: np.ndarray) -> np.ndarray:
    return softmax(Tensor(logits, dtype=np.float64)).values


class FusionStrategy(ABC):
    """Maps (translation logits, LM logits) to floored log-probabilities."""

    @abstractmethod
    def combine(self, tm_logits: np.ndarray, lm_logits: Optional[np.ndarray], config: FusionConfig) -> np.ndarray:
        pass


class NoFusion(FusionStrategy):
    def combine(self, tm_logits, lm_logits, config):
        return _log_probs(tm_logits)


class ShallowFusion(FusionStrategy):
    """log p_TM + weight * log p_LM."""

    def combine(self, tm_logits, lm_logits, config):
        return _log_probs(tm_logits) + config.weight * _log_probs(lm_logits)


class PostNormFusion(FusionStrategy):
    """Renormalized component-wise product p_TM * p_LM."""

    def combine(self, tm_logits, lm_logits, config):
        product = _probs(tm_logits) * _probs(lm_logits)
        if config.postnorm_norm == PostNormNormalization.SOFTMAX:
            return _log_probs(product)
        total = product.sum(axis=-1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(product / total)


FUSION_STRATEGIES: Dict[FusionMode, Type[FusionStrategy]] = {
    FusionMode.NONE: NoFusion,
    FusionMode.SHALLOW: ShallowFusion,
    FusionMode.POSTNORM: PostNormFusion,
}


def get_fusion_strategy(mode: FusionMode) -> FusionStrategy:
    try:
        return FUSION_STRATEGIES[FusionMode(mode)]()
    except (KeyError, ValueError) as e:
        raise ConfigError(f"unknown fusion mode {mode!r}; choose from {[m.value for m in FusionMode]}") from e


def fuse_step_scores(
    tm_logits: Tensor,
    lm_logits: Optional[Tensor],
    config: FusionConfig,
) -> Tensor:
    """
    Next-token log-probabilities after fusion, floored at -1e9.

    Works on a single [V] row or a [B, V] batch; computed in float64.

    Raises:
        UsageError: If an LM is required but missing, or given with mode none.
        DimensionError: If the two score tensors differ in shape.
    """
    if config.uses_lm and lm_logits is None:
        raise UsageError(f"fusion mode {config.mode.value} needs language-model logits")
    if not config.uses_lm and lm_logits is not None:
        raise UsageError("language-model logits given but fusion mode is none")
    if lm_logits is not None and lm_logits.shape != tm_logits.shape:
        raise DimensionError(
            f"fusion: translation scores {tm_logits.shape} vs language-model scores {lm_logits.shape}"
        )
    strategy = get_fusion_strategy(config.mode)
    lm_values = None if lm_logits is None else lm_logits.values
    fused = strategy.combine(tm_logits.values, lm_values, config)
    fused = np.nan_to_num(fused, nan=LOG_FLOOR, neginf=LOG_FLOOR)
    return Tensor(np.maximum(fused, LOG_FLOOR), dtype=np.float64)
