"""
Scorers backed by Transformer parameters.
"""

from typing import Optional, Sequence

import numpy as np

from ..errors import ConfigError
from ..model import MASK_VALUE, ModelConfig, ModelKind, Parameters, decoder_forward, encoder_forward
from ..tensor import Tensor
from ..tokenizer import BOS_ID, PAD_ID
from .base import Scorer

# Tokens a decoder must never emit.
_BLOCKED = (PAD_ID, BOS_ID)


def _block_specials(logits: np.ndarray) -> np.ndarray:
    out = logits.astype(np.float64)
    out[:, list(_BLOCKED)] = MASK_VALUE
    return out


class TransformerScorer(Scorer):
    """Encoder-decoder translation model."""

    def __init__(self, params: Parameters, config: ModelConfig, fingerprint: int):
        if config.kind != ModelKind.TRANSLATION:
            raise ConfigError("TransformerScorer needs a translation model")
        self.params = params
        self.config = config
        self.fingerprint = fingerprint
        self.vocab_size = config.vocab_size
        self.max_prefix = config.max_len

    @classmethod
    def from_checkpoint(cls, checkpoint) -> "TransformerScorer":
        return cls(checkpoint.params, checkpoint.config, checkpoint.fingerprint)

    def start(self, src_ids: Sequence[int]) -> Tensor:
        return encoder_forward(self.params, self.config, [list(src_ids)])

    def step_logits(self, state: Tensor, prefixes: Sequence[Sequence[int]]) -> np.ndarray:
        batch = len(prefixes)
        memory = Tensor(np.repeat(state.values, batch, axis=0))
        logits = decoder_forward(self.params, self.config, [list(p) for p in prefixes], memory)
        return _block_specials(logits.values[:, -1, :])


class LanguageModelScorer(Scorer):
    """Decoder-only language model; the source sentence is ignored."""

    def __init__(self, params: Parameters, config: ModelConfig, fingerprint: int):
        if config.kind != ModelKind.LANGUAGE_MODEL:
            raise ConfigError("LanguageModelScorer needs a language model")
        self.params = params
        self.config = config
        self.fingerprint = fingerprint
        self.vocab_size = config.vocab_size
        self.max_prefix = config.max_len

    @classmethod
    def from_checkpoint(cls, checkpoint) -> "LanguageModelScorer":
        return cls(checkpoint.params, checkpoint.config, checkpoint.fingerprint)

    def start(self, src_ids: Sequence[int]) -> Optional[Tensor]:
        return None

    def step_logits(self, state, prefixes: Sequence[Sequence[int]]) -> np.ndarray:
        logits = decoder_forward(self.params, self.config, [list(p) for p in prefixes])
        return _block_specials(logits.values[:, -1, :])
