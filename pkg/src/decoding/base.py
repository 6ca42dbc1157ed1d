"""
Scorer interface shared by decoding strategies.

A scorer turns a batch of equal-length target prefixes into next-token
logits. Translation models, language models and fixture probability
tables all implement it, so beam search and fusion never need to know
which one they are driving.
"""

from abc import ABC, abstractmethod
from typing import Any, Optional, Sequence

import numpy as np


class Scorer(ABC):
    """
    Abstract next-token scorer.

    Subclasses set ``vocab_size`` and ``fingerprint`` (the vocabulary they
    were built with) and implement :meth:`start` and :meth:`step_logits`.
    """

    vocab_size: int
    fingerprint: int
    # Longest prefix (bos included) the scorer accepts; None means unbounded.
    max_prefix: Optional[int] = None

    @abstractmethod
    def start(self, src_ids: Sequence[int]) -> Any:
        """
        Prepare per-sentence state, e.g. the encoder memory.

        Args:
            src_ids: Source ids ending with eos; ignored by language models.
        """
        pass

    @abstractmethod
    def step_logits(self, state: Any, prefixes: Sequence[Sequence[int]]) -> np.ndarray:
        """
        Next-token logits for each prefix.

        Args:
            state: Value returned by :meth:`start`.
            prefixes: Equal-length prefixes, each starting with bos.

        Returns:
            Array of shape [len(prefixes), vocab_size].
        """
        pass
