"""
Turning a tokenized corpus into length-bucketed batches.
"""

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..corpus import ParallelCorpus
from ..logging_config import get_logger
from ..model import pad_batch
from ..tokenizer import BOS_ID, EOS_ID, PAD_ID, SubwordVocabulary

logger = get_logger(__name__)


@dataclass(frozen=True)
class Example:
    """
    One encoded training sequence pair.

    ``source`` ends with eos; it is empty for language-model examples.
    ``target`` holds the bare target ids; bos/eos framing happens at batch time.
    """
    source: Tuple[int, ...]
    target: Tuple[int, ...]

    @property
    def target_tokens(self) -> int:
        return len(self.target) + 1


@dataclass
class Batch:
    source: Optional[np.ndarray]
    decoder_input: np.ndarray
    decoder_target: np.ndarray

    @property
    def size(self) -> int:
        return int(self.decoder_input.shape[0])

    @property
    def target_tokens(self) -> int:
        return int((self.decoder_target != PAD_ID).sum())


def encode_pairs(
    corpus: ParallelCorpus,
    vocab: SubwordVocabulary,
    max_len: int,
) -> List[Example]:
    """
    Encode every pair, dropping those that do not fit ``max_len``.

    Both sides need room for their eos (and the decoder side for bos).
    """
    examples: List[Example] = []
    skipped = 0
    for pair in corpus.pairs:
        source = vocab.encode(pair.source)
        target = vocab.encode(pair.target)
        if len(source) + 1 > max_len or len(target) + 1 > max_len:
            skipped += 1
            continue
        examples.append(Example(tuple(source) + (EOS_ID,), tuple(target)))
    if skipped:
        logger.warning("Skipped over-length pairs", skipped=skipped, max_len=max_len)
    return examples


def encode_sentences(
    sentences: Iterable[str],
    vocab: SubwordVocabulary,
    max_len: int,
) -> List[Example]:
    """Language-model examples: target-only sequences."""
    examples: List[Example] = []
    skipped = 0
    for sentence in sentences:
        ids = vocab.encode(sentence)
        if len(ids) + 1 > max_len:
            skipped += 1
            continue
        examples.append(Example((), tuple(ids)))
    if skipped:
        logger.warning("Skipped over-length sentences", skipped=skipped, max_len=max_len)
    return examples


def collate(examples: Sequence[Example]) -> Batch:
    """Pad a group of examples into teacher-forcing arrays."""
    decoder_input = pad_batch([(BOS_ID,) + ex.target for ex in examples])
    decoder_target = pad_batch([ex.target + (EOS_ID,) for ex in examples])
    source = None
    if any(ex.source for ex in examples):
        source = pad_batch([ex.source for ex in examples])
    return Batch(source, decoder_input, decoder_target)


def make_batches(
    examples: Sequence[Example],
    batch_tokens: int,
    seed: int,
    epoch: int,
) -> List[Batch]:
    """
    Group examples of similar length so that each batch holds at most
    ``batch_tokens`` padded target positions.

    The order within equal lengths and the order of batches are drawn from
    a generator seeded by (seed, epoch), so every epoch is reproducible.
    """
    rng = np.random.default_rng([seed, epoch])
    shuffled = rng.permutation(len(examples))
    order = sorted(
        shuffled.tolist(),
        key=lambda i: (examples[i].target_tokens, len(examples[i].source)),
    )

    groups: List[List[Example]] = []
    current: List[Example] = []
    widest = 0
    for i in order:
        ex = examples[i]
        width = max(widest, ex.target_tokens)
        if current and width * (len(current) + 1) > batch_tokens:
            groups.append(current)
            current, width = [], ex.target_tokens
        current.append(ex)
        widest = width
    if current:
        groups.append(current)

    batch_order = rng.permutation(len(groups))
    return [collate(groups[i]) for i in batch_order]
