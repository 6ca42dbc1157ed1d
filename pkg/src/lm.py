"""
Decoder-only language models on monolingual text, for fusion decoding.
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

from .errors import ConfigError, FingerprintError
from .logging_config import get_logger
from .model import ModelConfig, ModelKind, Parameters, decoder_forward
from .tensor import cross_entropy_ls
from .tokenizer import PAD_ID, SubwordVocabulary, normalize, read_lines
from .trainer import Checkpoint, Example, TrainConfig, TrainingSession, encode_sentences, make_batches

logger = get_logger(__name__)


@dataclass
class MonoCorpus:
    """Monolingual sentences of one language."""
    sentences: List[str]
    lang: str

    def __len__(self) -> int:
        return len(self.sentences)


def load_mono(path: Union[str, Path], lang: str) -> MonoCorpus:
    """Read one sentence per line, NFC-normalized and trimmed; empty lines are dropped."""
    sentences: List[str] = []
    dropped = 0
    for line in read_lines(path):
        line = normalize(line).strip()
        if line:
            sentences.append(line)
        else:
            dropped += 1
    if dropped:
        logger.warning("Dropped empty monolingual lines", path=str(path), dropped=dropped)
    logger.info("Loaded monolingual corpus", path=str(path), sentences=len(sentences), lang=lang)
    return MonoCorpus(sentences=sentences, lang=lang)


def train_lm(
    mono: MonoCorpus,
    config: ModelConfig,
    tcfg: TrainConfig,
    vocab: SubwordVocabulary,
    fingerprint: Optional[int] = None,
    workdir: Optional[Union[str, Path]] = None,
) -> Checkpoint:
    """
    Train a language model with bos-prefixed, eos-suffixed sentences.

    Args:
        mono: Training sentences.
        config: Model config with kind "language-model".
        tcfg: Optimization settings.
        vocab: Shared vocabulary.
        fingerprint: Vocabulary fingerprint of the translation model the LM
            will be fused with; checked against ``vocab``.
        workdir: Where last.ckpt and train.log go.

    Returns:
        The final checkpoint.

    Raises:
        ConfigError: For a non-LM config, an empty corpus or a fingerprint mismatch.
    """
    if config.kind != ModelKind.LANGUAGE_MODEL:
        raise ConfigError("train_lm needs model.kind=language-model")
    if fingerprint is not None and fingerprint != vocab.fingerprint():
        raise FingerprintError(
            f"language-model vocabulary {vocab.fingerprint():016x} differs from the translation "
            f"model's {fingerprint:016x}"
        )
    examples = encode_sentences(mono.sentences, vocab, config.max_len)
    if not examples:
        raise ConfigError("monolingual corpus is empty")
    session = TrainingSession(config, tcfg, vocab, workdir=workdir, stage="lm")

    def log_perplexity(record) -> None:
        # record.mean_loss is label-smoothed and averaged over dropout masks
        ce = _mean_cross_entropy(session.params, config, examples, tcfg.batch_tokens)
        logger.info("LM epoch", epoch=record.epoch, train_loss=record.mean_loss, train_perplexity=math.exp(ce))

    session.on("epoch_end", log_perplexity)
    session.fit(examples)
    return session.checkpoint(include_optimizer=False)


def perplexity(
    checkpoint: Checkpoint,
    mono: MonoCorpus,
    vocab: SubwordVocabulary,
    batch_tokens: int = 4096,
) -> float:
    """
    exp of the mean per-token cross-entropy; eos counts as a target, bos does not.

    Raises:
        ConfigError: If the checkpoint is not a language model or the corpus is empty.
    """
    if checkpoint.config.kind != ModelKind.LANGUAGE_MODEL:
        raise ConfigError("perplexity needs a language-model checkpoint")
    checkpoint.check_fingerprint(vocab.fingerprint())
    examples = encode_sentences(mono.sentences, vocab, checkpoint.config.max_len)
    if not examples:
        raise ConfigError("monolingual corpus is empty")
    return math.exp(_mean_cross_entropy(checkpoint.params, checkpoint.config, examples, batch_tokens))


def _mean_cross_entropy(
    params: Parameters, config: ModelConfig, examples: Sequence[Example], batch_tokens: int
) -> float:
    """Unsmoothed per-token cross-entropy of ``examples``, eos included."""
    total = 0.0
    tokens = 0
    for batch in make_batches(examples, max(batch_tokens, config.max_len), seed=0, epoch=0):
        logits = decoder_forward(params, config, batch.decoder_input)
        loss = cross_entropy_ls(logits, batch.decoder_target, 0.0, PAD_ID)
        total += float(loss.values) * batch.target_tokens
        tokens += batch.target_tokens
    return total / tokens
