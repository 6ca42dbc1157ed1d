"""
Shared fixtures: a small copy-task corpus, its vocabulary and a tiny model.
"""

import numpy as np
import pytest

from src.corpus import ParallelCorpus, SentencePair
from src.model import ModelConfig, ModelKind
from src.tokenizer import learn_merges
from src.trainer import TrainConfig

WORDS = ["ab", "ba", "cab", "bad", "dab", "ca", "ac", "dd"]


def copy_sentences(count: int, seed: int):
    rng = np.random.default_rng(seed)
    return [
        " ".join(rng.choice(WORDS, size=int(rng.integers(1, 5))))
        for _ in range(count)
    ]


def copy_corpus(count: int = 40, seed: int = 0) -> ParallelCorpus:
    pairs = [SentencePair(s, s) for s in copy_sentences(count, seed)]
    return ParallelCorpus(pairs=pairs, src_lang="src", tgt_lang="tgt")


def small_model(vocab, kind: ModelKind = ModelKind.TRANSLATION, **overrides) -> ModelConfig:
    values = dict(n_layers=1, d_model=16, n_heads=2, ffn_dim=32, dropout=0.1, max_len=24, kind=kind)
    values.update(overrides)
    return ModelConfig(vocab_size=vocab.size, **values)


def fast_train(**overrides) -> TrainConfig:
    values = dict(epochs=2, batch_tokens=64, warmup_steps=10, label_smoothing=0.1, seed=3)
    values.update(overrides)
    return TrainConfig(**values)


@pytest.fixture
def corpus():
    return copy_corpus()


@pytest.fixture
def vocab(corpus):
    return learn_merges([corpus.sources + copy_sentences(200, seed=99)], vocab_size=24)


@pytest.fixture
def model_config(vocab):
    return small_model(vocab)
