"""
Post-LN Transformer encoder/decoder built on the tensor core.

With ``memory=None`` the decoder is a language model: the same stack
without cross-attention, reading only its own prefix.
"""

from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from ..errors import LengthError, UsageError
from ..tensor import (
    Tensor,
    add,
    dropout,
    embedding,
    layer_norm,
    matmul,
    merge_heads,
    relu,
    scale,
    softmax,
    split_heads,
    transpose,
)
from ..tokenizer import PAD_ID
from .config import ModelConfig, ModelKind
from .params import Parameters

MASK_VALUE = -1e9

IdBatch = Union[np.ndarray, Sequence[Sequence[int]]]


@lru_cache(maxsize=16)
def positional_encoding(length: int, d_model: int) -> np.ndarray:
    """Sinusoidal position table of shape [length, d_model]."""
    positions = np.arange(length, dtype=np.float64)[:, None]
    dims = np.arange(0, d_model, 2, dtype=np.float64)
    angles = positions / np.power(10000.0, dims / d_model)
    table = np.zeros((length, d_model), dtype=np.float64)
    table[:, 0::2] = np.sin(angles)
    table[:, 1::2] = np.cos(angles[:, : d_model // 2])
    table = table.astype(np.float32)
    table.setflags(write=False)
    return table


def pad_batch(sequences: Sequence[Sequence[int]], pad_id: int = PAD_ID) -> np.ndarray:
    """Right-pad id sequences to the longest one."""
    width = max((len(s) for s in sequences), default=0)
    batch = np.full((len(sequences), width), pad_id, dtype=np.int64)
    for i, seq in enumerate(sequences):
        batch[i, : len(seq)] = seq
    return batch


def _as_batch(ids: IdBatch, config: ModelConfig) -> np.ndarray:
    if isinstance(ids, np.ndarray):
        batch = ids.astype(np.int64, copy=False)
    else:
        batch = pad_batch(ids)
    if batch.ndim != 2:
        raise UsageError(f"expected a [batch, length] id array, got shape {batch.shape}")
    if batch.shape[1] > config.max_len:
        raise LengthError(f"sequence length {batch.shape[1]} exceeds max_len {config.max_len}")
    return batch


def key_padding_bias(ids: np.ndarray) -> np.ndarray:
    """Additive attention bias [b, 1, 1, s] masking pad keys."""
    return np.where(ids == PAD_ID, MASK_VALUE, 0.0).astype(np.float32)[:, None, None, :]


@lru_cache(maxsize=16)
def causal_bias(length: int) -> np.ndarray:
    """Additive attention bias [1, 1, t, t] hiding future positions."""
    upper = np.triu(np.ones((length, length), dtype=bool), k=1)
    bias = np.where(upper, MASK_VALUE, 0.0).astype(np.float32)[None, None]
    bias.setflags(write=False)
    return bias


def _linear(x: Tensor, params: Parameters, prefix: str) -> Tensor:
    return add(matmul(x, params[f"{prefix}.weight"]), params[f"{prefix}.bias"])


def _attention(
    params: Parameters,
    prefix: str,
    query: Tensor,
    key_value: Tensor,
    bias: Optional[np.ndarray],
    config: ModelConfig,
    train_mode: bool,
    rng: Optional[np.random.Generator],
) -> Tensor:
    q = split_heads(_linear(query, params, f"{prefix}.q"), config.n_heads)
    k = split_heads(_linear(key_value, params, f"{prefix}.k"), config.n_heads)
    v = split_heads(_linear(key_value, params, f"{prefix}.v"), config.n_heads)
    scores = scale(matmul(q, transpose(k, (0, 1, 3, 2))), 1.0 / np.sqrt(config.d_head))
    if bias is not None:
        scores = add(scores, Tensor(bias))
    weights = dropout(softmax(scores), config.dropout, rng, train_mode)
    context = merge_heads(matmul(weights, v))
    return _linear(context, params, f"{prefix}.o")


def _feed_forward(params: Parameters, prefix: str, x: Tensor, config, train_mode, rng) -> Tensor:
    hidden = relu(_linear(x, params, f"{prefix}.w1"))
    hidden = dropout(hidden, config.dropout, rng, train_mode)
    return _linear(hidden, params, f"{prefix}.w2")


def _add_norm(x: Tensor, sublayer: Tensor, params: Parameters, prefix: str, config, train_mode, rng) -> Tensor:
    residual = add(x, dropout(sublayer, config.dropout, rng, train_mode))
    return layer_norm(residual, params[f"{prefix}.gain"], params[f"{prefix}.bias"])


def _embed(params: Parameters, name: str, ids: np.ndarray, config: ModelConfig, train_mode, rng) -> Tensor:
    x = scale(embedding(params[name], ids), np.sqrt(config.d_model))
    x = add(x, Tensor(positional_encoding(ids.shape[1], config.d_model)))
    return dropout(x, config.dropout, rng, train_mode)


def encoder_forward(
    params: Parameters,
    config: ModelConfig,
    src_ids: IdBatch,
    train_mode: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """
    Encode a padded batch of source ids into memory of shape [b, s, d_model].

    Raises:
        UsageError: If the model is a language model.
        LengthError: If a sequence is longer than ``config.max_len``.
    """
    if config.kind != ModelKind.TRANSLATION:
        raise UsageError("a language model has no encoder")
    ids = _as_batch(src_ids, config)
    bias = key_padding_bias(ids)
    x = _embed(params, "encoder.embedding", ids, config, train_mode, rng)
    for layer in range(config.n_layers):
        base = f"encoder.layers.{layer}"
        attended = _attention(params, f"{base}.self_attn", x, x, bias, config, train_mode, rng)
        x = _add_norm(x, attended, params, f"{base}.norm1", config, train_mode, rng)
        x = _add_norm(x, _feed_forward(params, f"{base}.ffn", x, config, train_mode, rng),
                      params, f"{base}.norm2", config, train_mode, rng)
    return x


def decoder_forward(
    params: Parameters,
    config: ModelConfig,
    tgt_ids: IdBatch,
    memory: Optional[Tensor] = None,
    train_mode: bool = False,
    rng: Optional[np.random.Generator] = None,
    memory_pad: Optional[np.ndarray] = None,
) -> Tensor:
    """
    Causal decoder returning logits of shape [b, t, vocab_size].

    Args:
        params: Model parameters.
        config: Model configuration.
        tgt_ids: Target prefixes, starting with bos during training.
        memory: Encoder output; must be None for a language model.
        train_mode: Enables dropout.
        rng: Generator for dropout masks.
        memory_pad: Boolean [b, s] marking pad positions of the source.

    Raises:
        UsageError: If memory presence disagrees with ``config.kind``.
        LengthError: If a sequence is longer than ``config.max_len``.
    """
    if config.kind == ModelKind.LANGUAGE_MODEL and memory is not None:
        raise UsageError("a language model does not accept encoder memory")
    if config.kind == ModelKind.TRANSLATION and memory is None:
        raise UsageError("a translation decoder needs encoder memory")
    ids = _as_batch(tgt_ids, config)
    self_bias = causal_bias(ids.shape[1])
    cross_bias = None
    if memory is not None and memory_pad is not None:
        cross_bias = np.where(memory_pad, MASK_VALUE, 0.0).astype(np.float32)[:, None, None, :]

    x = _embed(params, "decoder.embedding", ids, config, train_mode, rng)
    for layer in range(config.n_layers):
        base = f"decoder.layers.{layer}"
        attended = _attention(params, f"{base}.self_attn", x, x, self_bias, config, train_mode, rng)
        x = _add_norm(x, attended, params, f"{base}.norm1", config, train_mode, rng)
        if memory is not None:
            attended = _attention(params, f"{base}.cross_attn", x, memory, cross_bias, config, train_mode, rng)
            x = _add_norm(x, attended, params, f"{base}.norm2", config, train_mode, rng)
        x = _add_norm(x, _feed_forward(params, f"{base}.ffn", x, config, train_mode, rng),
                      params, f"{base}.norm3", config, train_mode, rng)
    return matmul(x, transpose(params["output.projection"], (1, 0)))
