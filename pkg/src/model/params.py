"""
Parameter table of the Transformer: names, shapes, aliasing and initialization.

Shared embeddings and the tied softmax are expressed as aliases: several
parameter paths resolve to one :class:`Tensor` object, so gradients and
optimizer updates land on a single buffer.
"""

import fnmatch
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..tensor import Tensor
from .config import ModelConfig, ModelKind

Parameters = Dict[str, Tensor]
Shape = Tuple[int, ...]


def _attention_shapes(prefix: str, d: int) -> Dict[str, Shape]:
    shapes: Dict[str, Shape] = {}
    for proj in ("q", "k", "v", "o"):
        shapes[f"{prefix}.{proj}.weight"] = (d, d)
        shapes[f"{prefix}.{proj}.bias"] = (d,)
    return shapes


def _norm_shapes(prefix: str, d: int) -> Dict[str, Shape]:
    return {f"{prefix}.gain": (d,), f"{prefix}.bias": (d,)}


def _ffn_shapes(prefix: str, d: int, f: int) -> Dict[str, Shape]:
    return {
        f"{prefix}.w1.weight": (d, f),
        f"{prefix}.w1.bias": (f,),
        f"{prefix}.w2.weight": (f, d),
        f"{prefix}.w2.bias": (d,),
    }


def parameter_shapes(config: ModelConfig) -> Dict[str, Shape]:
    """Canonical (non-aliased) parameter paths and shapes, in init order."""
    d, f, V = config.d_model, config.ffn_dim, config.vocab_size
    translation = config.kind == ModelKind.TRANSLATION
    shapes: Dict[str, Shape] = {}

    if translation:
        shapes["encoder.embedding"] = (V, d)
        if not config.share_embeddings:
            shapes["decoder.embedding"] = (V, d)
        for layer in range(config.n_layers):
            base = f"encoder.layers.{layer}"
            shapes.update(_attention_shapes(f"{base}.self_attn", d))
            shapes.update(_norm_shapes(f"{base}.norm1", d))
            shapes.update(_ffn_shapes(f"{base}.ffn", d, f))
            shapes.update(_norm_shapes(f"{base}.norm2", d))
    else:
        shapes["decoder.embedding"] = (V, d)

    for layer in range(config.n_layers):
        base = f"decoder.layers.{layer}"
        shapes.update(_attention_shapes(f"{base}.self_attn", d))
        shapes.update(_norm_shapes(f"{base}.norm1", d))
        if translation:
            shapes.update(_attention_shapes(f"{base}.cross_attn", d))
            shapes.update(_norm_shapes(f"{base}.norm2", d))
        shapes.update(_ffn_shapes(f"{base}.ffn", d, f))
        shapes.update(_norm_shapes(f"{base}.norm3", d))

    if not config.tie_softmax:
        shapes["output.projection"] = (V, d)
    return shapes


def parameter_aliases(config: ModelConfig) -> Dict[str, str]:
    """Alias path -> canonical path."""
    aliases: Dict[str, str] = {}
    decoder_embedding = "decoder.embedding"
    if config.kind == ModelKind.TRANSLATION and config.share_embeddings:
        aliases["decoder.embedding"] = "encoder.embedding"
        decoder_embedding = "encoder.embedding"
    if config.tie_softmax:
        aliases["output.projection"] = decoder_embedding
    return aliases


def bind_aliases(canonical: Parameters, config: ModelConfig) -> Parameters:
    """Add alias entries pointing at the canonical tensors."""
    params = dict(canonical)
    for alias, target in parameter_aliases(config).items():
        params[alias] = canonical[target]
    return params


def init_params(config: ModelConfig, seed: int) -> Parameters:
    """
    Deterministically initialize every parameter.

    Matrices are uniform in [-1, 1] scaled by 1/sqrt(d_model); biases start
    at zero and layer-norm gains at one.
    """
    rng = np.random.default_rng(seed)
    limit = 1.0 / np.sqrt(config.d_model)
    canonical: Parameters = {}
    for name, shape in parameter_shapes(config).items():
        if name.endswith(".gain"):
            values = np.ones(shape, dtype=np.float32)
        elif name.endswith(".bias"):
            values = np.zeros(shape, dtype=np.float32)
        else:
            values = (rng.uniform(-1.0, 1.0, size=shape) * limit).astype(np.float32)
        canonical[name] = Tensor(values, requires_grad=True, name=name)
    return bind_aliases(canonical, config)


def count_params(config: ModelConfig) -> int:
    """Number of distinct scalar parameters implied by ``config``."""
    return int(sum(int(np.prod(shape)) for shape in parameter_shapes(config).values()))


def unique_parameters(params: Parameters) -> List[Tuple[str, Tensor]]:
    """(first name, tensor) per distinct tensor, in insertion order."""
    seen = set()
    out: List[Tuple[str, Tensor]] = []
    for name, tensor in params.items():
        if id(tensor) in seen:
            continue
        seen.add(id(tensor))
        out.append((name, tensor))
    return out


def frozen_tensor_ids(params: Parameters, globs: Sequence[str]) -> set:
    """Ids of tensors any of whose paths match one of ``globs``."""
    if not globs:
        return set()
    frozen = set()
    for name, tensor in params.items():
        if any(fnmatch.fnmatchcase(name, pattern) for pattern in globs):
            frozen.add(id(tensor))
    return frozen


def clone_params(params: Parameters, config: ModelConfig) -> Parameters:
    """Deep copy preserving the alias structure."""
    canonical = {name: params[name].copy(requires_grad=True) for name in parameter_shapes(config)}
    return bind_aliases(canonical, config)


def zero_grads(params: Parameters) -> None:
    for _, tensor in unique_parameters(params):
        tensor.zero_grad()


def cast_params(params: Parameters, config: ModelConfig, dtype: np.dtype) -> Parameters:
    """Copy with every tensor cast to ``dtype``; used by gradient checks."""
    canonical = {
        name: params[name].astype(dtype, requires_grad=True) for name in parameter_shapes(config)
    }
    return bind_aliases(canonical, config)
