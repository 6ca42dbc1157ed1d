"""
Transformer encoder-decoder and decoder-only language model.
"""

from .config import DEFAULT_PROFILE, PROFILES, ModelConfig, ModelKind
from .params import (
    Parameters,
    bind_aliases,
    cast_params,
    clone_params,
    count_params,
    frozen_tensor_ids,
    init_params,
    parameter_aliases,
    parameter_shapes,
    unique_parameters,
    zero_grads,
)
from .transformer import (
    MASK_VALUE,
    decoder_forward,
    encoder_forward,
    pad_batch,
    positional_encoding,
)

__all__ = [
    "DEFAULT_PROFILE",
    "MASK_VALUE",
    "PROFILES",
    "ModelConfig",
    "ModelKind",
    "Parameters",
    "bind_aliases",
    "cast_params",
    "clone_params",
    "count_params",
    "decoder_forward",
    "encoder_forward",
    "frozen_tensor_ids",
    "init_params",
    "pad_batch",
    "parameter_aliases",
    "parameter_shapes",
    "positional_encoding",
    "unique_parameters",
    "zero_grads",
]
