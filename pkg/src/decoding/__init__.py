"""
Decoding: scorers, LM fusion and search strategies.
"""

from .base import Scorer
from .fusion import (
    DEFAULT_FUSION_WEIGHT,
    FUSION_STRATEGIES,
    LOG_FLOOR,
    FusionConfig,
    FusionMode,
    PostNormNormalization,
    fuse_step_scores,
    get_fusion_strategy,
)
from .neural import LanguageModelScorer, TransformerScorer
from .search import (
    BeamHypothesis,
    CorpusTranslation,
    DecodeConfig,
    SearchStrategy,
    Translator,
    beam_search,
    greedy_decode,
    length_penalty,
    sweep_fusion_weights,
    translate_corpus,
)
from .table import TableScorer

__all__ = [
    "DEFAULT_FUSION_WEIGHT",
    "FUSION_STRATEGIES",
    "LOG_FLOOR",
    "BeamHypothesis",
    "CorpusTranslation",
    "DecodeConfig",
    "FusionConfig",
    "FusionMode",
    "LanguageModelScorer",
    "PostNormNormalization",
    "Scorer",
    "SearchStrategy",
    "TableScorer",
    "TransformerScorer",
    "Translator",
    "beam_search",
    "fuse_step_scores",
    "get_fusion_strategy",
    "greedy_decode",
    "length_penalty",
    "sweep_fusion_weights",
    "translate_corpus",
]
