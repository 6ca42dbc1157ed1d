"""
lowres-nmt

Desk-scale neural machine translation for low-resource language pairs:
a numpy autograd Transformer, BPE, transfer learning, back-translation
and language-model fusion, driven from one CLI.
"""

# Load environment variables from .env file
from dotenv import load_dotenv
load_dotenv()

__version__ = "0.2.0"

from .bleu import BleuReport, CaseMode, corpus_bleu
from .config import ExperimentConfig
from .corpus import Origin, ParallelCorpus, SentencePair, SplitSpec, load_parallel
from .decoding import DecodeConfig, FusionConfig, FusionMode, Translator, beam_search, greedy_decode
from .errors import ConfigError, DataError, NMTError
from .logging_config import TrainingLogger, get_logger, setup_logging
from .model import ModelConfig, ModelKind
from .recipes import RecipeType, create_recipe
from .tokenizer import SubwordVocabulary, learn_merges
from .trainer import Checkpoint, TrainConfig, TrainingSession, load_checkpoint, save_checkpoint, transfer_init

__all__ = [
    # Version
    "__version__",
    # Data
    "Origin",
    "ParallelCorpus",
    "SentencePair",
    "SplitSpec",
    "SubwordVocabulary",
    "learn_merges",
    "load_parallel",
    # Model and training
    "Checkpoint",
    "ModelConfig",
    "ModelKind",
    "TrainConfig",
    "TrainingSession",
    "load_checkpoint",
    "save_checkpoint",
    "transfer_init",
    # Decoding and evaluation
    "BleuReport",
    "CaseMode",
    "DecodeConfig",
    "FusionConfig",
    "FusionMode",
    "Translator",
    "beam_search",
    "corpus_bleu",
    "greedy_decode",
    # Experiments
    "ExperimentConfig",
    "RecipeType",
    "create_recipe",
    # Errors
    "ConfigError",
    "DataError",
    "NMTError",
    # Logging
    "TrainingLogger",
    "get_logger",
    "setup_logging",
]
