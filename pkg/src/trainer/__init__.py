"""
Training: schedule, optimizer, batching, checkpoints and sessions.
"""

from .batching import Batch, Example, collate, encode_pairs, encode_sentences, make_batches
from .checkpoint import MAGIC, Checkpoint, load_checkpoint, save_checkpoint
from .config import TrainConfig
from .optim import AdamState, adam_step
from .schedule import lr_at_step
from .session import (
    BEST_CHECKPOINT,
    LAST_CHECKPOINT,
    LOG_FILE,
    EpochRecord,
    TrainingSession,
    transfer_init,
)

__all__ = [
    "BEST_CHECKPOINT",
    "LAST_CHECKPOINT",
    "LOG_FILE",
    "MAGIC",
    "AdamState",
    "Batch",
    "Checkpoint",
    "EpochRecord",
    "Example",
    "TrainConfig",
    "TrainingSession",
    "adam_step",
    "collate",
    "encode_pairs",
    "encode_sentences",
    "load_checkpoint",
    "lr_at_step",
    "make_batches",
    "save_checkpoint",
    "transfer_init",
]
