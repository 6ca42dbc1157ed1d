"""
TrainingSession - one optimization run with its own parameters, optimizer
state, work directory and event callbacks.

Each session owns:
- Parameters (fresh, or copied from a parent checkpoint)
- Adam state and the global step counter
- A per-session work directory with last/best checkpoints and a TSV log
- Event callbacks ("step", "epoch_end", "checkpoint")
"""

import time
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..bleu import BleuReport, CaseMode, corpus_bleu
from ..corpus import ParallelCorpus
from ..decoding import DecodeConfig, SearchStrategy, TransformerScorer, Translator, translate_corpus
from ..errors import ConfigError, TransferError, UsageError
from ..logging_config import TrainingLogger, get_logger, run_context
from ..model import (
    ModelConfig,
    ModelKind,
    Parameters,
    clone_params,
    decoder_forward,
    encoder_forward,
    frozen_tensor_ids,
    init_params,
    parameter_shapes,
    zero_grads,
)
from ..tensor import Graph, backward, cross_entropy_ls
from ..tokenizer import PAD_ID, SubwordVocabulary
from .batching import Batch, Example, encode_pairs, make_batches
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import TrainConfig
from .optim import AdamState, adam_step
from .schedule import lr_at_step

logger = get_logger(__name__)

LOG_FILE = "train.log"
LAST_CHECKPOINT = "last.ckpt"
BEST_CHECKPOINT = "best.ckpt"

ValidationSet = Tuple[Sequence[str], Sequence[str]]


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    mean_loss: float
    bleu: Optional[float]
    seconds: float
    steps: int

    def tsv(self) -> str:
        bleu = "-" if self.bleu is None else f"{self.bleu:.2f}"
        return f"{self.epoch}\t{self.mean_loss:.6f}\t{bleu}\t{self.seconds:.2f}"


class TrainingSession:
    """
    Single-writer training loop over one model.

    Usage:
        session = TrainingSession(config, TrainConfig(epochs=3), vocab, workdir="runs/base")
        session.on("epoch_end", lambda record: print(record.bleu))
        session.fit(encode_pairs(train, vocab, config.max_len), valid=(sources, references))
    """

    EVENTS = ("step", "epoch_end", "checkpoint")

    def __init__(
        self,
        config: ModelConfig,
        tcfg: TrainConfig,
        vocab: SubwordVocabulary,
        params: Optional[Parameters] = None,
        workdir: Optional[Union[str, Path]] = None,
        stage: Optional[str] = None,
    ):
        """
        Initialize a training session.

        Args:
            config: Model configuration.
            tcfg: Optimization settings.
            vocab: Vocabulary bound to the model.
            params: Starting parameters (default: fresh init seeded by ``tcfg.seed``).
            workdir: Directory for checkpoints and the TSV log (default: none written).
            stage: Recipe stage name used in logs.

        Raises:
            ConfigError: If the vocabulary size disagrees with the config or
                the batch budget cannot hold one maximal sequence.
        """
        if config.vocab_size != vocab.size:
            raise ConfigError(
                f"model.vocab_size {config.vocab_size} does not match the vocabulary ({vocab.size} tokens)"
            )
        tcfg.check_max_len(config.max_len)
        self.session_id = uuid.uuid4().hex[:8]
        self.config = config
        self.tcfg = tcfg
        self.vocab = vocab
        self.fingerprint = vocab.fingerprint()
        self.params = params if params is not None else init_params(config, tcfg.seed)
        self.optimizer = AdamState()
        self.stage = stage
        self.train_examples: List[Example] = []

        frozen = frozen_tensor_ids(self.params, tcfg.freeze)
        self.trainable_names = [n for n in parameter_shapes(config) if id(self.params[n]) not in frozen]
        self.frozen_names = [n for n in parameter_shapes(config) if id(self.params[n]) in frozen]
        if tcfg.freeze and not self.frozen_names:
            logger.warning("Freeze globs matched no parameter", globs=list(tcfg.freeze))

        self.workdir = Path(workdir) if workdir is not None else None
        if self.workdir is not None:
            self.workdir.mkdir(parents=True, exist_ok=True)

        self.logger = TrainingLogger(self.session_id, stage)
        self._callbacks: Dict[str, List[Callable]] = {event: [] for event in self.EVENTS}
        self.history: List[EpochRecord] = []
        self.best_bleu: Optional[float] = None
        self.last_report: Optional[BleuReport] = None

    @classmethod
    def from_checkpoint(
        cls,
        checkpoint: Checkpoint,
        tcfg: TrainConfig,
        vocab: SubwordVocabulary,
        workdir: Optional[Union[str, Path]] = None,
        stage: Optional[str] = None,
        keep_optimizer: bool = False,
        force: bool = False,
    ) -> "TrainingSession":
        """
        Continue from a checkpoint's parameters (copied, so the checkpoint stays intact).

        Raises:
            FingerprintError: If the checkpoint was trained with another vocabulary.
        """
        checkpoint.check_fingerprint(vocab.fingerprint(), force=force)
        params = clone_params(checkpoint.params, checkpoint.config)
        session = cls(checkpoint.config, tcfg, vocab, params=params, workdir=workdir, stage=stage)
        if keep_optimizer and checkpoint.optimizer is not None:
            session.optimizer = AdamState(
                step=checkpoint.optimizer.step,
                m={k: v.copy() for k, v in checkpoint.optimizer.m.items()},
                v={k: v.copy() for k, v in checkpoint.optimizer.v.items()},
            )
        return session

    # Event System

    def on(self, event: str, callback: Callable) -> None:
        """
        Register an event callback.

        Supported events:
        - 'step': callback(step, lr, loss) after every optimizer step
        - 'epoch_end': callback(EpochRecord) after validation
        - 'checkpoint': callback(path, reason) after a checkpoint write
        """
        if event not in self._callbacks:
            raise UsageError(f"unknown event {event!r}; supported: {list(self._callbacks)}")
        self._callbacks[event].append(callback)

    def _emit(self, event: str, *args) -> None:
        for callback in self._callbacks[event]:
            try:
                callback(*args)
            except Exception as e:
                self.logger.log_error(f"{event} callback failed: {e}")

    # Optimization

    @property
    def global_step(self) -> int:
        return self.optimizer.step

    def lr_for_step(self, step: int) -> float:
        return self.tcfg.lr_scale * lr_at_step(step, self.config.d_model, self.tcfg.warmup_steps)

    def batch_loss(self, batch: Batch, train_mode: bool = True, rng: Optional[np.random.Generator] = None):
        """Teacher-forced label-smoothed loss of one batch (records on the active graph)."""
        memory = memory_pad = None
        if self.config.kind == ModelKind.TRANSLATION:
            memory = encoder_forward(self.params, self.config, batch.source, train_mode, rng)
            memory_pad = batch.source == PAD_ID
        logits = decoder_forward(
            self.params, self.config, batch.decoder_input, memory, train_mode, rng, memory_pad
        )
        return cross_entropy_ls(logits, batch.decoder_target, self.tcfg.label_smoothing, PAD_ID)

    def train_step(self, batch: Batch, rng: np.random.Generator) -> float:
        """Forward, backward and one Adam update on ``batch``; returns the loss."""
        zero_grads(self.params)
        with Graph() as graph:
            loss = self.batch_loss(batch, train_mode=True, rng=rng)
        backward(loss, graph)

        lr = self.lr_for_step(self.optimizer.step + 1)
        trainable = {name: self.params[name] for name in self.trainable_names}
        grads = {name: tensor.grad for name, tensor in trainable.items()}
        adam_step(trainable, grads, self.optimizer, lr, self.tcfg.betas, self.tcfg.eps)
        value = loss.item()
        self._emit("step", self.optimizer.step, lr, value)
        return value

    def train_epoch(self, examples: Sequence[Example], epoch_index: int) -> Tuple[float, int]:
        """
        One pass over ``examples``.

        Returns:
            (target-token weighted mean loss, optimizer steps taken)

        Raises:
            ConfigError: If there is nothing to train on.
        """
        if not examples:
            raise ConfigError("cannot train an epoch on an empty corpus")
        batches = make_batches(examples, self.tcfg.batch_tokens, self.tcfg.seed, epoch_index)
        rng = np.random.default_rng([self.tcfg.seed, epoch_index, 1])
        total = 0.0
        tokens = 0
        for batch in batches:
            loss = self.train_step(batch, rng)
            total += loss * batch.target_tokens
            tokens += batch.target_tokens
        return total / max(tokens, 1), len(batches)

    # Validation

    def translator(self, decode_config: Optional[DecodeConfig] = None) -> Translator:
        if self.config.kind != ModelKind.TRANSLATION:
            raise UsageError("a language model cannot translate")
        scorer = TransformerScorer(self.params, self.config, self.fingerprint)
        return Translator(self.vocab, scorer, decode_config or DecodeConfig(strategy=SearchStrategy.GREEDY))

    def validate_bleu(
        self,
        sources: Sequence[str],
        references: Sequence[str],
        decode_config: Optional[DecodeConfig] = None,
        case_mode: CaseMode = CaseMode.INSENSITIVE,
    ) -> float:
        """Decode ``sources`` with the current parameters and score them; greedy by default."""
        translator = self.translator(decode_config)
        hyps = translate_corpus(translator, sources).translations
        self.last_report = corpus_bleu(hyps, references, case_mode)
        return self.last_report.score

    # Checkpoints

    def checkpoint(self, include_optimizer: bool = True) -> Checkpoint:
        """Snapshot of the current parameters (and optimizer state)."""
        optimizer = None
        if include_optimizer:
            optimizer = AdamState(
                step=self.optimizer.step,
                m={k: v.copy() for k, v in self.optimizer.m.items()},
                v={k: v.copy() for k, v in self.optimizer.v.items()},
            )
        metadata = {"epoch": str(len(self.history))}
        if self.stage:
            metadata["stage"] = self.stage
        return Checkpoint(
            params=clone_params(self.params, self.config),
            config=self.config,
            fingerprint=self.fingerprint,
            optimizer=optimizer,
            metadata=metadata,
        )

    def save(self, path: Union[str, Path], reason: str = "last") -> Path:
        path = save_checkpoint(self.checkpoint(), path)
        self.logger.log_checkpoint(str(path), reason)
        self._emit("checkpoint", path, reason)
        return path

    @property
    def best_path(self) -> Optional[Path]:
        """best.ckpt when validation ran, else last.ckpt."""
        if self.workdir is None:
            return None
        best = self.workdir / BEST_CHECKPOINT
        return best if best.exists() else self.workdir / LAST_CHECKPOINT

    def _append_log(self, record: EpochRecord) -> None:
        if self.workdir is None:
            return
        with open(self.workdir / LOG_FILE, "a", encoding="utf-8", newline="\n") as f:
            f.write(record.tsv() + "\n")

    def fit(
        self,
        train_examples: Optional[Sequence[Example]] = None,
        epochs: Optional[int] = None,
        valid: Optional[ValidationSet] = None,
        decode_config: Optional[DecodeConfig] = None,
    ) -> List[EpochRecord]:
        """
        Train for ``epochs`` (default ``tcfg.epochs``), validating after each.

        Writes last.ckpt every epoch and best.ckpt whenever validation BLEU
        improves, when a work directory is set.
        """
        examples = train_examples if train_examples is not None else self.train_examples
        epochs = self.tcfg.epochs if epochs is None else epochs
        self.logger.log_session_start(
            task=self.config.kind.value,
            config={"model": self.config.to_dict(), "train": self.tcfg.to_dict(), "examples": len(examples)},
        )
        for _ in range(epochs):
            epoch_index = len(self.history) + 1
            started = time.perf_counter()
            with run_context(epoch=epoch_index):
                mean_loss, steps = self.train_epoch(examples, epoch_index)
                bleu = None
                if valid is not None:
                    bleu = self.validate_bleu(valid[0], valid[1], decode_config)
            record = EpochRecord(epoch_index, mean_loss, bleu, time.perf_counter() - started, steps)
            self.history.append(record)
            self._append_log(record)
            self.logger.log_epoch(epoch_index, mean_loss, steps, bleu, record.seconds)

            if self.workdir is not None:
                self.save(self.workdir / LAST_CHECKPOINT, "last")
                if bleu is not None and (self.best_bleu is None or bleu > self.best_bleu):
                    self.best_bleu = bleu
                    self.save(self.workdir / BEST_CHECKPOINT, "best")
            elif bleu is not None and (self.best_bleu is None or bleu > self.best_bleu):
                self.best_bleu = bleu
            self._emit("epoch_end", record)

        self.logger.log_session_end(len(self.history), self.global_step, self.best_bleu)
        return self.history


def transfer_init(
    parent: Union[Checkpoint, str, Path],
    child_train: ParallelCorpus,
    vocab: SubwordVocabulary,
    tcfg: TrainConfig,
    workdir: Optional[Union[str, Path]] = None,
    stage: str = "child",
) -> TrainingSession:
    """
    Start a child session from a parent checkpoint.

    Parameters are copied bitwise; optimizer state starts fresh. Nothing is
    frozen unless ``tcfg.freeze`` says so. The encoded child corpus is
    stored on ``session.train_examples`` for :meth:`TrainingSession.fit`.

    Raises:
        TransferError: If the parent was trained with another vocabulary
            or is not a translation model.
        ConfigError: If the child corpus is empty.
    """
    checkpoint = parent if isinstance(parent, Checkpoint) else load_checkpoint(parent)
    expected = vocab.fingerprint()
    if checkpoint.fingerprint != expected:
        raise TransferError(
            f"parent vocabulary {checkpoint.fingerprint:016x} differs from child vocabulary "
            f"{expected:016x}; rebuild one shared vocabulary over the parent and child "
            f"training data (bpe-learn with all corpora) and retrain the parent"
        )
    if checkpoint.config.kind != ModelKind.TRANSLATION:
        raise TransferError("parent checkpoint is not a translation model")
    if len(child_train) == 0:
        raise ConfigError("child training corpus is empty")

    session = TrainingSession.from_checkpoint(checkpoint, tcfg, vocab, workdir=workdir, stage=stage)
    session.train_examples = encode_pairs(child_train, vocab, checkpoint.config.max_len)
    logger.info(
        "Initialized child from parent",
        parent_epoch=checkpoint.metadata.get("epoch"),
        child_pairs=len(session.train_examples),
        frozen=len(session.frozen_names),
    )
    return session
