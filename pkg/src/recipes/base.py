"""
Abstract base class for experiment recipes.

A recipe runs the stages of one workflow (baseline, transfer learning,
back-translation) from an :class:`ExperimentConfig` and leaves a
self-describing output directory behind: the resolved config, one work
directory per training stage (checkpoints plus ``train.log``) and a test
BLEU ``report.txt`` in both case modes.
"""

from abc import ABC, abstractmethod
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from ..bleu import BleuReport, CaseMode, corpus_bleu
from ..config import ExperimentConfig
from ..corpus import ParallelCorpus, filter_pairs, load_parallel, reverse, write_lines
from ..decoding import LanguageModelScorer, TransformerScorer, Translator, translate_corpus
from ..errors import ConfigError, NMTError, StageError
from ..logging_config import get_logger, run_context
from ..tokenizer import SubwordVocabulary, learn_merges
from ..trainer import Checkpoint, EpochRecord, TrainingSession, encode_pairs, load_checkpoint

logger = get_logger(__name__)

RESOLVED_CONFIG = "config.resolved"
REPORT_FILE = "report.txt"
VOCAB_DIR = "vocab"


class RecipeType(str, Enum):
    """Available experiment workflows."""
    BASELINE = "baseline"
    TRANSFER = "transfer"
    BACKTRANSLATION = "backtranslation"


@dataclass
class RecipeResult:
    """What a finished recipe produced."""
    recipe: RecipeType
    outdir: Path
    checkpoints: Dict[str, Path] = field(default_factory=dict)
    histories: Dict[str, List[EpochRecord]] = field(default_factory=dict)
    reports: Dict[CaseMode, BleuReport] = field(default_factory=dict)
    artifacts: Dict[str, Path] = field(default_factory=dict)

    @property
    def bleu(self) -> Optional[float]:
        report = self.reports.get(CaseMode.INSENSITIVE)
        return report.score if report is not None else None


class Recipe(ABC):
    """
    Base class of all recipes.

    Subclasses declare ``recipe_type`` and ``required_paths`` and
    implement :meth:`execute`; every step they run inside
    :meth:`stage` so a failure surfaces as a :class:`StageError`
    naming the stage.
    """

    recipe_type: RecipeType
    required_paths: List[str] = ["data.train_src", "data.train_tgt", "data.test_src", "data.test_tgt"]

    def __init__(self, config: ExperimentConfig, outdir: Optional[Union[str, Path]] = None):
        """
        Args:
            config: Experiment settings.
            outdir: Output directory (default: ``run.outdir``).
        """
        self.config = config
        self.outdir = Path(outdir) if outdir is not None else Path(config.run.outdir)
        self.result = RecipeResult(recipe=self.recipe_type, outdir=self.outdir)
        self.vocab: Optional[SubwordVocabulary] = None

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """Run a block as a named stage, wrapping failures in :class:`StageError`."""
        with run_context(recipe=self.recipe_type.value, stage=name):
            logger.info("Stage started")
            try:
                yield
            except StageError:
                raise
            except (NMTError, OSError, ValueError) as e:
                logger.error("Stage failed", error=str(e))
                raise StageError(name, e) from e
            logger.info("Stage finished")

    def run(self) -> RecipeResult:
        """
        Validate the config, snapshot it and run every stage.

        Raises:
            StageError: Wrapping the first failure, with its stage name.
        """
        with self.stage("validate"):
            self.config.check_paths(self.required_paths)
            self.outdir.mkdir(parents=True, exist_ok=True)
            self.result.artifacts["config"] = self.config.write_resolved(self.outdir / RESOLVED_CONFIG)
        self.execute()
        logger.info("Recipe finished", recipe=self.recipe_type.value, outdir=str(self.outdir), bleu=self.result.bleu)
        return self.result

    @abstractmethod
    def execute(self) -> None:
        """Run the recipe's stages, filling ``self.result``."""
        pass

    # Data helpers

    def load_pair(
        self,
        src: Path,
        tgt: Path,
        src_lang: Optional[str] = None,
        tgt_lang: Optional[str] = None,
    ) -> ParallelCorpus:
        """Load a corpus in the configured direction, with the optional length filter."""
        data = self.config.data
        corpus = load_parallel(src, tgt, src_lang or data.src_lang, tgt_lang or data.tgt_lang)
        if data.reverse:
            corpus = reverse(corpus)
        if data.max_tokens is not None:
            corpus = filter_pairs(corpus, max_tokens=data.max_tokens)
        return corpus

    def train_corpus(self) -> ParallelCorpus:
        return self.load_pair(self.config.data.train_src, self.config.data.train_tgt)

    def test_corpus(self) -> ParallelCorpus:
        return self.load_pair(self.config.data.test_src, self.config.data.test_tgt)

    def valid_set(self) -> Optional[Tuple[List[str], List[str]]]:
        data = self.config.data
        if data.valid_src is None or data.valid_tgt is None:
            return None
        corpus = self.load_pair(data.valid_src, data.valid_tgt)
        return corpus.sources, corpus.targets

    def build_vocab(self, texts: Sequence[Sequence[str]]) -> SubwordVocabulary:
        """Load ``data.vocab`` or learn a shared vocabulary over ``texts``."""
        if self.config.data.vocab is not None:
            self.vocab = SubwordVocabulary.load(self.config.data.vocab)
        else:
            self.vocab = learn_merges(list(texts), self.config.data.vocab_size)
            self.vocab.save(self.outdir / VOCAB_DIR)
            self.result.artifacts["vocab"] = self.outdir / VOCAB_DIR
        return self.vocab

    # Training helpers

    def new_session(
        self,
        name: str,
        init: Optional[Union[Checkpoint, Path]] = None,
        freeze: Sequence[str] = (),
    ) -> TrainingSession:
        """Fresh session for stage ``name``, or one initialized from ``init`` with a new optimizer."""
        tcfg = self.config.train
        if freeze:
            tcfg = replace(tcfg, freeze=tuple(freeze))
        workdir = self.outdir / name
        if init is None:
            config = self.config.model_config(self.vocab.size)
            return TrainingSession(config, tcfg, self.vocab, workdir=workdir, stage=name)
        checkpoint = init if isinstance(init, Checkpoint) else load_checkpoint(init)
        return TrainingSession.from_checkpoint(checkpoint, tcfg, self.vocab, workdir=workdir, stage=name)

    def fit_session(
        self,
        name: str,
        session: TrainingSession,
        corpus: Optional[ParallelCorpus],
        epochs: Optional[int] = None,
        valid: Optional[Tuple[List[str], List[str]]] = None,
    ) -> Path:
        """Train ``session`` and record its history; returns the checkpoint to continue from."""
        examples = None
        if corpus is not None:
            examples = encode_pairs(corpus, self.vocab, session.config.max_len)
        history = session.fit(
            examples,
            epochs=epochs,
            valid=valid,
            decode_config=self.config.decode_config(validation=True),
        )
        self.result.histories[name] = list(history)
        checkpoint = session.best_path
        self.result.checkpoints[name] = checkpoint
        return checkpoint

    # Evaluation

    def translator(self, checkpoint_path: Path) -> Translator:
        """
        Test-time translator for a checkpoint, with the fusion LM when one is configured.

        Raises:
            ConfigError: If fusion is enabled without ``fusion.lm_checkpoint``.
        """
        decode_config = self.config.decode_config()
        lm = None
        if decode_config.fusion.uses_lm:
            if self.config.fusion.lm_checkpoint is None:
                raise ConfigError(f"fusion.mode={decode_config.fusion.mode.value} needs fusion.lm_checkpoint")
            lm = LanguageModelScorer.from_checkpoint(load_checkpoint(self.config.fusion.lm_checkpoint))
        scorer = TransformerScorer.from_checkpoint(load_checkpoint(checkpoint_path))
        return Translator(self.vocab, scorer, decode_config, lm)

    def evaluate(self, checkpoint_path: Path, test: ParallelCorpus, name: str = "test") -> Dict[CaseMode, BleuReport]:
        """Translate the test sources and write both-case BLEU to ``report.txt``."""
        translator = self.translator(checkpoint_path)
        hyps = translate_corpus(translator, test.sources).translations
        hyp_path = self.outdir / f"{name}.hyp"
        write_lines(hyp_path, hyps)
        reports = {mode: corpus_bleu(hyps, test.targets, mode) for mode in CaseMode}
        lines = [f"checkpoint = {checkpoint_path}"]
        lines.extend(reports[mode].format() for mode in (CaseMode.INSENSITIVE, CaseMode.SENSITIVE))
        report_path = self.outdir / REPORT_FILE
        report_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
        self.result.reports = reports
        self.result.artifacts["report"] = report_path
        self.result.artifacts["hypotheses"] = hyp_path
        return reports
