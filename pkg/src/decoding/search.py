"""
Greedy and beam-search decoding over a :class:`Scorer`, with optional
language-model fusion, plus corpus-level translation helpers.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..bleu import BleuReport, CaseMode, corpus_bleu
from ..errors import ConfigError, FingerprintError, FusionError, LengthError, UsageError
from ..logging_config import get_logger
from ..tensor import Tensor
from ..tokenizer import BOS_ID, EOS_ID, SubwordVocabulary
from .base import Scorer
from .fusion import LOG_FLOOR, FusionConfig, FusionMode, fuse_step_scores

logger = get_logger(__name__)


class SearchStrategy(str, Enum):
    GREEDY = "greedy"
    BEAM = "beam"


@dataclass(frozen=True)
class DecodeConfig:
    """
    Decoding settings.

    Attributes:
        strategy: "greedy" or "beam".
        beam_size: Hypotheses kept per step.
        length_penalty: Exponent alpha of ((5 + len) / 6) ** alpha.
        max_len: Maximum number of generated tokens, eos included.
        fusion: Language-model fusion settings.
        workers: Sentences decoded in parallel by corpus translation.
    """

    strategy: SearchStrategy = SearchStrategy.BEAM
    beam_size: int = 4
    length_penalty: float = 0.6
    max_len: int = 100
    fusion: FusionConfig = field(default_factory=FusionConfig)
    workers: int = 1

    def __post_init__(self):
        try:
            object.__setattr__(self, "strategy", SearchStrategy(self.strategy))
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if self.beam_size < 1:
            raise ConfigError(f"decode.beam_size must be at least 1, got {self.beam_size}")
        if self.max_len < 1:
            raise ConfigError(f"decode.max_len must be at least 1, got {self.max_len}")
        if self.length_penalty < 0:
            raise ConfigError(f"decode.length_penalty must be non-negative, got {self.length_penalty}")
        if self.workers < 1:
            raise ConfigError(f"decode.workers must be at least 1, got {self.workers}")


def length_penalty(length: int, alpha: float) -> float:
    return ((5.0 + length) / 6.0) ** alpha


@dataclass
class BeamHypothesis:
    """A target prefix starting with bos and its accumulated log-probability."""
    ids: List[int]
    log_score: float = 0.0
    finished: bool = False

    @property
    def length(self) -> int:
        """Generated tokens, eos included."""
        return len(self.ids) - 1

    @property
    def tokens(self) -> List[int]:
        """Generated ids without bos and eos."""
        body = self.ids[1:]
        return body[:-1] if self.finished else body

    def score(self, alpha: float) -> float:
        return self.log_score / length_penalty(max(self.length, 0), alpha)


def _check_fusion(scorer: Scorer, fusion: FusionConfig, lm: Optional[Scorer]) -> Optional[Scorer]:
    if not fusion.uses_lm:
        return None
    if lm is None:
        raise UsageError(f"fusion mode {fusion.mode.value} needs a language model")
    if lm.fingerprint != scorer.fingerprint:
        raise FusionError(
            f"language model vocabulary {lm.fingerprint:016x} does not match "
            f"translation model vocabulary {scorer.fingerprint:016x}"
        )
    if lm.vocab_size != scorer.vocab_size:
        raise FusionError(f"vocabulary sizes differ: {scorer.vocab_size} vs {lm.vocab_size}")
    return lm


def _step_limit(max_len: int, *scorers: Optional[Scorer]) -> int:
    limit = max_len
    for scorer in scorers:
        if scorer is not None and scorer.max_prefix is not None:
            limit = min(limit, scorer.max_prefix)
    return limit


class _StepScores:
    """Runs the scorer(s) for one sentence and fuses their outputs."""

    def __init__(self, scorer: Scorer, src_ids: Sequence[int], fusion: FusionConfig, lm: Optional[Scorer]):
        self.scorer = scorer
        self.fusion = fusion
        self.lm = _check_fusion(scorer, fusion, lm)
        self.state = scorer.start(src_ids)
        self.lm_state = self.lm.start(src_ids) if self.lm is not None else None

    def __call__(self, prefixes: Sequence[Sequence[int]]) -> np.ndarray:
        tm = Tensor(self.scorer.step_logits(self.state, prefixes), dtype=np.float64)
        lm = None
        if self.lm is not None:
            lm = Tensor(self.lm.step_logits(self.lm_state, prefixes), dtype=np.float64)
        return fuse_step_scores(tm, lm, self.fusion).values


def greedy_decode(
    scorer: Scorer,
    src_ids: Sequence[int],
    max_len: int,
    fusion: Optional[FusionConfig] = None,
    lm: Optional[Scorer] = None,
) -> BeamHypothesis:
    """Pick the most probable token at every step until eos or ``max_len``."""
    fusion = fusion or FusionConfig()
    step_scores = _StepScores(scorer, src_ids, fusion, lm)
    hyp = BeamHypothesis([BOS_ID])
    for _ in range(_step_limit(max_len, scorer, step_scores.lm)):
        logp = step_scores([hyp.ids])[0]
        token = int(np.argmax(logp))
        hyp = BeamHypothesis(hyp.ids + [token], hyp.log_score + float(logp[token]))
        if token == EOS_ID:
            hyp.finished = True
            break
    return hyp


def beam_search(
    scorer: Scorer,
    src_ids: Sequence[int],
    beam_size: int,
    max_len: int,
    alpha: float = 0.6,
    fusion: Optional[FusionConfig] = None,
    lm: Optional[Scorer] = None,
) -> BeamHypothesis:
    """
    Beam search with optional LM fusion.

    Every step expands all live hypotheses and keeps the ``beam_size`` best
    candidates overall; candidates ending in eos leave the beam as finished
    hypotheses. Zero-probability tokens are never expanded. The result is
    the finished hypothesis with the best length-normalized score, or the
    best unfinished one when nothing finished within ``max_len`` tokens.

    Raises:
        ConfigError: If ``beam_size`` is below 1.
        FusionError: If the LM was built on a different vocabulary.
    """
    if beam_size < 1:
        raise ConfigError(f"beam_size must be at least 1, got {beam_size}")
    fusion = fusion or FusionConfig()
    step_scores = _StepScores(scorer, src_ids, fusion, lm)

    alive = [BeamHypothesis([BOS_ID])]
    finished: List[BeamHypothesis] = []
    for _ in range(_step_limit(max_len, scorer, step_scores.lm)):
        logp = step_scores([h.ids for h in alive])
        totals = np.array([h.log_score for h in alive])[:, None] + logp
        totals[logp <= LOG_FLOOR] = -np.inf
        flat = totals.reshape(-1)
        order = np.argsort(-flat, kind="stable")[:beam_size]

        next_alive: List[BeamHypothesis] = []
        for index in order:
            if not np.isfinite(flat[index]):
                break
            row, token = divmod(int(index), logp.shape[1])
            hyp = BeamHypothesis(alive[row].ids + [token], float(flat[index]))
            if token == EOS_ID:
                hyp.finished = True
                finished.append(hyp)
            else:
                next_alive.append(hyp)
        alive = next_alive
        if not alive:
            break

    pool = finished or alive
    if not pool:
        return BeamHypothesis([BOS_ID])
    best = pool[0]
    for hyp in pool[1:]:
        if hyp.score(alpha) > best.score(alpha):
            best = hyp
    return best


@dataclass
class CorpusTranslation:
    """Translations in input order; failed sentences map to "" and are listed in ``failures``."""
    translations: List[str]
    failures: Dict[int, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.translations)


class Translator:
    """
    Text-in, text-out decoding with a bound vocabulary.

    Usage:
        translator = Translator(vocab, TransformerScorer.from_checkpoint(ckpt))
        print(translator.translate("hello world"))
    """

    def __init__(
        self,
        vocab: SubwordVocabulary,
        scorer: Scorer,
        config: Optional[DecodeConfig] = None,
        lm: Optional[Scorer] = None,
        force: bool = False,
    ):
        """
        Args:
            vocab: Vocabulary the model was trained with.
            scorer: Translation scorer.
            config: Decoding settings.
            lm: Language model for fusion.
            force: Accept a scorer whose vocabulary fingerprint differs.

        Raises:
            FingerprintError: If scorer and vocabulary disagree.
            FusionError: If the LM and the scorer disagree.
        """
        self.vocab = vocab
        self.scorer = scorer
        self.config = config or DecodeConfig()
        self.lm = lm
        expected = vocab.fingerprint()
        if scorer.fingerprint != expected and not force:
            raise FingerprintError(
                f"model vocabulary {scorer.fingerprint:016x} does not match {expected:016x}"
            )
        if self.config.fusion.uses_lm:
            _check_fusion(scorer, self.config.fusion, lm)

    def with_config(self, config: DecodeConfig) -> "Translator":
        return Translator(self.vocab, self.scorer, config, self.lm, force=True)

    def decode_ids(self, src_ids: Sequence[int]) -> BeamHypothesis:
        cfg = self.config
        if cfg.strategy == SearchStrategy.GREEDY:
            return greedy_decode(self.scorer, src_ids, cfg.max_len, cfg.fusion, self.lm)
        return beam_search(
            self.scorer, src_ids, cfg.beam_size, cfg.max_len, cfg.length_penalty, cfg.fusion, self.lm
        )

    def translate(self, sentence: str) -> str:
        """
        Raises:
            LengthError: If the encoded sentence does not fit the model.
        """
        src_ids = self.vocab.encode(sentence) + [EOS_ID]
        if self.scorer.max_prefix is not None and len(src_ids) > self.scorer.max_prefix:
            raise LengthError(
                f"source has {len(src_ids)} tokens, model accepts {self.scorer.max_prefix}"
            )
        hyp = self.decode_ids(src_ids)
        return self.vocab.decode(hyp.tokens)


def translate_corpus(
    translator: Translator,
    sentences: Sequence[str],
    workers: Optional[int] = None,
) -> CorpusTranslation:
    """
    Translate sentences in order, up to ``workers`` at a time.

    A failing sentence yields an empty translation and is recorded in
    ``failures`` instead of aborting the corpus.
    """
    workers = workers or translator.config.workers
    result = CorpusTranslation(translations=[""] * len(sentences))
    if not sentences:
        return result

    def run(index: int) -> Tuple[int, Optional[str], Optional[str]]:
        try:
            return index, translator.translate(sentences[index]), None
        except Exception as e:
            return index, None, f"{type(e).__name__}: {e}"

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, range(len(sentences))))
    else:
        outcomes = [run(i) for i in range(len(sentences))]

    for index, text, error in outcomes:
        if error is not None:
            result.failures[index] = error
            logger.warning("Translation failed", line=index + 1, error=error)
        else:
            result.translations[index] = text
    logger.info(
        "Translated corpus",
        sentences=len(sentences),
        failures=len(result.failures),
        workers=workers,
    )
    return result


def sweep_fusion_weights(
    translator: Translator,
    sources: Sequence[str],
    references: Sequence[str],
    weights: Sequence[float],
    mode: FusionMode = FusionMode.SHALLOW,
    case_mode: CaseMode = CaseMode.INSENSITIVE,
) -> List[Tuple[float, BleuReport]]:
    """BLEU of the translator on (sources, references) for each fusion weight."""
    results: List[Tuple[float, BleuReport]] = []
    base = translator.config
    for weight in weights:
        fusion = FusionConfig(mode=mode, weight=weight, postnorm_norm=base.fusion.postnorm_norm)
        config = DecodeConfig(
            strategy=base.strategy,
            beam_size=base.beam_size,
            length_penalty=base.length_penalty,
            max_len=base.max_len,
            fusion=fusion,
            workers=base.workers,
        )
        hyps = translate_corpus(translator.with_config(config), sources).translations
        report = corpus_bleu(hyps, references, case_mode)
        logger.info("Fusion sweep point", weight=weight, mode=mode.value, bleu=round(report.score, 2))
        results.append((weight, report))
    return results
