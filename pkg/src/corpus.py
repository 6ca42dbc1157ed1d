"""
Parallel corpus ingestion, deduplication, splitting and mixing of
authentic with synthetic (back-translated) pairs.

All randomness goes through seeded numpy generators, so every
transformation is reproducible.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import AlignmentError, ConfigError, CorpusIOError, DataError
from .logging_config import get_logger
from .tokenizer import normalize, read_lines

logger = get_logger(__name__)

PathLike = Union[str, Path]


class Origin(str, Enum):
    """Where a sentence pair came from; kept for audit only."""
    AUTHENTIC = "A"
    SYNTHETIC = "S"


@dataclass(frozen=True)
class SentencePair:
    source: str
    target: str
    origin: Origin = Origin.AUTHENTIC


@dataclass
class ParallelCorpus:
    """Positionally aligned sentence pairs for one language direction."""
    pairs: List[SentencePair]
    src_lang: str
    tgt_lang: str
    dropped: int = field(default=0, compare=False)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def sources(self) -> List[str]:
        return [p.source for p in self.pairs]

    @property
    def targets(self) -> List[str]:
        return [p.target for p in self.pairs]

    def count(self, origin: Origin) -> int:
        return sum(1 for p in self.pairs if p.origin == origin)

    def with_pairs(self, pairs: List[SentencePair]) -> "ParallelCorpus":
        return ParallelCorpus(pairs=pairs, src_lang=self.src_lang, tgt_lang=self.tgt_lang)


@dataclass(frozen=True)
class SplitSpec:
    valid_size: int
    test_size: int
    seed: int = 1

    def __post_init__(self):
        if self.valid_size < 0 or self.test_size < 0:
            raise ConfigError("split sizes must be non-negative")


def _clean(line: str) -> str:
    return normalize(line).strip()


def load_parallel(
    src_path: PathLike,
    tgt_path: PathLike,
    src_lang: str,
    tgt_lang: str,
    tag_path: Optional[PathLike] = None,
) -> ParallelCorpus:
    """
    Load two line-aligned UTF-8 files into a corpus.

    Lines are NFC-normalized and trimmed. Pairs with an empty side are
    dropped; the drop count is logged and stored on ``corpus.dropped``.

    Raises:
        AlignmentError: If the files (or the optional tag file) differ in
            line count.
        CorpusIOError: If a file cannot be read.
    """
    sources = read_lines(src_path)
    targets = read_lines(tgt_path)
    if len(sources) != len(targets):
        raise AlignmentError(
            f"{src_path} has {len(sources)} lines but {tgt_path} has {len(targets)}"
        )
    tags: Optional[List[str]] = None
    if tag_path is not None:
        tags = read_lines(tag_path)
        if len(tags) != len(sources):
            raise AlignmentError(
                f"{tag_path} has {len(tags)} tags for {len(sources)} sentence pairs"
            )

    pairs: List[SentencePair] = []
    dropped = 0
    for i, (src, tgt) in enumerate(zip(sources, targets)):
        src, tgt = _clean(src), _clean(tgt)
        if not src or not tgt:
            dropped += 1
            continue
        origin = Origin.AUTHENTIC
        if tags is not None:
            try:
                origin = Origin(tags[i].strip())
            except ValueError as e:
                raise DataError(f"{tag_path}:{i + 1}: unknown origin tag {tags[i]!r}") from e
        pairs.append(SentencePair(src, tgt, origin))

    if dropped:
        logger.warning("Dropped pairs with an empty side", path=str(src_path), dropped=dropped)
    logger.info("Loaded parallel corpus", src=str(src_path), tgt=str(tgt_path), pairs=len(pairs))
    return ParallelCorpus(pairs=pairs, src_lang=src_lang, tgt_lang=tgt_lang, dropped=dropped)


def deduplicate(corpus: ParallelCorpus) -> ParallelCorpus:
    """Keep the first occurrence of every exact (source, target) pair."""
    seen = set()
    kept: List[SentencePair] = []
    for pair in corpus.pairs:
        key = (pair.source, pair.target)
        if key in seen:
            continue
        seen.add(key)
        kept.append(pair)
    removed = len(corpus) - len(kept)
    if removed:
        logger.info("Removed duplicate pairs", removed=removed, kept=len(kept))
    return corpus.with_pairs(kept)


def split(
    corpus: ParallelCorpus, spec: SplitSpec
) -> Tuple[ParallelCorpus, ParallelCorpus, ParallelCorpus]:
    """
    Shuffle with ``spec.seed`` and cut into (train, valid, test).

    Raises:
        ConfigError: If valid + test do not leave at least one training pair.
    """
    held_out = spec.valid_size + spec.test_size
    if held_out > 0 and held_out >= len(corpus):
        raise ConfigError(
            f"cannot hold out {spec.valid_size}+{spec.test_size} pairs from a corpus of {len(corpus)}"
        )
    order = np.random.default_rng(spec.seed).permutation(len(corpus))
    shuffled = [corpus.pairs[i] for i in order]
    valid = shuffled[: spec.valid_size]
    test = shuffled[spec.valid_size : held_out]
    train = shuffled[held_out:]
    logger.info("Split corpus", train=len(train), valid=len(valid), test=len(test), seed=spec.seed)
    return corpus.with_pairs(train), corpus.with_pairs(valid), corpus.with_pairs(test)


def subsample(items: Sequence, size: int, seed: int) -> List:
    """Seeded uniform subset without replacement, in original order."""
    if size >= len(items):
        return list(items)
    chosen = np.sort(np.random.default_rng(seed).choice(len(items), size=size, replace=False))
    return [items[i] for i in chosen]


def mix(
    parallel: ParallelCorpus,
    synthetic: ParallelCorpus,
    max_ratio: Optional[float],
    seed: int,
) -> ParallelCorpus:
    """
    Concatenate authentic and synthetic pairs and shuffle them.

    When ``max_ratio`` is set and synthetic pairs outnumber
    ``max_ratio`` times the authentic ones, the synthetic side is
    subsampled to ``floor(max_ratio * len(parallel))``. Training treats
    both kinds alike; origin tags survive for auditing.

    Raises:
        ConfigError: If the language pairs differ or the ratio is negative.
    """
    if (parallel.src_lang, parallel.tgt_lang) != (synthetic.src_lang, synthetic.tgt_lang):
        raise ConfigError(
            f"cannot mix {parallel.src_lang}-{parallel.tgt_lang} with "
            f"{synthetic.src_lang}-{synthetic.tgt_lang}"
        )
    if max_ratio is not None and max_ratio < 0:
        raise ConfigError(f"max_ratio must be non-negative, got {max_ratio}")

    rng = np.random.default_rng(seed)
    synthetic_pairs = [replace(p, origin=Origin.SYNTHETIC) for p in synthetic.pairs]
    if max_ratio is not None:
        cap = int(np.floor(max_ratio * len(parallel)))
        if len(synthetic_pairs) > cap:
            chosen = np.sort(rng.choice(len(synthetic_pairs), size=cap, replace=False))
            logger.info(
                "Subsampled synthetic pairs",
                available=len(synthetic_pairs),
                kept=cap,
                ratio=max_ratio,
            )
            synthetic_pairs = [synthetic_pairs[i] for i in chosen]

    combined = list(parallel.pairs) + synthetic_pairs
    order = rng.permutation(len(combined))
    mixed = [combined[i] for i in order]
    logger.info(
        "Mixed corpus",
        authentic=len(parallel),
        synthetic=len(synthetic_pairs),
        total=len(mixed),
    )
    return parallel.with_pairs(mixed)


def filter_pairs(
    corpus: ParallelCorpus,
    max_tokens: Optional[int] = None,
    max_ratio: Optional[float] = 9.0,
) -> ParallelCorpus:
    """Drop pairs longer than ``max_tokens`` words or with a skewed length ratio."""
    kept: List[SentencePair] = []
    for pair in corpus.pairs:
        n_src, n_tgt = len(pair.source.split()), len(pair.target.split())
        if max_tokens is not None and max(n_src, n_tgt) > max_tokens:
            continue
        if max_ratio is not None and max(n_src, n_tgt) > max_ratio * min(n_src, n_tgt):
            continue
        kept.append(pair)
    if len(kept) != len(corpus):
        logger.info("Filtered pairs", removed=len(corpus) - len(kept), kept=len(kept))
    return corpus.with_pairs(kept)


def reverse(corpus: ParallelCorpus) -> ParallelCorpus:
    """Swap source and target sides."""
    pairs = [SentencePair(p.target, p.source, p.origin) for p in corpus.pairs]
    return ParallelCorpus(pairs=pairs, src_lang=corpus.tgt_lang, tgt_lang=corpus.src_lang)


def _write_lines(path: PathLike, lines: Iterable[str]) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for line in lines:
                f.write(line + "\n")
    except OSError as e:
        raise CorpusIOError(f"cannot write {path}: {e}") from e


def write_corpus(
    corpus: ParallelCorpus,
    src_path: PathLike,
    tgt_path: PathLike,
    tag_path: Optional[PathLike] = None,
) -> None:
    """Write the corpus as aligned LF-terminated files, plus optional origin tags."""
    _write_lines(src_path, corpus.sources)
    _write_lines(tgt_path, corpus.targets)
    if tag_path is not None:
        _write_lines(tag_path, (p.origin.value for p in corpus.pairs))
    logger.debug("Wrote corpus", src=str(src_path), tgt=str(tgt_path), pairs=len(corpus))


def write_lines(path: PathLike, lines: Iterable[str]) -> None:
    """Write plain text lines with LF endings."""
    _write_lines(path, lines)
