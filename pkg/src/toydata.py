"""
Synthetic related-dialect data for desk-scale experiments.

Two source dialects, a parent ``k`` and a child ``t``, share one stem
inventory and differ only in the inflection suffixes attached to each
word class. Both translate word by word into the target language ``y``.
The parent pair is large, the child pair small, and child-side
monolingual target text feeds back-translation and language models::

    data = generate_toy_data(ToyDataSpec(seed=3))
    files = write_toy_data(data, "data/toy")
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from .corpus import Origin, ParallelCorpus, SentencePair, write_corpus, write_lines
from .errors import ConfigError
from .lm import MonoCorpus
from .logging_config import get_logger

logger = get_logger(__name__)

PARENT_LANG = "k"
CHILD_LANG = "t"
TARGET_LANG = "y"

ONSETS = ("b", "d", "g", "k", "l", "m", "n", "p", "r", "s", "t", "z")
VOWELS = ("a", "e", "i", "o", "u")

# One suffix per word class; the dialects diverge systematically.
PARENT_SUFFIXES = ("lar", "ga", "dan", "ny")
CHILD_SUFFIXES = ("ler", "ge", "den", "ni")


@dataclass(frozen=True)
class ToyDataSpec:
    """Sizes and seed of a toy dataset."""
    parent_pairs: int = 5000
    child_pairs: int = 500
    child_valid: int = 200
    child_test: int = 200
    mono_sentences: int = 2000
    stems: int = 150
    min_words: int = 3
    max_words: int = 8
    seed: int = 1

    def __post_init__(self):
        for name in ("parent_pairs", "child_pairs", "child_valid", "child_test", "mono_sentences"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.stems < 1:
            raise ConfigError("stems must be positive")
        if not 1 <= self.min_words <= self.max_words:
            raise ConfigError(f"need 1 <= min_words <= max_words, got {self.min_words}..{self.max_words}")


@dataclass
class ToyLexicon:
    """Shared source stems, their word classes and target-language words."""
    stems: List[str]
    classes: List[int]
    targets: List[str]

    def source_word(self, index: int, lang: str) -> str:
        suffixes = PARENT_SUFFIXES if lang == PARENT_LANG else CHILD_SUFFIXES
        return self.stems[index] + suffixes[self.classes[index]]

    def target_word(self, index: int) -> str:
        return self.targets[index]


@dataclass
class ToyData:
    lexicon: ToyLexicon
    parent: ParallelCorpus
    child_train: ParallelCorpus
    child_valid: ParallelCorpus
    child_test: ParallelCorpus
    mono: MonoCorpus


def _unique_words(rng: np.random.Generator, count: int, syllables: Tuple[int, int], taken: set) -> List[str]:
    words: List[str] = []
    low, high = syllables
    while len(words) < count:
        n = int(rng.integers(low, high + 1))
        word = "".join(ONSETS[rng.integers(len(ONSETS))] + VOWELS[rng.integers(len(VOWELS))] for _ in range(n))
        if word in taken:
            continue
        taken.add(word)
        words.append(word)
    return words


def build_lexicon(rng: np.random.Generator, stems: int) -> ToyLexicon:
    taken: set = set()
    source = _unique_words(rng, stems, (1, 2), taken)
    target = _unique_words(rng, stems, (2, 3), taken)
    classes = [int(c) for c in rng.integers(len(PARENT_SUFFIXES), size=stems)]
    return ToyLexicon(stems=source, classes=classes, targets=target)


def _zipf_weights(n: int) -> np.ndarray:
    weights = 1.0 / np.arange(1, n + 1)
    return weights / weights.sum()


def _sample_sentences(rng: np.random.Generator, spec: ToyDataSpec, count: int) -> List[np.ndarray]:
    weights = _zipf_weights(spec.stems)
    lengths = rng.integers(spec.min_words, spec.max_words + 1, size=count)
    return [rng.choice(spec.stems, size=int(n), p=weights) for n in lengths]


def _render_pairs(lexicon: ToyLexicon, sentences: Sequence[np.ndarray], lang: str) -> List[SentencePair]:
    pairs = []
    for indices in sentences:
        source = " ".join(lexicon.source_word(int(i), lang) for i in indices)
        target = " ".join(lexicon.target_word(int(i)) for i in indices)
        pairs.append(SentencePair(source, target, Origin.AUTHENTIC))
    return pairs


def generate_toy_data(spec: ToyDataSpec = ToyDataSpec()) -> ToyData:
    """
    Generate the parent pair, child splits and child-side monolingual text.

    Word frequencies follow a Zipf distribution over stems, so frequent
    words are seen often even in the small child corpus. The same seed
    always yields the same data.
    """
    rng = np.random.default_rng(spec.seed)
    lexicon = build_lexicon(rng, spec.stems)

    parent = _render_pairs(lexicon, _sample_sentences(rng, spec, spec.parent_pairs), PARENT_LANG)
    n_child = spec.child_pairs + spec.child_valid + spec.child_test
    child = _render_pairs(lexicon, _sample_sentences(rng, spec, n_child), CHILD_LANG)
    mono_pairs = _render_pairs(lexicon, _sample_sentences(rng, spec, spec.mono_sentences), CHILD_LANG)

    def corpus(pairs: List[SentencePair], src_lang: str) -> ParallelCorpus:
        return ParallelCorpus(pairs=pairs, src_lang=src_lang, tgt_lang=TARGET_LANG)

    train_end = spec.child_pairs
    valid_end = train_end + spec.child_valid
    data = ToyData(
        lexicon=lexicon,
        parent=corpus(parent, PARENT_LANG),
        child_train=corpus(child[:train_end], CHILD_LANG),
        child_valid=corpus(child[train_end:valid_end], CHILD_LANG),
        child_test=corpus(child[valid_end:], CHILD_LANG),
        mono=MonoCorpus([p.target for p in mono_pairs], TARGET_LANG),
    )
    logger.info(
        "Generated toy data",
        parent=len(data.parent),
        child_train=len(data.child_train),
        child_valid=len(data.child_valid),
        child_test=len(data.child_test),
        mono=len(data.mono),
        seed=spec.seed,
    )
    return data


def write_toy_data(data: ToyData, outdir: Union[str, Path]) -> Dict[str, Path]:
    """
    Write every split as aligned text files plus the lexicon.

    Returns:
        Mapping from a short name (``parent.train.src``, ``child.test.tgt``,
        ``mono`` ...) to the written path.
    """
    outdir = Path(outdir)
    files: Dict[str, Path] = {}
    splits = {
        "parent.train": data.parent,
        "child.train": data.child_train,
        "child.valid": data.child_valid,
        "child.test": data.child_test,
    }
    for name, corpus in splits.items():
        src = outdir / f"{name}.{corpus.src_lang}"
        tgt = outdir / f"{name}.{corpus.tgt_lang}"
        write_corpus(corpus, src, tgt)
        files[f"{name}.src"] = src
        files[f"{name}.tgt"] = tgt
    files["mono"] = outdir / f"mono.{data.mono.lang}"
    write_lines(files["mono"], data.mono.sentences)

    lexicon = data.lexicon
    files["lexicon"] = outdir / "lexicon.tsv"
    write_lines(
        files["lexicon"],
        (
            f"{lexicon.source_word(i, PARENT_LANG)}\t{lexicon.source_word(i, CHILD_LANG)}\t{lexicon.target_word(i)}"
            for i in range(len(lexicon.stems))
        ),
    )
    logger.info("Wrote toy data", outdir=str(outdir), files=len(files))
    return files


def recipe_settings(recipe: str, files: Dict[str, Path]) -> Dict[str, str]:
    """
    Experiment settings running ``recipe`` on written toy data.

    Paths are file names, so the config must live next to the data.
    """
    def name(key: str) -> str:
        return files[key].name

    settings = {
        "run.recipe": recipe,
        "run.outdir": f"runs/{recipe}",
        "data.train_src": name("child.train.src"),
        "data.train_tgt": name("child.train.tgt"),
        "data.valid_src": name("child.valid.src"),
        "data.valid_tgt": name("child.valid.tgt"),
        "data.test_src": name("child.test.src"),
        "data.test_tgt": name("child.test.tgt"),
        "data.src_lang": CHILD_LANG,
        "data.tgt_lang": TARGET_LANG,
        "data.vocab_size": "600",
        "model.profile": "desk",
        "model.max_len": "64",
        "train.epochs": "20",
        "train.batch_tokens": "1024",
        "train.warmup_steps": "400",
        "train.lr_scale": "2.0",
        "decode.beam_size": "4",
    }
    if recipe == "transfer":
        settings.update({
            "transfer.parent_train_src": name("parent.train.src"),
            "transfer.parent_train_tgt": name("parent.train.tgt"),
            "transfer.parent_src_lang": PARENT_LANG,
            "transfer.parent_epochs": "3",
        })
    elif recipe == "backtranslation":
        settings.update({
            "backtranslation.mono": name("mono"),
            "backtranslation.reverse_epochs": "10",
            "backtranslation.ratio": "2",
        })
    return settings


def write_recipe_configs(files: Dict[str, Path], outdir: Union[str, Path]) -> Dict[str, Path]:
    """Write ``<recipe>.conf`` for baseline, transfer and back-translation next to the data."""
    outdir = Path(outdir)
    written: Dict[str, Path] = {}
    for recipe in ("baseline", "transfer", "backtranslation"):
        path = outdir / f"{recipe}.conf"
        write_lines(path, (f"{key}={value}" for key, value in recipe_settings(recipe, files).items()))
        written[recipe] = path
    return written
