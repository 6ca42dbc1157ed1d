"""
Byte-pair-encoding subword vocabulary shared across every language of an
experiment.

Words are split into characters with an end-of-word marker on the final
character, then the most frequent adjacent symbol pair is merged
repeatedly until the vocabulary reaches its target size.
"""

import hashlib
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

from .errors import ConfigError, CorpusIOError, DataError, TokenIndexError
from .logging_config import get_logger

logger = get_logger(__name__)

END_OF_WORD = "</w>"
MERGES_HEADER = "#version: lowres-nmt-bpe-1"
MERGES_FILE = "bpe.codes"
VOCAB_FILE = "vocab.txt"

PAD, BOS, EOS, UNK = "<pad>", "<s>", "</s>", "<unk>"
SPECIAL_TOKENS = (PAD, BOS, EOS, UNK)
PAD_ID, BOS_ID, EOS_ID, UNK_ID = 0, 1, 2, 3

Pair = Tuple[str, str]
Word = Tuple[str, ...]


def normalize(text: str) -> str:
    """NFC-normalize a line of text."""
    return unicodedata.normalize("NFC", text)


def word_symbols(word: str) -> Word:
    """Split a word into characters, marking the final one as end-of-word."""
    if not word:
        return ()
    return tuple(word[:-1]) + (word[-1] + END_OF_WORD,)


def _apply_merge(symbols: Word, pair: Pair) -> Word:
    left, right = pair
    if len(symbols) < 2:
        return symbols
    merged: List[str] = []
    i = 0
    while i < len(symbols):
        if i < len(symbols) - 1 and symbols[i] == left and symbols[i + 1] == right:
            merged.append(left + right)
            i += 2
        else:
            merged.append(symbols[i])
            i += 1
    return tuple(merged)


@dataclass
class SubwordVocabulary:
    """
    Ordered merge list plus the token/id tables built from it.

    Ids 0-3 hold the special tokens pad, bos, eos and unk; then come the
    initial symbols in sorted order, then one token per merge.
    """

    merges: List[Pair]
    tokens: List[str]
    token_to_id: Dict[str, int] = field(init=False)
    _cache: Dict[str, Word] = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        if tuple(self.tokens[:4]) != SPECIAL_TOKENS:
            raise DataError(f"vocabulary must start with {SPECIAL_TOKENS}, got {self.tokens[:4]}")
        self.token_to_id = {}
        for i, token in enumerate(self.tokens):
            if token in self.token_to_id:
                raise DataError(f"duplicate token {token!r} at id {i}")
            self.token_to_id[token] = i

    @classmethod
    def build(cls, merges: Sequence[Pair], alphabet: Iterable[str]) -> "SubwordVocabulary":
        """Assemble a vocabulary from a merge list and its initial symbols."""
        tokens = list(SPECIAL_TOKENS) + sorted(set(alphabet))
        seen = set(tokens)
        for left, right in merges:
            merged = left + right
            if merged not in seen:
                tokens.append(merged)
                seen.add(merged)
        return cls(merges=[tuple(m) for m in merges], tokens=tokens)

    @property
    def id_to_token(self) -> List[str]:
        return self.tokens

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def size(self) -> int:
        return len(self.tokens)

    def fingerprint(self) -> int:
        return fingerprint(self)

    def segment_word(self, word: str) -> Word:
        cached = self._cache.get(word)
        if cached is not None:
            return cached
        symbols = word_symbols(word)
        for pair in self.merges:
            symbols = _apply_merge(symbols, pair)
        self._cache[word] = symbols
        return symbols

    def segment(self, sentence: str) -> List[str]:
        """Subword tokens of a sentence, merges applied in learned order."""
        tokens: List[str] = []
        for word in normalize(sentence).split():
            tokens.extend(self.segment_word(word))
        return tokens

    def encode(self, sentence: str) -> List[int]:
        return encode(self, sentence)

    def decode(self, ids: Sequence[int]) -> str:
        return decode(self, ids)

    def save(self, directory: Union[str, Path]) -> Path:
        """Write ``bpe.codes`` and ``vocab.txt`` into ``directory``."""
        directory = Path(directory)
        try:
            directory.mkdir(parents=True, exist_ok=True)
            with open(directory / MERGES_FILE, "w", encoding="utf-8", newline="\n") as f:
                f.write(MERGES_HEADER + "\n")
                for left, right in self.merges:
                    f.write(f"{left} {right}\n")
            with open(directory / VOCAB_FILE, "w", encoding="utf-8", newline="\n") as f:
                for token in self.tokens:
                    f.write(token + "\n")
        except OSError as e:
            raise CorpusIOError(f"cannot write vocabulary to {directory}: {e}") from e
        logger.info("Vocabulary saved", path=str(directory), size=self.size, merges=len(self.merges))
        return directory

    @classmethod
    def load(cls, directory: Union[str, Path]) -> "SubwordVocabulary":
        """Read a vocabulary written by :meth:`save`."""
        directory = Path(directory)
        try:
            merge_lines = (directory / MERGES_FILE).read_text(encoding="utf-8").split("\n")
            token_lines = (directory / VOCAB_FILE).read_text(encoding="utf-8").split("\n")
        except OSError as e:
            raise CorpusIOError(f"cannot read vocabulary from {directory}: {e}") from e
        if not merge_lines or merge_lines[0] != MERGES_HEADER:
            raise DataError(f"{directory / MERGES_FILE}: missing header {MERGES_HEADER!r}")
        merges: List[Pair] = []
        for number, line in enumerate(merge_lines[1:], start=2):
            if not line:
                continue
            parts = line.split(" ")
            if len(parts) != 2:
                raise DataError(f"{directory / MERGES_FILE}:{number}: expected 'left right'")
            merges.append((parts[0], parts[1]))
        if token_lines and token_lines[-1] == "":
            token_lines = token_lines[:-1]
        return cls(merges=merges, tokens=token_lines)


def _count_words(corpora: Iterable[Iterable[str]]) -> Counter:
    counts: Counter = Counter()
    for stream in corpora:
        for line in stream:
            counts.update(normalize(line).split())
    return counts


def _pair_counts(words: Dict[Word, int]) -> Counter:
    pairs: Counter = Counter()
    for symbols, freq in words.items():
        for i in range(len(symbols) - 1):
            pairs[symbols[i], symbols[i + 1]] += freq
    return pairs


def learn_merges(corpora: Sequence[Iterable[str]], vocab_size: int) -> SubwordVocabulary:
    """
    Learn a shared BPE vocabulary from one or more text streams.

    Pair frequencies are recounted after every merge. Ties are broken by
    the lexicographically smallest pair.

    Args:
        corpora: Text streams, one sentence per item; all are pooled.
        vocab_size: Target size including the four special tokens.

    Returns:
        The learned vocabulary.

    Raises:
        ConfigError: If no corpora are given or ``vocab_size`` cannot hold
            the specials plus the initial alphabet.
    """
    if not corpora:
        raise ConfigError("learn_merges needs at least one corpus")
    word_counts = _count_words(corpora)
    words: Dict[Word, int] = {}
    for word, freq in word_counts.items():
        symbols = word_symbols(word)
        words[symbols] = words.get(symbols, 0) + freq

    alphabet = sorted({s for symbols in words for s in symbols})
    base_size = len(SPECIAL_TOKENS) + len(alphabet)
    if vocab_size < base_size:
        raise ConfigError(
            f"vocab_size {vocab_size} is too small: {len(SPECIAL_TOKENS)} specials "
            f"+ {len(alphabet)} initial symbols need at least {base_size}"
        )

    merges: List[Pair] = []
    known = set(SPECIAL_TOKENS) | set(alphabet)
    token_count = base_size
    while token_count < vocab_size:
        pairs = _pair_counts(words)
        if not pairs:
            break
        best = min(pairs.items(), key=lambda item: (-item[1], item[0]))[0]
        merges.append(best)
        merged_token = best[0] + best[1]
        if merged_token not in known:
            known.add(merged_token)
            token_count += 1
        updated: Dict[Word, int] = {}
        for symbols, freq in words.items():
            key = _apply_merge(symbols, best)
            updated[key] = updated.get(key, 0) + freq
        words = updated

    vocab = SubwordVocabulary.build(merges, alphabet)
    logger.info(
        "Learned BPE merges",
        word_types=len(word_counts),
        alphabet=len(alphabet),
        merges=len(merges),
        vocab_size=vocab.size,
    )
    return vocab


def encode(vocab: SubwordVocabulary, sentence: str) -> List[int]:
    """
    Map a sentence to subword ids; characters never seen map to unk.

    bos/eos are not added here.
    """
    return [vocab.token_to_id.get(token, UNK_ID) for token in vocab.segment(sentence)]


def decode(vocab: SubwordVocabulary, ids: Sequence[int]) -> str:
    """
    Join subword ids back into text, dropping special tokens.

    Raises:
        TokenIndexError: If an id is outside the vocabulary.
    """
    pieces: List[str] = []
    size = vocab.size
    for i in ids:
        i = int(i)
        if i < 0 or i >= size:
            raise TokenIndexError(f"token id {i} outside vocabulary of size {size}")
        if i < len(SPECIAL_TOKENS):
            continue
        pieces.append(vocab.tokens[i])
    return "".join(pieces).replace(END_OF_WORD, " ").rstrip(" ")


def fingerprint(vocab: SubwordVocabulary) -> int:
    """Deterministic 64-bit hash over the merge list and the token list."""
    digest = hashlib.blake2b(digest_size=8)
    for left, right in vocab.merges:
        digest.update(f"{left}\x1f{right}\x1e".encode("utf-8"))
    digest.update(b"\x1d")
    for token in vocab.tokens:
        digest.update(token.encode("utf-8") + b"\x1e")
    return int.from_bytes(digest.digest(), "little")


def read_lines(path: Union[str, Path]) -> List[str]:
    """Read a UTF-8 text file as a list of lines without terminators."""
    try:
        with open(path, encoding="utf-8") as f:
            return [line.rstrip("\n").rstrip("\r") for line in f]
    except OSError as e:
        raise CorpusIOError(f"cannot read {path}: {e}") from e


def apply_to_file(vocab: SubwordVocabulary, src: Union[str, Path], dst: Union[str, Path]) -> int:
    """Write the space-separated subword segmentation of each line of ``src``."""
    lines = read_lines(src)
    try:
        with open(dst, "w", encoding="utf-8", newline="\n") as f:
            for line in lines:
                f.write(" ".join(vocab.segment(line)) + "\n")
    except OSError as e:
        raise CorpusIOError(f"cannot write {dst}: {e}") from e
    return len(lines)

