"""
Fixture scorer driven by a conditional probability table.

Table files are ``key=value`` lines read with python-dotenv::

    tokens=eos a b
    start=0.1 0.6 0.3
    start.a=0.2 0.1 0.7
    start.a.b=0.9 0.05 0.05

``tokens`` names the table's symbols (``eos`` is the end-of-sentence
token). ``start`` is the empty context and ``start.x.y`` the context after
emitting x then y. Every value lists one probability per symbol, in
``tokens`` order. An optional ``default`` row applies to unlisted
contexts; without it, unlisted contexts emit eos with certainty.
"""

import hashlib
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np
from dotenv import dotenv_values

from ..errors import DataError, CorpusIOError
from ..tokenizer import EOS_ID, SPECIAL_TOKENS
from .base import Scorer

EOS_NAME = "eos"
START_KEY = "start"
DEFAULT_KEY = "default"


class TableScorer(Scorer):
    """
    Scores prefixes by looking their context up in a probability table.

    Ids 0-3 are the usual specials; table symbols other than ``eos``
    follow from id 4 on in ``tokens`` order.
    """

    def __init__(
        self,
        symbols: Sequence[str],
        rows: Mapping[Tuple[str, ...], Sequence[float]],
        default: Sequence[float] = None,
    ):
        self.symbols = list(symbols)
        if EOS_NAME not in self.symbols:
            raise DataError(f"table tokens must include {EOS_NAME!r}")
        self.names: List[str] = list(SPECIAL_TOKENS) + [s for s in self.symbols if s != EOS_NAME]
        self.ids: Dict[str, int] = {name: i for i, name in enumerate(self.names)}
        self.ids[EOS_NAME] = EOS_ID
        self.vocab_size = len(self.names)
        self.rows = {ctx: self._row(probs, ctx) for ctx, probs in rows.items()}
        self.default = self._row(default, ("default",)) if default is not None else None
        digest = hashlib.blake2b(" ".join(self.symbols).encode("utf-8"), digest_size=8)
        self.fingerprint = int.from_bytes(digest.digest(), "little")

    def _row(self, probs: Sequence[float], ctx: Tuple[str, ...]) -> np.ndarray:
        if len(probs) != len(self.symbols):
            raise DataError(
                f"context {' '.join(ctx) or START_KEY}: {len(probs)} probabilities for "
                f"{len(self.symbols)} tokens"
            )
        row = np.zeros(self.vocab_size, dtype=np.float64)
        for symbol, p in zip(self.symbols, probs):
            row[self.ids[symbol]] = p
        return row

    @classmethod
    def from_mapping(cls, values: Mapping[str, str]) -> "TableScorer":
        if "tokens" not in values:
            raise DataError("table needs a 'tokens' entry")
        symbols = values["tokens"].split()
        rows: Dict[Tuple[str, ...], List[float]] = {}
        default = None
        for key, raw in values.items():
            if key == "tokens":
                continue
            try:
                probs = [float(x) for x in (raw or "").split()]
            except ValueError as e:
                raise DataError(f"table entry {key!r}: {raw!r} is not a list of numbers") from e
            if key == DEFAULT_KEY:
                default = probs
                continue
            head, *context = key.split(".")
            if head != START_KEY:
                raise DataError(f"table key {key!r} must start with {START_KEY!r}")
            rows[tuple(context)] = probs
        return cls(symbols, rows, default)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "TableScorer":
        if not Path(path).is_file():
            raise CorpusIOError(f"table file {path} does not exist")
        return cls.from_mapping(dotenv_values(path))

    def encode(self, symbols: Sequence[str]) -> List[int]:
        return [self.ids[s] for s in symbols]

    def symbol_names(self, ids: Sequence[int]) -> List[str]:
        return [EOS_NAME if i == EOS_ID else self.names[i] for i in ids]

    def _context(self, prefix: Sequence[int]) -> Tuple[str, ...]:
        return tuple(self.symbol_names(prefix[1:]))

    def probabilities(self, prefix: Sequence[int]) -> np.ndarray:
        row = self.rows.get(self._context(prefix))
        if row is not None:
            return row
        if self.default is not None:
            return self.default
        row = np.zeros(self.vocab_size, dtype=np.float64)
        row[EOS_ID] = 1.0
        return row

    def start(self, src_ids: Sequence[int]) -> None:
        return None

    def step_logits(self, state, prefixes: Sequence[Sequence[int]]) -> np.ndarray:
        probs = np.stack([self.probabilities(p) for p in prefixes])
        with np.errstate(divide="ignore"):
            logits = np.log(probs)
        return np.maximum(logits, -1e9)
