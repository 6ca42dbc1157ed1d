"""
Corpus-level BLEU: clipped n-gram precisions up to order 4 with a
brevity penalty, over whitespace tokens, single reference.
"""

import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple

from .errors import AlignmentError, ConfigError

MAX_ORDER = 4


class CaseMode(str, Enum):
    SENSITIVE = "sensitive"
    INSENSITIVE = "insensitive"


@dataclass(frozen=True)
class BleuReport:
    """
    Attributes:
        matched: Clipped matches per order, summed over the corpus.
        totals: Hypothesis n-gram counts per order.
        bp: Brevity penalty.
        hyp_len: Hypothesis token count.
        ref_len: Reference token count.
        score: BLEU as a percentage.
        case_mode: Whether both sides were lowercased.
    """
    matched: Tuple[int, ...]
    totals: Tuple[int, ...]
    bp: float
    hyp_len: int
    ref_len: int
    score: float
    case_mode: CaseMode

    @property
    def precisions(self) -> List[float]:
        return [m / t if t else 0.0 for m, t in zip(self.matched, self.totals)]

    def format(self) -> str:
        ratios = "/".join(f"{m}/{t}" for m, t in zip(self.matched, self.totals))
        return (
            f"BLEU = {self.score:.2f} (p1/p2/p3/p4 = {ratios}, BP = {self.bp:.4f}, "
            f"hyp_len = {self.hyp_len}, ref_len = {self.ref_len}, case = {self.case_mode.value})"
        )

    def __str__(self) -> str:
        return self.format()


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def clipped_ngram_counts(hyp: Sequence[str], ref: Sequence[str], n: int) -> Tuple[int, int]:
    """
    Matched n-grams (clipped by their reference count) and the hypothesis total.

    Raises:
        ConfigError: If ``n`` is outside 1..4.
    """
    if not 1 <= n <= MAX_ORDER:
        raise ConfigError(f"n-gram order must lie in 1..{MAX_ORDER}, got {n}")
    hyp_counts = _ngrams(hyp, n)
    ref_counts = _ngrams(ref, n)
    matched = sum(min(count, ref_counts[gram]) for gram, count in hyp_counts.items())
    return matched, max(0, len(hyp) - n + 1)


def brevity_penalty(hyp_len: int, ref_len: int) -> float:
    if hyp_len > ref_len:
        return 1.0
    if hyp_len == 0:
        return 0.0 if ref_len > 0 else 1.0
    return math.exp(1.0 - ref_len / hyp_len)


def simple_lower(text: str) -> str:
    """One-to-one lowercasing; characters whose lowercase form is longer stay as they are."""
    return "".join(lowered if len(lowered := ch.lower()) == 1 else ch for ch in text)


def _tokens(line: str, case_mode: CaseMode) -> List[str]:
    if case_mode == CaseMode.INSENSITIVE:
        line = simple_lower(line)
    return line.split()


def corpus_bleu(
    hyps: Sequence[str],
    refs: Sequence[str],
    case_mode: CaseMode = CaseMode.INSENSITIVE,
) -> BleuReport:
    """
    Score hypotheses against one reference each.

    Counts are aggregated over the corpus before division. There is no
    smoothing: a corpus without any match at some order scores 0.

    Raises:
        AlignmentError: If the two sides differ in line count.
    """
    if len(hyps) != len(refs):
        raise AlignmentError(f"{len(hyps)} hypotheses for {len(refs)} references")
    case_mode = CaseMode(case_mode)
    matched = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    hyp_len = ref_len = 0
    for hyp_line, ref_line in zip(hyps, refs):
        hyp = _tokens(hyp_line, case_mode)
        ref = _tokens(ref_line, case_mode)
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, MAX_ORDER + 1):
            m, t = clipped_ngram_counts(hyp, ref, n)
            matched[n - 1] += m
            totals[n - 1] += t

    bp = brevity_penalty(hyp_len, ref_len)
    if all(m > 0 for m in matched):
        log_mean = sum(math.log(m / t) for m, t in zip(matched, totals)) / MAX_ORDER
        score = 100.0 * bp * math.exp(log_mean)
    else:
        score = 0.0
    return BleuReport(
        matched=tuple(matched),
        totals=tuple(totals),
        bp=bp,
        hyp_len=hyp_len,
        ref_len=ref_len,
        score=score,
        case_mode=case_mode,
    )
