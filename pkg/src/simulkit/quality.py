"""Transcription and translation quality metrics.

Word- and character-level error rates ride on the accelerated edit-distance
kernel; the full alignment with an operation trace is computed in plain
Python where the backtrace is needed. Scoring defaults to case-folding and
stripping token-edge punctuation, which callers can switch off.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .hallucination import PUNCTUATION_CHARS

_PUNCT_STR = "".join(PUNCTUATION_CHARS)

OP_MATCH = "match"
OP_SUB = "sub"
OP_INS = "ins"
OP_DEL = "del"


def normalize_token(text: str) -> str:
    """Case-fold and strip leading/trailing punctuation from one token."""
    return text.strip(_PUNCT_STR).casefold()


def normalize_tokens(tokens: Sequence[str], enabled: bool = True) -> list[str]:
    """Normalize a token list, dropping tokens that were pure punctuation."""
    if not enabled:
        return list(tokens)
    out = [normalize_token(t) for t in tokens]
    return [t for t in out if t]


@dataclass(frozen=True)
class EditAlignment:
    """Minimal-edit alignment between a reference and a hypothesis."""

    substitutions: int
    insertions: int
    deletions: int
    reference_length: int
    op_trace: tuple[str, ...]

    @property
    def total_edits(self) -> int:
        return self.substitutions + self.insertions + self.deletions


def align_words(reference: Sequence[str], hypothesis: Sequence[str]) -> EditAlignment:
    """Unit-cost alignment with a deterministic trace.

    Ties break preferring match > substitution > deletion > insertion, so
    identical inputs always produce the same trace. Replaying the trace
    left to right turns the reference into the hypothesis.
    """
    ref = list(reference)
    hyp = list(hypothesis)
    m, n = len(ref), len(hyp)
    dp = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        dp[i][0] = i
    for j in range(n + 1):
        dp[0][j] = j
    for i in range(1, m + 1):
        row = dp[i]
        prev = dp[i - 1]
        for j in range(1, n + 1):
            best = prev[j - 1] + (0 if ref[i - 1] == hyp[j - 1] else 1)
            dele = prev[j] + 1
            if dele < best:
                best = dele
            ins = row[j - 1] + 1
            if ins < best:
                best = ins
            row[j] = best
    ops: list[str] = []
    i, j = m, n
    while i > 0 or j > 0:
        cost = dp[i][j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and cost == dp[i - 1][j - 1]:
            ops.append(OP_MATCH)
            i -= 1
            j -= 1
        elif i > 0 and j > 0 and cost == dp[i - 1][j - 1] + 1:
            ops.append(OP_SUB)
            i -= 1
            j -= 1
        elif i > 0 and cost == dp[i - 1][j] + 1:
            ops.append(OP_DEL)
            i -= 1
        else:
            ops.append(OP_INS)
            j -= 1
    ops.reverse()
    counts = Counter(ops)
    return EditAlignment(
        substitutions=counts[OP_SUB],
        insertions=counts[OP_INS],
        deletions=counts[OP_DEL],
        reference_length=m,
        op_trace=tuple(ops),
    )


def _sequence_ids(a: Sequence[str], b: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    ids: dict[str, int] = {}
    def encode(seq):
        out = np.empty(len(seq), dtype=np.int64)
        for k, tok in enumerate(seq):
            out[k] = ids.setdefault(tok, len(ids))
        return out
    return encode(a), encode(b)


def edit_distance_tokens(a: Sequence[str], b: Sequence[str]) -> int:
    """Levenshtein distance between two token sequences."""
    ia, ib = _sequence_ids(a, b)
    return int(_kernels.edit_distance(ia, ib))


def wer(reference: Sequence[str], hypothesis: Sequence[str],
        normalize: bool = True) -> float:
    """Word error rate (S + I + D) / N; may exceed 1."""
    ref = normalize_tokens(reference, normalize)
    hyp = normalize_tokens(hypothesis, normalize)
    if not ref:
        raise ValueError("word error rate requires a non-empty reference")
    return edit_distance_tokens(ref, hyp) / len(ref)


def _codepoints(text: str) -> np.ndarray:
    return np.fromiter((ord(ch) for ch in text), dtype=np.int64, count=len(text))


def edit_distance_chars(a: str, b: str) -> int:
    """Levenshtein distance between two strings, character level."""
    return int(_kernels.edit_distance(_codepoints(a), _codepoints(b)))


def cer(reference: str, hypothesis: str, normalize: bool = True) -> float:
    """Character error rate; spaces count as characters."""
    ref = reference.casefold() if normalize else reference
    hyp = hypothesis.casefold() if normalize else hypothesis
    if not ref:
        raise ValueError("character error rate requires a non-empty reference")
    return int(_kernels.edit_distance(_codepoints(ref), _codepoints(hyp))) / len(ref)


@dataclass(frozen=True)
class NGramStats:
    """Clipped n-gram match counts backing a BLEU score.

    Counts pool additively, so corpus scores aggregate counts across
    segments before the score formula is applied, never averaging
    per-sentence scores.
    """

    hits: tuple[int, ...]
    totals: tuple[int, ...]
    hyp_length: int
    ref_length: int

    def __post_init__(self):
        if len(self.hits) != len(self.totals) or not self.hits:
            raise ValueError("hits and totals must be equal-length and non-empty")
        if any(h < 0 or t < 0 or h > t for h, t in zip(self.hits, self.totals)):
            raise ValueError("invalid n-gram counts")

    @property
    def max_n(self) -> int:
        return len(self.hits)

    @property
    def weights(self) -> tuple[float, ...]:
        return (1.0 / self.max_n,) * self.max_n

    @property
    def precisions(self) -> tuple[Optional[float], ...]:
        return tuple(h / t if t > 0 else None for h, t in zip(self.hits, self.totals))

    @property
    def brevity_penalty(self) -> float:
        if self.hyp_length >= self.ref_length:
            return 1.0
        if self.hyp_length == 0:
            return 0.0
        return math.exp(1.0 - self.ref_length / self.hyp_length)

    def merge(self, other: "NGramStats") -> "NGramStats":
        if self.max_n != other.max_n:
            raise ValueError("cannot merge stats with different max_n")
        return NGramStats(
            tuple(a + b for a, b in zip(self.hits, other.hits)),
            tuple(a + b for a, b in zip(self.totals, other.totals)),
            self.hyp_length + other.hyp_length,
            self.ref_length + other.ref_length,
        )

    def score(self) -> float:
        """BLEU from these counts: BP * exp(sum of weighted log precisions).

        Orders the hypothesis is too short to form are skipped; any formable
        order with zero matches zeroes the score (no smoothing).
        """
        if self.hyp_length == 0:
            return 0.0
        evaluated = [(h, t) for h, t in zip(self.hits, self.totals) if t > 0]
        if not evaluated:
            return 0.0
        if any(h == 0 for h, _ in evaluated):
            return 0.0
        w = 1.0 / self.max_n
        log_sum = sum(w * math.log(h / t) for h, t in evaluated)
        return self.brevity_penalty * math.exp(log_sum)


def ngram_stats(reference: Sequence[str], hypothesis: Sequence[str],
                max_n: int = 4) -> NGramStats:
    """Clipped modified n-gram counts for a single reference."""
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    ref = list(reference)
    hyp = list(hypothesis)
    if not ref:
        raise ValueError("BLEU requires a non-empty reference")
    hits = []
    totals = []
    for n in range(1, max_n + 1):
        cand = Counter(tuple(hyp[i:i + n]) for i in range(len(hyp) - n + 1))
        refc = Counter(tuple(ref[i:i + n]) for i in range(len(ref) - n + 1))
        hits.append(sum(min(c, refc[g]) for g, c in cand.items()))
        totals.append(sum(cand.values()))
    return NGramStats(tuple(hits), tuple(totals), len(hyp), len(ref))


def bleu(reference: Sequence[str], hypothesis: Sequence[str], max_n: int = 4) -> float:
    """Sentence BLEU with uniform weights, clipped precisions, no smoothing."""
    if not list(hypothesis):
        if not list(reference):
            raise ValueError("BLEU requires a non-empty reference")
        return 0.0
    return ngram_stats(reference, hypothesis, max_n).score()


def corpus_bleu(pairs: Sequence[tuple[Sequence[str], Sequence[str]]],
                max_n: int = 4) -> float:
    """Corpus BLEU: pool n-gram counts across (reference, hypothesis) pairs."""
    if not pairs:
        raise ValueError("corpus BLEU requires at least one segment")
    stats = ngram_stats(pairs[0][0], pairs[0][1], max_n)
    for ref, hyp in pairs[1:]:
        stats = stats.merge(ngram_stats(ref, hyp, max_n))
    return stats.score()


MEASURES = ("jaro_winkler", "levenshtein_norm")


def lexical_similarity(a: str, b: str, measure: str = "jaro_winkler") -> float:
    """String similarity in [0, 1]; 1 for equal strings."""
    if measure == "jaro_winkler":
        return float(_kernels.jaro_winkler_ids(_codepoints(a), _codepoints(b)))
    if measure == "levenshtein_norm":
        if a == b:
            return 1.0
        dist = int(_kernels.edit_distance(_codepoints(a), _codepoints(b)))
        return 1.0 - dist / max(len(a), len(b))
    raise ValueError(f"unknown measure {measure!r}, expected one of {MEASURES}")


def _strip_words(words: Sequence[str]) -> list[str]:
    out = [w.strip(_PUNCT_STR) for w in words]
    return [w for w in out if w]


def _per_noun_best(noun: str, out_words: Sequence[str], measure: str) -> float:
    words = _strip_words(noun.split())
    if not words:
        raise ValueError(f"reference noun {noun!r} is empty after stripping")
    target = " ".join(words)
    size = len(words)
    best = 0.0
    for i in range(len(out_words) - size + 1):
        window = " ".join(out_words[i:i + size])
        sim = lexical_similarity(target, window, measure)
        if sim > best:
            best = sim
    return best


def proper_noun_score(reference_nouns: Sequence[str], output_text: Sequence[str],
                      measure: str = "jaro_winkler") -> float:
    """Mean over nouns of the best same-length window similarity in the output.

    Punctuation attached to output tokens is stripped before matching; case
    is kept, since casing is part of a proper noun. A noun with no candidate
    window scores 0.
    """
    if not reference_nouns:
        raise ValueError("proper noun scoring requires at least one reference noun")
    out_words = _strip_words(output_text)
    scores = [_per_noun_best(noun, out_words, measure) for noun in reference_nouns]
    return sum(scores) / len(scores)


def proper_noun_max_sum(reference_nouns: Sequence[str], output_text: Sequence[str],
                        measure: str = "jaro_winkler") -> float:
    """Unnormalized variant: sum of the per-noun best window similarities."""
    if not reference_nouns:
        raise ValueError("proper noun scoring requires at least one reference noun")
    out_words = _strip_words(output_text)
    return sum(_per_noun_best(noun, out_words, measure) for noun in reference_nouns)
