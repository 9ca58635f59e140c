"""Glossary biasing of recognizer outputs.

Two surfaces: re-weighting an explicit token distribution, and rescoring
replayed hypotheses whose backends expose log-probs but no distributions.
Distribution biasing matches single words case-insensitively; hypothesis
rescoring matches multi-word glossary terms as contiguous phrases.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping

from .core import BeamSet, Hypothesis, Token
from .quality import normalize_token


class GlossaryRescoreWarning(UserWarning):
    """Raised when a hypothesis cannot be rescored (missing log-probs)."""


@dataclass(frozen=True)
class TokenDistribution:
    """Probability distribution over candidate words; sums to 1."""

    entries: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(self.entries))
        if not self.entries:
            raise ValueError("distribution must not be empty")
        total = 0.0
        for word, prob in self.entries.items():
            if prob < 0:
                raise ValueError(f"probability for {word!r} is negative: {prob}")
            total += prob
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, expected 1")

    def probability(self, word: str) -> float:
        return self.entries.get(word, 0.0)


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")


def glossary_bias_raw(dist: TokenDistribution, glossary: Iterable[str],
                      alpha: float) -> dict[str, float]:
    """Literal re-weighting: alpha * p for glossary words, (1-alpha) * p else.

    Returns an unnormalized sub-probability map; most callers want
    apply_glossary_bias, which renormalizes.
    """
    _check_alpha(alpha)
    terms = {w.casefold() for w in glossary}
    return {
        word: (alpha if word.casefold() in terms else 1.0 - alpha) * prob
        for word, prob in dist.entries.items()
    }


def apply_glossary_bias(dist: TokenDistribution, glossary: Iterable[str],
                        alpha: float) -> TokenDistribution:
    """Bias the distribution toward glossary words and renormalize to 1."""
    scaled = glossary_bias_raw(dist, glossary, alpha)
    total = sum(scaled.values())
    if total <= 0:
        raise ValueError("bias left no probability mass to renormalize")
    return TokenDistribution({w: p / total for w, p in scaled.items()})


def _phrase_cover(token_texts: list[str], glossary: Iterable[str]) -> set[int]:
    """Indices of tokens covered by a contiguous glossary phrase occurrence."""
    norm = [normalize_token(t) for t in token_texts]
    covered: set[int] = set()
    for term in glossary:
        words = [normalize_token(w) for w in term.split()]
        words = [w for w in words if w]
        if not words:
            continue
        size = len(words)
        for i in range(len(norm) - size + 1):
            if norm[i:i + size] == words:
                covered.update(range(i, i + size))
    return covered


def rescore_hypothesis(hyp: Hypothesis, glossary: Iterable[str],
                       alpha: float) -> Hypothesis:
    """Shift token log-probs by log(alpha) inside glossary phrases, else log(1-alpha).

    Token text never changes. A hypothesis with any missing token log-prob
    is returned unchanged with a GlossaryRescoreWarning.
    """
    _check_alpha(alpha)
    if not hyp.tokens:
        return hyp
    if any(t.log_prob is None for t in hyp.tokens):
        warnings.warn("hypothesis has tokens without log_prob; not rescored",
                      GlossaryRescoreWarning, stacklevel=2)
        return hyp
    covered = _phrase_cover([t.text for t in hyp.tokens], glossary)
    bonus = math.log(alpha)
    penalty = math.log(1.0 - alpha)
    tokens = tuple(
        Token(t.text, t.log_prob + (bonus if i in covered else penalty))
        for i, t in enumerate(hyp.tokens)
    )
    avg = sum(t.log_prob for t in tokens) / len(tokens)
    return Hypothesis(tokens, avg)


def rescore_beam(beam: BeamSet, glossary: Iterable[str], alpha: float) -> BeamSet:
    """Rescore every hypothesis and re-rank the beam (stable under ties)."""
    rescored = [rescore_hypothesis(h, glossary, alpha) for h in beam.hypotheses]
    ranked = sorted(rescored, key=lambda h: -h.avg_log_prob)
    return BeamSet(tuple(ranked), beam.processing_latency)
