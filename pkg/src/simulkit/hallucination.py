"""Heuristic hallucination detectors and the alignment-based hallucination rate.

Average log-probability alone is an unreliable hallucination signal:
recognizers routinely score fabricated text highly. Detection therefore
combines rate heuristics (characters per second, punctuation density)
with an optional log-prob floor, and treats short input spans as an
aggravating factor rather than a trigger of its own.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import AlignmentSet, Hypothesis, SessionConfig

# Characters counted as punctuation, including common unicode variants.
PUNCTUATION_CHARS = frozenset(".,;:!?\"'()[]-—–…‘’“”«»")

# Input spans at or below this many seconds are hallucination-prone.
SHORT_INPUT_SECONDS = 0.7

REASON_CPS_HIGH = "cps_high"
REASON_CPS_LOW = "cps_low"
REASON_PUNCT_RATIO = "punct_ratio"
REASON_LOG_PROB = "log_prob"
REASON_SHORT_INPUT = "short_input"

ALL_REASONS = (REASON_CPS_HIGH, REASON_CPS_LOW, REASON_PUNCT_RATIO,
               REASON_LOG_PROB, REASON_SHORT_INPUT)


@dataclass(frozen=True)
class DetectionVerdict:
    """Outcome of screening one hypothesis."""

    flagged: bool
    reasons: frozenset[str]
    cps: float
    punct_ratio: float

    def __post_init__(self):
        object.__setattr__(self, "reasons", frozenset(self.reasons))
        if self.flagged != bool(self.reasons):
            raise ValueError("flagged must hold exactly when reasons are present")


def chars_per_second(text: str, duration: float) -> float:
    """Non-whitespace characters per second of input audio."""
    if duration <= 0:
        raise ValueError(f"duration must be > 0, got {duration}")
    count = sum(1 for ch in text if not ch.isspace())
    return count / duration


def punctuation_word_ratio(text: str) -> float:
    """Punctuation characters divided by whitespace-separated words."""
    words = text.split()
    if not words:
        return 0.0
    punct = sum(1 for ch in text if ch in PUNCTUATION_CHARS)
    return punct / len(words)


def detect(hyp: Hypothesis, span_duration: float, config: SessionConfig) -> DetectionVerdict:
    """Screen a hypothesis produced from `span_duration` seconds of audio.

    Silence is not hallucination: an empty hypothesis never trips the CPS
    band. The short-input reason only joins when another signal fired.
    """
    text = hyp.text
    cps = chars_per_second(text, span_duration)
    ratio = punctuation_word_ratio(text)
    reasons = set()
    if cps > config.cps_max:
        reasons.add(REASON_CPS_HIGH)
    if 0 < cps < config.cps_min:
        reasons.add(REASON_CPS_LOW)
    if ratio > config.punct_ratio_max:
        reasons.add(REASON_PUNCT_RATIO)
    if config.log_prob_threshold is not None and hyp.avg_log_prob < config.log_prob_threshold:
        reasons.add(REASON_LOG_PROB)
    if reasons and span_duration <= SHORT_INPUT_SECONDS:
        reasons.add(REASON_SHORT_INPUT)
    return DetectionVerdict(bool(reasons), frozenset(reasons), cps, ratio)


def hallucination_indicator(i: int, h: AlignmentSet) -> int:
    """1 if target token i has no aligned source token in h, else 0."""
    if i < 1:
        raise ValueError(f"target index is 1-based, got {i}")
    for _, target in h.pairs:
        if target == i:
            return 0
    return 1


def hallucination_rate(output_len: int, h: AlignmentSet) -> float:
    """Fraction of the first `output_len` target tokens left unaligned by h."""
    if output_len < 1:
        raise ValueError("hallucination rate is undefined for empty output")
    unaligned = sum(hallucination_indicator(i, h) for i in range(1, output_len + 1))
    return unaligned / output_len
