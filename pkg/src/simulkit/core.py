"""Core domain types shared across the toolkit.

Time lives on a frame grid: positions are integer frame counts and are
converted to seconds by a single multiplication with the frame interval.
That keeps long sessions free of accumulated float drift. All types here
are immutable value objects and safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

DEFAULT_FRAME_INTERVAL = 0.35


@dataclass(frozen=True)
class FrameTimeline:
    """The frame grid of one session: frame k starts at origin + k * interval."""

    total_frames: int
    frame_interval: float = DEFAULT_FRAME_INTERVAL
    origin: float = 0.0

    def __post_init__(self):
        if self.frame_interval <= 0:
            raise ValueError(f"frame_interval must be > 0, got {self.frame_interval}")
        if self.total_frames < 0:
            raise ValueError(f"total_frames must be >= 0, got {self.total_frames}")

    def time_of(self, frame: int) -> float:
        """Wall-clock second of frame boundary `frame` (0 <= frame <= total)."""
        if not 0 <= frame <= self.total_frames:
            raise ValueError(f"frame {frame} outside timeline of {self.total_frames} frames")
        return self.origin + frame * self.frame_interval

    def frame_at(self, time: float) -> int:
        """Inverse of time_of for on-grid times (rounds to nearest boundary)."""
        frame = round((time - self.origin) / self.frame_interval)
        if not 0 <= frame <= self.total_frames:
            raise ValueError(f"time {time} outside timeline")
        return frame

    @property
    def duration(self) -> float:
        return self.total_frames * self.frame_interval


@dataclass(frozen=True)
class ChunkSpan:
    """Half-open interval [start_frame, end_frame) on the frame grid."""

    start_frame: int
    end_frame: int

    def __post_init__(self):
        if self.start_frame < 0:
            raise ValueError(f"start_frame must be >= 0, got {self.start_frame}")
        if self.start_frame >= self.end_frame:
            raise ValueError(
                f"empty or inverted span [{self.start_frame}, {self.end_frame})")

    @property
    def frames(self) -> int:
        return self.end_frame - self.start_frame


def span_duration(span: ChunkSpan, timeline: FrameTimeline) -> float:
    """Duration of `span` in seconds: (end - start) * frame_interval."""
    if span.end_frame > timeline.total_frames:
        raise ValueError(
            f"span [{span.start_frame}, {span.end_frame}) exceeds timeline of "
            f"{timeline.total_frames} frames")
    return span.frames * timeline.frame_interval


@dataclass(frozen=True)
class Token:
    """One output word. Text is trimmed and may not contain whitespace."""

    text: str
    log_prob: Optional[float] = None

    def __post_init__(self):
        trimmed = self.text.strip()
        if not trimmed:
            raise ValueError("token text is empty")
        if any(ch.isspace() for ch in trimmed):
            raise ValueError(f"token text contains whitespace: {self.text!r}")
        object.__setattr__(self, "text", trimmed)
        if self.log_prob is not None:
            if math.isnan(self.log_prob) or self.log_prob > 0:
                raise ValueError(f"log_prob must be <= 0, got {self.log_prob}")


def concat_text(tokens: Iterable[Token]) -> str:
    """Join token texts with single spaces; empty input gives ''."""
    return " ".join(t.text for t in tokens)


@dataclass(frozen=True)
class Hypothesis:
    """One recognizer hypothesis: ordered tokens plus its average log-prob."""

    tokens: tuple[Token, ...]
    avg_log_prob: float

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if math.isnan(self.avg_log_prob) or self.avg_log_prob > 0:
            raise ValueError(f"avg_log_prob must be <= 0, got {self.avg_log_prob}")
        probs = [t.log_prob for t in self.tokens]
        if probs and all(p is not None for p in probs):
            mean = sum(probs) / len(probs)
            if abs(mean - self.avg_log_prob) > 1e-9:
                raise ValueError(
                    f"avg_log_prob {self.avg_log_prob} does not match token mean {mean}")

    @classmethod
    def from_tokens(cls, tokens: Iterable[Token]) -> "Hypothesis":
        """Build a hypothesis whose average is the mean of the token log-probs."""
        toks = tuple(tokens)
        probs = [t.log_prob for t in toks]
        if not toks:
            return cls((), 0.0)
        if any(p is None for p in probs):
            raise ValueError("from_tokens requires a log_prob on every token")
        return cls(toks, sum(probs) / len(probs))

    @property
    def text(self) -> str:
        return concat_text(self.tokens)

    def token_texts(self) -> tuple[str, ...]:
        return tuple(t.text for t in self.tokens)


@dataclass(frozen=True)
class BeamSet:
    """Recognizer response: hypotheses sorted best-first, plus compute latency."""

    hypotheses: tuple[Hypothesis, ...]
    processing_latency: float

    def __post_init__(self):
        object.__setattr__(self, "hypotheses", tuple(self.hypotheses))
        if not self.hypotheses:
            raise ValueError("beam must contain at least one hypothesis")
        if self.processing_latency < 0:
            raise ValueError(f"processing_latency must be >= 0, got {self.processing_latency}")
        scores = [h.avg_log_prob for h in self.hypotheses]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValueError("hypotheses must be sorted non-increasing by avg_log_prob")

    @property
    def best(self) -> Hypothesis:
        return self.hypotheses[0]


@dataclass(frozen=True)
class CommitEvent:
    """One token irrevocably appended to the output stream."""

    token: Token
    commit_time: float
    source_span: ChunkSpan
    forced: bool = False

    def validate_against(self, timeline: FrameTimeline) -> None:
        """Commits cannot precede the end of the audio that produced them."""
        earliest = timeline.time_of(self.source_span.end_frame)
        if self.commit_time < earliest - 1e-9:
            raise ValueError(
                f"commit at {self.commit_time}s precedes source span end {earliest}s")


@dataclass(frozen=True)
class CommitLog:
    """Append-only commit stream with non-decreasing commit times."""

    events: tuple[CommitEvent, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        times = [e.commit_time for e in self.events]
        if any(a > b for a, b in zip(times, times[1:])):
            raise ValueError("commit times must be non-decreasing")

    def append(self, event: CommitEvent) -> "CommitLog":
        if self.events and event.commit_time < self.events[-1].commit_time:
            raise ValueError(
                f"commit at {event.commit_time}s precedes last commit at "
                f"{self.events[-1].commit_time}s")
        return CommitLog(self.events + (event,))

    @property
    def tokens(self) -> tuple[Token, ...]:
        return tuple(e.token for e in self.events)

    @property
    def commit_times(self) -> tuple[float, ...]:
        return tuple(e.commit_time for e in self.events)

    @property
    def text(self) -> str:
        return concat_text(self.tokens)

    def __len__(self) -> int:
        return len(self.events)


@dataclass(frozen=True)
class AlignmentSet:
    """Set of (source_index, target_index) pairs, both 1-indexed."""

    pairs: frozenset[tuple[int, int]]

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset(self.pairs))
        for j, i in self.pairs:
            if j < 1 or i < 1:
                raise ValueError(f"alignment indices are 1-based, got ({j}, {i})")

    @classmethod
    def of(cls, *pairs: tuple[int, int]) -> "AlignmentSet":
        return cls(frozenset(pairs))

    def aligned_targets(self) -> frozenset[int]:
        return frozenset(i for _, i in self.pairs)


_POLICY_KINDS = ("hold", "la", "sp")


@dataclass(frozen=True)
class PolicySpec:
    """Which prefix-commitment strategy a session runs, and its window n."""

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in _POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}, expected one of {_POLICY_KINDS}")
        if self.kind == "hold":
            if self.n < 0:
                raise ValueError("hold-n requires n >= 0")
        elif self.n < 1:
            raise ValueError(f"{self.kind}-n requires n >= 1")

    @classmethod
    def parse(cls, text: str) -> "PolicySpec":
        """Parse forms like 'la-2', 'HOLD_0' or 'sp 1'."""
        norm = text.strip().lower().replace("_", "-").replace(" ", "-")
        kind, _, num = norm.partition("-")
        if kind not in _POLICY_KINDS or not num:
            raise ValueError(f"cannot parse policy {text!r} (expected e.g. 'la-2')")
        try:
            n = int(num)
        except ValueError:
            raise ValueError(f"policy window in {text!r} is not an integer") from None
        return cls(kind, n)

    def __str__(self) -> str:
        return f"{self.kind}-{self.n}"


@dataclass(frozen=True)
class SessionConfig:
    """Every tunable of a streaming session."""

    min_duration_threshold: float = 0.7
    max_uncommitted_duration: float = 1.7
    lookback_delta: float = 0.1
    lookback_enabled: bool = True
    policy: PolicySpec = field(default=PolicySpec("la", 2))
    chunk_interval: float = DEFAULT_FRAME_INTERVAL
    log_prob_threshold: Optional[float] = None
    cps_max: float = 30.0
    cps_min: float = 2.0
    punct_ratio_max: float = 0.5
    glossary: tuple[str, ...] = ()
    glossary_alpha: float = 0.9

    def __post_init__(self):
        object.__setattr__(self, "glossary", tuple(self.glossary))
        if self.chunk_interval <= 0:
            raise ValueError("chunk_interval must be > 0")
        if self.min_duration_threshold < self.chunk_interval:
            raise ValueError(
                f"min_duration_threshold {self.min_duration_threshold} must be >= "
                f"chunk_interval {self.chunk_interval}")
        if self.max_uncommitted_duration <= self.min_duration_threshold:
            raise ValueError(
                f"max_uncommitted_duration {self.max_uncommitted_duration} must exceed "
                f"min_duration_threshold {self.min_duration_threshold}")
        if self.lookback_delta < 0:
            raise ValueError("lookback_delta must be >= 0")
        if not 0 < self.glossary_alpha < 1:
            raise ValueError(f"glossary_alpha must be in (0, 1), got {self.glossary_alpha}")
        if self.cps_max <= 0 or self.cps_min < 0:
            raise ValueError("cps bounds must be positive")
        if self.punct_ratio_max < 0:
            raise ValueError("punct_ratio_max must be >= 0")
