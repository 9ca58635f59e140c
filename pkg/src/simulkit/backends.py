"""Recognizer backends: deterministic trace replay and a synthetic model.

Both backends answer identical spans identically, bit for bit. The
synthetic model is seeded and keys its pseudo-randomness on the requested
span, so call order never changes an answer.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import (
    BeamSet,
    ChunkSpan,
    DEFAULT_FRAME_INTERVAL,
    Hypothesis,
    Token,
)

# Log-prob attached to non-hallucinated synthetic tokens. Kept below the
# hallucination default on purpose: fabricated output scoring higher than
# honest output is exactly the failure mode log-prob thresholds miss.
SCRIPT_TOKEN_LOG_PROB = -0.2


@dataclass(frozen=True)
class RecognizerRequest:
    """One recognizer call: which span to read and when it was issued."""

    span: ChunkSpan
    lookback_applied: bool = False
    wall_time: float = 0.0


@dataclass(frozen=True)
class TraceRecord:
    """A recorded recognizer answer for one exact span."""

    span: ChunkSpan
    beam: BeamSet


class TraceLoadError(ValueError):
    """A trace or script file failed to parse; message carries the line."""


class MissingTraceRecordError(LookupError):
    """The trace holds no record for the requested span."""

    def __init__(self, span: ChunkSpan):
        super().__init__(
            f"no trace record for span [{span.start_frame}, {span.end_frame})")
        self.span = span


@dataclass(frozen=True)
class SyntheticModelConfig:
    """Behavioral knobs of the synthetic recognizer.

    Defaults reproduce the observed failure profile: sub-threshold input
    spans yield a canned, confidently scored fabrication and a latency
    spike; everything else answers in roughly constant time.
    """

    base_latency: float = 0.15
    hallucination_latency: float = 1.882
    hallucination_threshold: float = 0.7
    hallucination_prob: float = 1.0
    canned_outputs: tuple[str, ...] = (
        "Thanks for watching.",
        "Thank you for watching. Have a great day.",
    )
    hallucination_avg_log_prob: float = -0.15
    seed: int = 0
    latency_jitter: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "canned_outputs", tuple(self.canned_outputs))
        if self.base_latency < 0 or self.hallucination_latency < 0:
            raise ValueError("latencies must be >= 0")
        if not 0 <= self.hallucination_prob <= 1:
            raise ValueError(f"hallucination_prob must be in [0, 1], got {self.hallucination_prob}")
        if self.hallucination_threshold < 0:
            raise ValueError("hallucination_threshold must be >= 0")
        if not self.canned_outputs:
            raise ValueError("canned_outputs must not be empty")
        if self.hallucination_avg_log_prob > 0:
            raise ValueError("hallucination_avg_log_prob must be <= 0")
        if self.latency_jitter < 0:
            raise ValueError("latency_jitter must be >= 0")


@dataclass(frozen=True)
class ScriptWord:
    """One ground-truth word with the second its audio ends."""

    end_time: float
    text: str
    latency_override: Optional[float] = None


def _span_hash(seed: int, salt: str, span: ChunkSpan) -> int:
    digest = hashlib.blake2b(
        f"{seed}:{salt}:{span.start_frame}:{span.end_frame}".encode(),
        digest_size=8).digest()
    return int.from_bytes(digest, "big")


class TraceBackend:
    """Replays recorded beams; exact span lookup, never fabricates."""

    def __init__(self, records: Sequence[TraceRecord],
                 frame_interval: float = DEFAULT_FRAME_INTERVAL):
        self.frame_interval = frame_interval
        self._records: dict[tuple[int, int], TraceRecord] = {}
        for record in records:
            key = (record.span.start_frame, record.span.end_frame)
            if key in self._records:
                raise ValueError(
                    f"duplicate trace record for span [{key[0]}, {key[1]})")
            self._records[key] = record

    def recognize(self, request: RecognizerRequest) -> BeamSet:
        key = (request.span.start_frame, request.span.end_frame)
        record = self._records.get(key)
        if record is None:
            raise MissingTraceRecordError(request.span)
        return record.beam

    @property
    def spans(self) -> tuple[ChunkSpan, ...]:
        return tuple(r.span for r in self._records.values())

    @property
    def max_end_frame(self) -> int:
        return max((r.span.end_frame for r in self._records.values()), default=0)


class SyntheticBackend:
    """Scripted recognizer with a calibrated hallucination pathway.

    A span strictly shorter than the hallucination threshold rolls a
    span-keyed seeded coin; on a hit, the answer is one of the canned
    outputs with the configured high confidence and the latency spike.
    Otherwise the answer is the script words whose end time falls inside
    the span (exclusive of the start, inclusive of the end), at base
    latency, optionally raised by per-word overrides.
    """

    def __init__(self, script: Sequence[ScriptWord], config: SyntheticModelConfig,
                 frame_interval: float = DEFAULT_FRAME_INTERVAL):
        words = tuple(script)
        ends = [w.end_time for w in words]
        if any(a > b for a, b in zip(ends, ends[1:])):
            raise ValueError("script word end times must be non-decreasing")
        self.script = words
        self.config = config
        self.frame_interval = frame_interval

    def recognize(self, request: RecognizerRequest) -> BeamSet:
        span = request.span
        duration = span.frames * self.frame_interval
        cfg = self.config
        if duration < cfg.hallucination_threshold and cfg.hallucination_prob > 0:
            roll = _span_hash(cfg.seed, "fire", span) / float(2 ** 64)
            if roll < cfg.hallucination_prob:
                return self._hallucinate(span)
        return self._transcribe(span)

    def _hallucinate(self, span: ChunkSpan) -> BeamSet:
        cfg = self.config
        pick = _span_hash(cfg.seed, "pick", span) % len(cfg.canned_outputs)
        text = cfg.canned_outputs[pick]
        tokens = tuple(Token(w, cfg.hallucination_avg_log_prob) for w in text.split())
        hyp = Hypothesis(tokens, cfg.hallucination_avg_log_prob)
        return BeamSet((hyp,), cfg.hallucination_latency)

    def _transcribe(self, span: ChunkSpan) -> BeamSet:
        cfg = self.config
        start_s = span.start_frame * self.frame_interval
        end_s = span.end_frame * self.frame_interval
        words = [w for w in self.script if start_s < w.end_time <= end_s]
        tokens = tuple(Token(w.text, SCRIPT_TOKEN_LOG_PROB) for w in words)
        avg = SCRIPT_TOKEN_LOG_PROB if tokens else 0.0
        latency = cfg.base_latency
        for w in words:
            if w.latency_override is not None and w.latency_override > latency:
                latency = w.latency_override
        if cfg.latency_jitter > 0:
            roll = _span_hash(cfg.seed, "jitter", span) / float(2 ** 64)
            latency = max(0.0, latency + (2.0 * roll - 1.0) * cfg.latency_jitter)
        return BeamSet((Hypothesis(tokens, avg),), latency)

    @property
    def max_end_frame(self) -> int:
        if not self.script:
            return 0
        import math
        return math.ceil(self.script[-1].end_time / self.frame_interval - 1e-9)


def _parse_beam(obj: dict, where: str) -> BeamSet:
    try:
        hyps = []
        for hyp_obj in obj["beam"]:
            tokens = tuple(
                Token(t["text"], t.get("logprob"))
                for t in hyp_obj["tokens"]
            )
            hyps.append(Hypothesis(tokens, float(hyp_obj["avg_logprob"])))
        return BeamSet(tuple(hyps), float(obj["latency_s"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise TraceLoadError(f"{where}: bad beam record: {exc}") from exc


def _frame_of(seconds: float, frame_interval: float, where: str, field_name: str) -> int:
    frames = seconds / frame_interval
    nearest = round(frames)
    if abs(frames - nearest) > 1e-6:
        raise TraceLoadError(
            f"{where}: {field_name}={seconds} is not on the {frame_interval}s frame grid")
    return int(nearest)


def load_trace(path, frame_interval: float = DEFAULT_FRAME_INTERVAL) -> TraceBackend:
    """Load a line-delimited JSON trace keyed by exact spans.

    Each line holds start_s, end_s (on the frame grid), latency_s and a
    beam of hypotheses. Duplicate spans and off-grid times are rejected
    with the offending line number.
    """
    records = []
    seen: set[tuple[int, int]] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceLoadError(f"{where}: invalid JSON: {exc}") from exc
            start = _frame_of(float(obj.get("start_s", -1)), frame_interval, where, "start_s")
            end = _frame_of(float(obj.get("end_s", -1)), frame_interval, where, "end_s")
            try:
                span = ChunkSpan(start, end)
            except ValueError as exc:
                raise TraceLoadError(f"{where}: {exc}") from exc
            key = (span.start_frame, span.end_frame)
            if key in seen:
                raise TraceLoadError(f"{where}: duplicate record for span {key}")
            seen.add(key)
            records.append(TraceRecord(span, _parse_beam(obj, where)))
    return TraceBackend(records, frame_interval)


def load_script(path) -> tuple[ScriptWord, ...]:
    """Load a tab-separated script: end_time_s, word, optional latency override."""
    words = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            where = f"{path}:{lineno}"
            if len(parts) not in (2, 3):
                raise TraceLoadError(
                    f"{where}: expected 'end_time_s<TAB>word[<TAB>latency_s]', got {line!r}")
            try:
                end_time = float(parts[0])
                override = float(parts[2]) if len(parts) == 3 else None
            except ValueError as exc:
                raise TraceLoadError(f"{where}: {exc}") from exc
            text = parts[1].strip()
            if not text:
                raise TraceLoadError(f"{where}: empty word")
            words.append(ScriptWord(end_time, text, override))
    ends = [w.end_time for w in words]
    if any(a > b for a, b in zip(ends, ends[1:])):
        raise TraceLoadError(f"{path}: script word end times must be non-decreasing")
    return tuple(words)


def synthesize_script(script: Sequence[ScriptWord], config: SyntheticModelConfig,
                      frame_interval: float = DEFAULT_FRAME_INTERVAL) -> SyntheticBackend:
    """Build the synthetic backend for a timed ground-truth script."""
    return SyntheticBackend(script, config, frame_interval)
