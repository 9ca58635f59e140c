"""Virtual-time streaming session engine.

The session is a single-threaded state machine over a virtual clock:
recognizer latency blocks the loop while frames keep arriving by
timestamp, which reproduces how a latency spike snowballs into lag in a
live pipeline. Runs are fully deterministic given (feed, config, backend).

The duration gate compares whole frames, so a threshold equal to k chunk
intervals admits exactly k frames regardless of float rounding.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Optional

from .backends import RecognizerRequest
from .core import (
    BeamSet,
    ChunkSpan,
    CommitEvent,
    CommitLog,
    DEFAULT_FRAME_INTERVAL,
    FrameTimeline,
    Hypothesis,
    PolicySpec,
    SessionConfig,
    Token,
    span_duration,
)
from .hallucination import DetectionVerdict, detect
from .policies import PolicyState, clip_to_committed, hold_n, la_n, sp_n

_EPS = 1e-9


@dataclass(frozen=True)
class FrameFeed:
    """Arrival schedule of audio frames; arrivals[k] is when frame k exists.

    A frame cannot arrive before its audio has been spoken, so arrivals
    must be at or after the frame's nominal end time.
    """

    frame_interval: float
    arrivals: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "arrivals", tuple(self.arrivals))
        if self.frame_interval <= 0:
            raise ValueError("frame_interval must be > 0")
        times = self.arrivals
        if any(a > b for a, b in zip(times, times[1:])):
            raise ValueError("frame arrivals must be non-decreasing")
        for k, t in enumerate(times):
            if t < (k + 1) * self.frame_interval - _EPS:
                raise ValueError(
                    f"frame {k} arrives at {t}s, before its audio ends at "
                    f"{(k + 1) * self.frame_interval}s")

    @classmethod
    def regular(cls, total_frames: int,
                frame_interval: float = DEFAULT_FRAME_INTERVAL) -> "FrameFeed":
        """Real-time feed: frame k arrives the moment its audio completes."""
        return cls(frame_interval,
                   tuple((k + 1) * frame_interval for k in range(total_frames)))

    def frames_arrived_by(self, time: float) -> int:
        return bisect_right(self.arrivals, time)

    def timeline(self) -> FrameTimeline:
        return FrameTimeline(len(self.arrivals), self.frame_interval)


def load_feed(path) -> FrameFeed:
    """Parse a feed file: a frame_interval_s header, then a frame count or
    one arrival timestamp per line."""
    interval = None
    frames = None
    arrivals: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            where = f"{path}:{lineno}"
            if "=" in line:
                key, _, value = line.partition("=")
                key = key.strip().lower()
                try:
                    if key == "frame_interval_s":
                        interval = float(value)
                    elif key == "frames":
                        frames = int(value)
                    else:
                        raise ValueError(f"{where}: unknown feed key {key!r}")
                except ValueError as exc:
                    raise ValueError(f"{where}: {exc}") from None
            else:
                try:
                    arrivals.append(float(line))
                except ValueError:
                    raise ValueError(f"{where}: expected a timestamp, got {line!r}") from None
    if interval is None:
        raise ValueError(f"{path}: missing frame_interval_s header")
    if frames is not None and arrivals:
        raise ValueError(f"{path}: give either frames=N or explicit arrivals, not both")
    if frames is not None:
        return FrameFeed.regular(frames, interval)
    return FrameFeed(interval, tuple(arrivals))


def lookback_extend(span: ChunkSpan, previous_duration: float, delta: float,
                    timeline: FrameTimeline) -> ChunkSpan:
    """Extend a span backwards by the previous chunk duration plus delta.

    The extension is rounded to whole frames and clamped at the timeline
    origin; the end never moves.
    """
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    back = round((previous_duration + delta) / timeline.frame_interval)
    start = max(0, span.start_frame - back)
    return ChunkSpan(start, span.end_frame)


@dataclass
class SessionState:
    """Mutable state of one running session."""

    clock: float = 0.0
    frames_available: int = 0
    processed_upto: int = 0
    committed: tuple[Token, ...] = ()
    pending_best: Optional[Hypothesis] = None
    last_request_span: Optional[ChunkSpan] = None
    last_span_duration: float = 0.0
    last_processing_latency: float = 0.0
    uncommitted_since: Optional[float] = None
    policy_state: PolicyState = field(default_factory=lambda: PolicyState(1))
    event_log: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class StepSample:
    """Diagnostic snapshot taken at the end of each step."""

    clock: float
    uncommitted_since: Optional[float]
    last_processing_latency: float


@dataclass(frozen=True)
class StepOutcome:
    """Everything one step produced."""

    events: tuple[CommitEvent, ...]
    request: Optional[RecognizerRequest]
    beam: Optional[BeamSet]
    verdict: Optional[DetectionVerdict]
    forced_batch: bool
    suppressed_identical: bool
    sample: StepSample


@dataclass(frozen=True)
class SessionResult:
    """Full record of one session run."""

    commit_log: CommitLog
    requests: tuple[tuple[RecognizerRequest, BeamSet], ...]
    detections: tuple[DetectionVerdict, ...]
    forced_commits: int
    total_processing: float
    step_samples: tuple[StepSample, ...]
    timeline: FrameTimeline

    @property
    def committed_text(self) -> str:
        return self.commit_log.text

    @property
    def flagged_count(self) -> int:
        return sum(1 for v in self.detections if v.flagged)


def _policy_prefix(policy: PolicySpec, best: Hypothesis,
                   state: PolicyState) -> tuple[Token, ...]:
    if policy.kind == "hold":
        return hold_n(best, policy.n)
    if policy.kind == "la":
        return la_n(state)
    return sp_n(state)


def _needed_frames(config: SessionConfig, frame_interval: float) -> int:
    return max(1, math.ceil(config.min_duration_threshold / frame_interval - _EPS))


def step(state: SessionState, config: SessionConfig, backend, feed: FrameFeed,
         now: float, flush: bool = False) -> StepOutcome:
    """Advance the session to `now`: ingest, maybe recognize, maybe commit.

    In order: frames arrived by `now` are ingested; if the unprocessed
    audio meets the duration threshold (always, when flushing) the span is
    extended by lookback and sent to the recognizer unless it is identical
    to the previous request; a flagged response is logged and discarded,
    an accepted one feeds the policy, and any policy output extending the
    committed text is emitted. If the step committed nothing and the
    uncommitted timer breached its bound, the best pending extension is
    force-committed and the timer rearmed either way.
    """
    if now < state.clock - _EPS:
        raise ValueError(f"now={now} precedes session clock {state.clock}")
    timeline = feed.timeline()
    state.clock = max(state.clock, now)
    state.frames_available = feed.frames_arrived_by(state.clock)
    if state.uncommitted_since is None and state.frames_available > state.processed_upto:
        state.uncommitted_since = feed.arrivals[state.processed_upto]

    events: list[CommitEvent] = []
    request = None
    beam = None
    verdict = None
    suppressed = False

    unprocessed = state.frames_available - state.processed_upto
    eligible = unprocessed >= (1 if flush else _needed_frames(config, feed.frame_interval))
    if eligible:
        span = ChunkSpan(state.processed_upto, state.frames_available)
        lookback_applied = False
        if config.lookback_enabled:
            extended = lookback_extend(span, state.last_span_duration,
                                       config.lookback_delta, timeline)
            lookback_applied = extended != span
            span = extended
        if span == state.last_request_span:
            suppressed = True
            state.event_log.append(
                f"suppressed identical request [{span.start_frame},{span.end_frame})")
        else:
            request = RecognizerRequest(span, lookback_applied, state.clock)
            try:
                beam = backend.recognize(request)
            except Exception as exc:
                # keep the original type so callers can still classify it
                exc.args = (f"recognizer failed at t={state.clock:.3f}s for span "
                            f"[{span.start_frame},{span.end_frame}): {exc}",)
                raise
            state.clock += beam.processing_latency
            state.last_processing_latency = beam.processing_latency
            duration = span_duration(span, timeline)
            state.last_span_duration = duration
            state.last_request_span = span
            state.processed_upto = span.end_frame
            verdict = detect(beam.best, duration, config)
            if verdict.flagged:
                state.event_log.append(
                    f"discarded flagged beam ({', '.join(sorted(verdict.reasons))})")
            else:
                state.pending_best = beam.best
                state.policy_state = state.policy_state.push(beam)
                candidate = _policy_prefix(config.policy, beam.best, state.policy_state)
                fresh = clip_to_committed(candidate, state.committed)
                for token in fresh:
                    event = CommitEvent(token, state.clock, span, forced=False)
                    event.validate_against(timeline)
                    events.append(event)

    forced_batch = False
    if events:
        state.committed += tuple(e.token for e in events)
        state.uncommitted_since = state.clock
    elif (state.uncommitted_since is not None
          and state.clock - state.uncommitted_since > config.max_uncommitted_duration):
        extension: tuple[Token, ...] = ()
        if state.pending_best is not None:
            extension = clip_to_committed(state.pending_best.tokens, state.committed)
        if extension:
            for token in extension:
                event = CommitEvent(token, state.clock, state.last_request_span, forced=True)
                event.validate_against(timeline)
                events.append(event)
            state.committed += extension
            forced_batch = True
        else:
            state.event_log.append("uncommitted bound breached with nothing to emit")
        # deadline serviced either way, otherwise the timer could never clear
        state.uncommitted_since = state.clock

    sample = StepSample(state.clock, state.uncommitted_since,
                        state.last_processing_latency)
    return StepOutcome(tuple(events), request, beam, verdict, forced_batch,
                       suppressed, sample)


def run_session(feed: FrameFeed, config: SessionConfig, backend) -> SessionResult:
    """Drive steps until the feed is exhausted, then flush the residue.

    The flush issues one final recognizer call over whatever audio remains
    below the duration threshold, then force-commits the stable remainder
    of the last accepted hypothesis so short tails are never dropped.
    """
    if abs(feed.frame_interval - config.chunk_interval) > _EPS:
        raise ValueError(
            f"feed frame interval {feed.frame_interval} does not match "
            f"config chunk_interval {config.chunk_interval}")
    timeline = feed.timeline()
    total = timeline.total_frames
    state = SessionState(policy_state=PolicyState(max(1, config.policy.n)))
    all_events: list[CommitEvent] = []
    requests: list[tuple[RecognizerRequest, BeamSet]] = []
    detections: list[DetectionVerdict] = []
    samples: list[StepSample] = []
    forced_batches = 0
    total_processing = 0.0
    needed = _needed_frames(config, feed.frame_interval)

    def collect(outcome: StepOutcome) -> None:
        nonlocal forced_batches, total_processing
        all_events.extend(outcome.events)
        if outcome.request is not None:
            requests.append((outcome.request, outcome.beam))
            total_processing += outcome.beam.processing_latency
        if outcome.verdict is not None:
            detections.append(outcome.verdict)
        if outcome.forced_batch:
            forced_batches += 1
        samples.append(outcome.sample)

    while True:
        avail = feed.frames_arrived_by(state.clock)
        if avail - state.processed_upto >= needed:
            now = state.clock
        else:
            idx = state.processed_upto + needed - 1
            if idx >= total:
                break
            now = feed.arrivals[idx]
            if state.uncommitted_since is not None:
                deadline = (state.uncommitted_since + config.max_uncommitted_duration
                            + _EPS)
                now = min(now, max(deadline, state.clock))
            now = max(now, state.clock)
        before = (state.clock, state.processed_upto, len(all_events),
                  state.uncommitted_since)
        collect(step(state, config, backend, feed, now))
        after = (state.clock, state.processed_upto, len(all_events),
                 state.uncommitted_since)
        if after == before:
            # nothing can happen at this instant; jump to the next arrival
            avail = feed.frames_arrived_by(state.clock)
            if avail < total:
                state.clock = max(state.clock, feed.arrivals[avail])
            else:
                break

    if state.processed_upto < total:
        state.clock = max(state.clock, feed.arrivals[-1])
        collect(step(state, config, backend, feed, state.clock, flush=True))

    if state.pending_best is not None:
        tail = clip_to_committed(state.pending_best.tokens, state.committed)
        if tail:
            span = state.last_request_span
            for token in tail:
                event = CommitEvent(token, state.clock, span, forced=True)
                event.validate_against(timeline)
                all_events.append(event)
            state.committed += tail
            forced_batches += 1
            state.uncommitted_since = state.clock
            samples.append(StepSample(state.clock, state.uncommitted_since,
                                      state.last_processing_latency))

    return SessionResult(
        commit_log=CommitLog(tuple(all_events)),
        requests=tuple(requests),
        detections=tuple(detections),
        forced_commits=forced_batches,
        total_processing=total_processing,
        step_samples=tuple(samples),
        timeline=timeline,
    )
