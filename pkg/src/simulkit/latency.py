"""Latency metrics over committed-output sessions.

Conventions shared by all lagging-style metrics: the source is treated as
source_token_count equal-duration units, so one source unit lasts
source_duration / source_token_count seconds. Ideal-diagonal offsets are
computed in source units and scaled to seconds by that unit, which keeps
every metric comparable with wall-clock commit times. Negative values are
reported as-is, never clamped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class LatencyInput:
    """Everything the latency suite consumes, extracted from one session."""

    commit_times: tuple[float, ...]
    source_token_count: int
    source_duration: float
    reference_target_count: Optional[int] = None
    segment_durations_source: tuple[float, ...] = ()
    segment_durations_target: tuple[float, ...] = ()
    processing_total: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "commit_times", tuple(self.commit_times))
        object.__setattr__(self, "segment_durations_source",
                           tuple(self.segment_durations_source))
        object.__setattr__(self, "segment_durations_target",
                           tuple(self.segment_durations_target))
        times = self.commit_times
        if any(a > b for a, b in zip(times, times[1:])):
            raise ValueError("commit_times must be non-decreasing")
        if self.source_token_count < 1:
            raise ValueError(f"source_token_count must be >= 1, got {self.source_token_count}")
        if self.reference_target_count is not None and self.reference_target_count < 1:
            raise ValueError("reference_target_count must be >= 1 when given")
        if self.source_duration < 0:
            raise ValueError("source_duration must be >= 0")
        if any(d < 0 for d in self.segment_durations_source + self.segment_durations_target):
            raise ValueError("segment durations must be >= 0")
        if self.processing_total < 0:
            raise ValueError("processing_total must be >= 0")

    @property
    def target_token_count(self) -> int:
        return len(self.commit_times)


def _source_unit(inp: LatencyInput) -> float:
    if inp.source_duration <= 0:
        raise ValueError("source_duration must be > 0 for lagging metrics")
    return inp.source_duration / inp.source_token_count


def _lagging(commit_times: Sequence[float], ratio: float, unit: float) -> float:
    times = np.asarray(commit_times, dtype=np.float64)
    offsets = (np.arange(times.shape[0], dtype=np.float64) / ratio) * unit
    return float(np.mean(times - offsets))


def average_lagging(inp: LatencyInput) -> float:
    """Mean delay of each committed token behind its ideal diagonal position."""
    if not inp.commit_times:
        raise ValueError("average lagging is undefined without commits")
    unit = _source_unit(inp)
    ratio = inp.target_token_count / inp.source_token_count
    return _lagging(inp.commit_times, ratio, unit)


def differentiable_average_lagging(inp: LatencyInput,
                                   read_counts: Sequence[float]) -> float:
    """Lagging with the read distribution collapsed onto the observed reads.

    read_counts[t] is the number of source units consumed when target step t
    was emitted; the read time for step t is read_counts[t] source units.
    """
    reads = np.asarray(read_counts, dtype=np.float64)
    if reads.shape[0] != inp.target_token_count:
        raise ValueError(
            f"read_counts has {reads.shape[0]} entries for {inp.target_token_count} commits")
    if reads.shape[0] == 0:
        raise ValueError("differentiable average lagging is undefined without commits")
    unit = _source_unit(inp)
    ratio = inp.target_token_count / inp.source_token_count
    terms = reads * unit - ((reads - 1.0) / ratio) * unit
    return float(np.mean(terms))


def average_proportion(inp: LatencyInput) -> float:
    """Ratio of summed target segment durations to summed source durations."""
    if not inp.segment_durations_source or not inp.segment_durations_target:
        raise ValueError("average proportion requires both segment duration lists")
    source = float(np.sum(inp.segment_durations_source))
    if source <= 0:
        raise ValueError("total source segment duration must be > 0")
    return float(np.sum(inp.segment_durations_target)) / source


def average_target_delay(inp: LatencyInput,
                         expected_times: Optional[Sequence[float]] = None) -> float:
    """Mean of commit time minus expected time per token.

    Without explicit expectations, token i (1-based) is expected at
    (i / target_count) * source_duration: linear interpolation across the
    source audio.
    """
    count = inp.target_token_count
    if count == 0:
        raise ValueError("average target delay is undefined without commits")
    if expected_times is None:
        expected = (np.arange(1, count + 1, dtype=np.float64) / count) * inp.source_duration
    else:
        expected = np.asarray(expected_times, dtype=np.float64)
        if expected.shape[0] != count:
            raise ValueError(
                f"expected_times has {expected.shape[0]} entries for {count} commits")
    times = np.asarray(inp.commit_times, dtype=np.float64)
    return float(np.mean(times - expected))


def length_adaptive_al(inp: LatencyInput) -> float:
    """Average lagging with the length ratio adapted to over-generation.

    The ratio becomes max(output_count, reference_count) / source_count, so
    well-length-matched output reduces to plain average lagging while
    over-generation is not rewarded with shrinking offsets.
    """
    if not inp.commit_times:
        raise ValueError("length-adaptive lagging is undefined without commits")
    if inp.reference_target_count is None:
        raise ValueError("length-adaptive lagging requires reference_target_count")
    unit = _source_unit(inp)
    ratio = max(inp.target_token_count, inp.reference_target_count) / inp.source_token_count
    return _lagging(inp.commit_times, ratio, unit)


def real_time_factor(processing: float, audio: float) -> float:
    """Total compute time divided by audio duration; < 1 is faster than real time."""
    if audio <= 0:
        raise ValueError(f"audio duration must be > 0, got {audio}")
    return processing / audio
