"""Report assembly and every file format the CLI reads or writes.

Reports are flat key = value text grouped into sections: human-diffable,
trivially parseable, and byte-stable for identical inputs and seed. Floats
are written with repr so every value round-trips exactly.
"""

from __future__ import annotations

import csv
import difflib
import hashlib
import io
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .backends import (
    SyntheticModelConfig,
    load_script,
    load_trace,
    synthesize_script,
)
from .core import AlignmentSet, PolicySpec, SessionConfig
from .hallucination import ALL_REASONS, hallucination_rate
from .latency import (
    LatencyInput,
    average_lagging,
    average_proportion,
    average_target_delay,
    differentiable_average_lagging,
    length_adaptive_al,
    real_time_factor,
)
from .quality import (
    bleu,
    cer,
    edit_distance_chars,
    edit_distance_tokens,
    normalize_token,
    normalize_tokens,
    ngram_stats,
    proper_noun_max_sum,
    proper_noun_score,
    wer,
)
from .session import FrameFeed, SessionResult, load_feed, run_session

METRIC_KEYS = ("al_s", "dal_s", "laal_s", "atd_s", "ap", "hr", "wer", "cer",
               "bleu", "pn", "pn_raw_sum", "rtf")

_HIST_BUCKET = 0.1


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ---------------------------------------------------------------------------
# config files (keys follow the conventional parameter names)

_CONFIG_KEYS = ("MIN_DURATION_THRESHOLD", "MAX_UNCOMMITTED_DURATION",
                "LOOKBACK_DELTA", "LOOKBACK_ENABLED", "POLICY",
                "LOCAL_AGREEMENT", "CHUNKSIZE", "LOG_PROB_THRESHOLD",
                "CPS_MAX", "CPS_MIN", "PUNCT_RATIO_MAX", "GLOSSARY",
                "GLOSSARY_FILE", "GLOSSARY_SIZE", "GLOSSARY_ALPHA", "SEED")


def parse_config_text(text: str, base_dir: str = ".",
                      where: str = "<config>") -> tuple[SessionConfig, Optional[int]]:
    """Parse flat KEY = VALUE config text into a SessionConfig plus seed."""
    import os.path

    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{where}:{lineno}: expected KEY = VALUE, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().upper()
        if key not in _CONFIG_KEYS:
            raise ValueError(
                f"{where}:{lineno}: unknown config key {key!r}; "
                f"valid keys: {', '.join(_CONFIG_KEYS)}")
        values[key] = value.strip()

    def fnum(key, default):
        return float(values[key]) if key in values else default

    def fbool(key, default):
        if key not in values:
            return default
        return values[key].strip().lower() in {"1", "true", "yes", "on"}

    policy = PolicySpec("la", 2)
    if "POLICY" in values:
        policy = PolicySpec.parse(values["POLICY"])
    if "LOCAL_AGREEMENT" in values:
        policy = PolicySpec("la", int(values["LOCAL_AGREEMENT"]))

    log_prob = None
    if "LOG_PROB_THRESHOLD" in values and values["LOG_PROB_THRESHOLD"].lower() not in ("", "none"):
        log_prob = float(values["LOG_PROB_THRESHOLD"])

    glossary: tuple[str, ...] = ()
    if "GLOSSARY_FILE" in values and values["GLOSSARY_FILE"]:
        glossary = load_terms(os.path.join(base_dir, values["GLOSSARY_FILE"]))
    if "GLOSSARY" in values and values["GLOSSARY"]:
        glossary = tuple(t.strip() for t in values["GLOSSARY"].split("|") if t.strip())
    if "GLOSSARY_SIZE" in values:
        glossary = glossary[:int(values["GLOSSARY_SIZE"])]

    config = SessionConfig(
        min_duration_threshold=fnum("MIN_DURATION_THRESHOLD", 0.7),
        max_uncommitted_duration=fnum("MAX_UNCOMMITTED_DURATION", 1.7),
        lookback_delta=fnum("LOOKBACK_DELTA", 0.1),
        lookback_enabled=fbool("LOOKBACK_ENABLED", True),
        policy=policy,
        chunk_interval=fnum("CHUNKSIZE", 0.35),
        log_prob_threshold=log_prob,
        cps_max=fnum("CPS_MAX", 30.0),
        cps_min=fnum("CPS_MIN", 2.0),
        punct_ratio_max=fnum("PUNCT_RATIO_MAX", 0.5),
        glossary=glossary,
        glossary_alpha=fnum("GLOSSARY_ALPHA", 0.9),
    )
    seed = int(values["SEED"]) if "SEED" in values else None
    return config, seed


def parse_config_file(path) -> tuple[SessionConfig, Optional[int]]:
    import os.path
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_config_text(text, base_dir=os.path.dirname(str(path)) or ".",
                             where=str(path))


def config_snapshot_lines(config: SessionConfig, seed: int) -> list[str]:
    """Render a config (plus seed) in re-parseable config-file syntax."""
    return [
        f"MIN_DURATION_THRESHOLD = {_fmt(config.min_duration_threshold)}",
        f"MAX_UNCOMMITTED_DURATION = {_fmt(config.max_uncommitted_duration)}",
        f"LOOKBACK_DELTA = {_fmt(config.lookback_delta)}",
        f"LOOKBACK_ENABLED = {_fmt(config.lookback_enabled)}",
        f"POLICY = {config.policy}",
        f"CHUNKSIZE = {_fmt(config.chunk_interval)}",
        f"LOG_PROB_THRESHOLD = "
        + ("none" if config.log_prob_threshold is None else _fmt(config.log_prob_threshold)),
        f"CPS_MAX = {_fmt(config.cps_max)}",
        f"CPS_MIN = {_fmt(config.cps_min)}",
        f"PUNCT_RATIO_MAX = {_fmt(config.punct_ratio_max)}",
        f"GLOSSARY = {'|'.join(config.glossary)}".rstrip(),
        f"GLOSSARY_ALPHA = {_fmt(config.glossary_alpha)}",
        f"SEED = {seed}",
    ]


# ---------------------------------------------------------------------------
# small input files

def load_terms(path) -> tuple[str, ...]:
    """Term list: one term per line, '#' comments and blanks ignored."""
    terms = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if line and not line.startswith("#"):
                terms.append(line)
    return tuple(terms)


def load_alignment(path) -> AlignmentSet:
    """Alignment file: one 'source_index<TAB>target_index' pair per line, 1-based."""
    pairs = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'j<TAB>i', got {line!r}")
            try:
                pairs.add((int(parts[0]), int(parts[1])))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: indices must be integers") from None
    return AlignmentSet(frozenset(pairs))


def load_reference(path) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read().strip()


def derive_alignment(reference_words: Sequence[str],
                     output_tokens: Sequence[str]) -> AlignmentSet:
    """Monotone alignment from matching blocks of normalized exact matches.

    This stands in for an externally supplied alignment when the reference
    transcript is known; unmatched output tokens count as hallucinated.
    """
    ref_norm = [normalize_token(w) for w in reference_words]
    out_norm = [normalize_token(t) for t in output_tokens]
    matcher = difflib.SequenceMatcher(a=ref_norm, b=out_norm, autojunk=False)
    pairs = set()
    for block in matcher.get_matching_blocks():
        for k in range(block.size):
            pairs.add((block.a + k + 1, block.b + k + 1))
    return AlignmentSet(frozenset(pairs))


# ---------------------------------------------------------------------------
# metric report

@dataclass(frozen=True)
class MetricReport:
    """One session's scorecard plus enough provenance to rerun it."""

    session_id: str
    backend_spec: str
    seed: int
    config: SessionConfig
    commit_count: int
    forced_commits: int
    total_processing: float
    metrics: dict[str, float]
    detection_counts: dict[str, int]
    flagged_total: int
    latency_histogram: tuple[tuple[int, int], ...]
    provenance: tuple[str, ...]


def _session_id(backend_spec: str, seed: int, config: SessionConfig) -> str:
    payload = "\n".join([backend_spec, str(seed)] + config_snapshot_lines(config, seed))
    return hashlib.blake2b(payload.encode(), digest_size=6).hexdigest()


def _histogram(latencies: Sequence[float]) -> tuple[tuple[int, int], ...]:
    buckets: dict[int, int] = {}
    for lat in latencies:
        idx = int(lat / _HIST_BUCKET)
        buckets[idx] = buckets.get(idx, 0) + 1
    return tuple(sorted(buckets.items()))


def build_latency_input(result: SessionResult, source_token_count: int,
                        reference_target_count: Optional[int] = None) -> LatencyInput:
    """Extract the latency-metric inputs from one session result.

    Source segments are the new audio consumed per recognizer call
    (lookback overlap excluded); target segments give each call's committed
    tokens a duration proportional to one source unit, so the proportion
    metric reads as output-to-input length ratio on the time axis.
    """
    timeline = result.timeline
    events = result.commit_log.events
    duration = timeline.duration
    unit = duration / source_token_count if source_token_count else 0.0

    seg_source: list[float] = []
    seg_target: list[float] = []
    prev_end = 0
    for request, _ in result.requests:
        end = request.span.end_frame
        seg_source.append((end - prev_end) * timeline.frame_interval)
        count = sum(1 for e in events
                    if e.source_span == request.span)
        seg_target.append(count * unit)
        prev_end = max(prev_end, end)

    return LatencyInput(
        commit_times=result.commit_log.commit_times,
        source_token_count=source_token_count,
        source_duration=duration,
        reference_target_count=reference_target_count,
        segment_durations_source=tuple(seg_source),
        segment_durations_target=tuple(seg_target),
        processing_total=result.total_processing,
    )


def read_counts_for(result: SessionResult, source_token_count: int) -> tuple[float, ...]:
    """Source units consumed at each commit: the end of its source span."""
    timeline = result.timeline
    duration = timeline.duration
    if duration <= 0:
        return ()
    unit = duration / source_token_count
    return tuple(
        (e.source_span.end_frame * timeline.frame_interval) / unit
        for e in result.commit_log.events
    )


def compute_report(result: SessionResult, config: SessionConfig, backend_spec: str,
                   seed: int, reference_text: Optional[str] = None,
                   nouns: Optional[Sequence[str]] = None,
                   alignment: Optional[AlignmentSet] = None) -> MetricReport:
    """Score one session. Metrics whose inputs are missing are omitted, not zeroed."""
    timeline = result.timeline
    committed = [t.text for t in result.commit_log.tokens]
    ref_words = reference_text.split() if reference_text else None

    metrics: dict[str, float] = {}
    provenance = [
        "lagging_offsets = source_token_units_scaled_to_seconds",
        "dal_reads = observed_point_mass",
        "laal_ratio = max(output,reference)/source",
        "atd_expected = linear_interpolation_over_source",
        "ap_segments = per_call_new_audio_vs_token_proportional_output",
        "wer_normalization = casefold_strip_edge_punct",
        "bleu = uniform_weights,no_smoothing,corpus_pools_counts",
        "pn_aggregation = mean_over_nouns,raw_sum_alongside",
    ]

    source_count = len(ref_words) if ref_words else timeline.total_frames
    ref_count = len(ref_words) if ref_words else (len(committed) or None)

    if committed and timeline.duration > 0 and source_count >= 1:
        li = build_latency_input(result, source_count, ref_count)
        metrics["al_s"] = average_lagging(li)
        metrics["dal_s"] = differentiable_average_lagging(
            li, read_counts_for(result, source_count))
        metrics["laal_s"] = length_adaptive_al(li)
        metrics["atd_s"] = average_target_delay(li)
        if li.segment_durations_source and li.segment_durations_target:
            metrics["ap"] = average_proportion(li)
    if timeline.duration > 0:
        metrics["rtf"] = real_time_factor(result.total_processing, timeline.duration)

    effective_alignment = alignment
    alignment_source = "file" if alignment is not None else "absent"
    if effective_alignment is None and ref_words:
        effective_alignment = derive_alignment(ref_words, committed)
        alignment_source = "derived_sequence_match"
    provenance.append(f"hr_alignment = {alignment_source}")
    if effective_alignment is not None and committed:
        metrics["hr"] = hallucination_rate(len(committed), effective_alignment)

    if ref_words:
        metrics["wer"] = wer(ref_words, committed)
        metrics["cer"] = cer(reference_text, " ".join(committed))
        metrics["bleu"] = bleu(ref_words, committed)
    if nouns:
        metrics["pn"] = proper_noun_score(nouns, committed)
        metrics["pn_raw_sum"] = proper_noun_max_sum(nouns, committed)

    counts = {reason: 0 for reason in ALL_REASONS}
    for verdict in result.detections:
        for reason in verdict.reasons:
            counts[reason] += 1
    counts = {k: v for k, v in counts.items() if v}

    latencies = [beam.processing_latency for _, beam in result.requests]

    return MetricReport(
        session_id=_session_id(backend_spec, seed, config),
        backend_spec=backend_spec,
        seed=seed,
        config=config,
        commit_count=len(committed),
        forced_commits=result.forced_commits,
        total_processing=result.total_processing,
        metrics=metrics,
        detection_counts=counts,
        flagged_total=result.flagged_count,
        latency_histogram=_histogram(latencies),
        provenance=tuple(provenance),
    )


def render_report(report: MetricReport) -> str:
    lines = [
        "# simulkit session report",
        f"session_id = {report.session_id}",
        f"backend = {report.backend_spec}",
        f"seed = {report.seed}",
        f"commits = {report.commit_count}",
        f"forced_commits = {report.forced_commits}",
        f"total_processing_s = {_fmt(report.total_processing)}",
        "",
        "[config]",
        *config_snapshot_lines(report.config, report.seed),
        "",
        "[metrics]",
    ]
    for key in METRIC_KEYS:
        if key in report.metrics:
            lines.append(f"{key} = {_fmt(report.metrics[key])}")
    lines += ["", "[detections]", f"flagged_total = {report.flagged_total}"]
    for reason in ALL_REASONS:
        if reason in report.detection_counts:
            lines.append(f"{reason} = {report.detection_counts[reason]}")
    lines += ["", "[latency_histogram]"]
    for idx, count in report.latency_histogram:
        lo = idx * _HIST_BUCKET
        lines.append(f"{lo:.1f}-{lo + _HIST_BUCKET:.1f} = {count}")
    lines += ["", "[provenance]", *report.provenance, ""]
    return "\n".join(lines)


def parse_report(text: str) -> dict[str, dict[str, str]]:
    """Parse report text back into {section: {key: value}} (strings)."""
    sections: dict[str, dict[str, str]] = {"": {}}
    current = sections[""]
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = sections.setdefault(line[1:-1], {})
            continue
        key, _, value = line.partition("=")
        current[key.strip()] = value.strip()
    return sections


# ---------------------------------------------------------------------------
# commit-log dump

def render_commit_dump(result: SessionResult) -> str:
    lines = ["token\tcommit_time_s\tspan_start\tspan_end\tforced"]
    for e in result.commit_log.events:
        lines.append("\t".join([
            e.token.text,
            repr(e.commit_time),
            str(e.source_span.start_frame),
            str(e.source_span.end_frame),
            "1" if e.forced else "0",
        ]))
    lines.append("")
    return "\n".join(lines)


def parse_commit_dump(text: str) -> list[tuple[str, float, int, int, bool]]:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("token\t"):
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise ValueError(f"commit dump line {lineno}: expected 5 fields")
        rows.append((parts[0], float(parts[1]), int(parts[2]), int(parts[3]),
                     parts[4] == "1"))
    return rows


# ---------------------------------------------------------------------------
# backend + feed assembly shared by run and sweep

def build_backend(backend_spec: str, config: SessionConfig, seed: int):
    """Construct the backend named by 'trace:PATH' or 'synthetic:PATH'."""
    kind, _, path = backend_spec.partition(":")
    if not path:
        raise ValueError(
            f"backend spec {backend_spec!r} must look like trace:PATH or synthetic:PATH")
    if kind == "trace":
        return load_trace(path, config.chunk_interval)
    if kind == "synthetic":
        script = load_script(path)
        return synthesize_script(script, SyntheticModelConfig(seed=seed),
                                 config.chunk_interval)
    raise ValueError(f"unknown backend kind {kind!r}, expected trace or synthetic")


def build_feed(backend, config: SessionConfig, frames: Optional[int] = None,
               feed_path=None) -> FrameFeed:
    if feed_path is not None:
        return load_feed(feed_path)
    if frames is None:
        frames = backend.max_end_frame
    if frames < 1:
        raise ValueError("cannot derive a frame count; give --frames or --feed")
    return FrameFeed.regular(frames, config.chunk_interval)


@dataclass(frozen=True)
class RunInputs:
    backend_spec: str
    config: SessionConfig
    seed: int
    frames: Optional[int] = None
    feed_path: Optional[str] = None
    reference_text: Optional[str] = None
    nouns: Optional[tuple[str, ...]] = None
    alignment: Optional[AlignmentSet] = None


def execute_run(inputs: RunInputs) -> tuple[SessionResult, MetricReport]:
    backend = build_backend(inputs.backend_spec, inputs.config, inputs.seed)
    feed = build_feed(backend, inputs.config, inputs.frames, inputs.feed_path)
    result = run_session(feed, inputs.config, backend)
    report = compute_report(result, inputs.config, inputs.backend_spec, inputs.seed,
                            inputs.reference_text, inputs.nouns, inputs.alignment)
    return result, report


# ---------------------------------------------------------------------------
# parameter sweeps

def _set_policy_window(config: SessionConfig, value: float) -> SessionConfig:
    kind = config.policy.kind if config.policy.kind != "hold" else "la"
    return replace(config, policy=PolicySpec(kind, int(value)))


SWEEP_PARAMS = {
    "MIN_DURATION_THRESHOLD": lambda c, v: replace(c, min_duration_threshold=v),
    "MAX_UNCOMMITTED_DURATION": lambda c, v: replace(c, max_uncommitted_duration=v),
    "LOOKBACK_DELTA": lambda c, v: replace(c, lookback_delta=v),
    "CHUNKSIZE": lambda c, v: replace(c, chunk_interval=v),
    "LOG_PROB_THRESHOLD": lambda c, v: replace(c, log_prob_threshold=v),
    "CPS_MAX": lambda c, v: replace(c, cps_max=v),
    "CPS_MIN": lambda c, v: replace(c, cps_min=v),
    "PUNCT_RATIO_MAX": lambda c, v: replace(c, punct_ratio_max=v),
    "GLOSSARY_ALPHA": lambda c, v: replace(c, glossary_alpha=v),
    "LOCAL_AGREEMENT": _set_policy_window,
}

_SWEEP_METRICS = ("al_s", "dal_s", "wer", "bleu", "hr", "pn", "pn_raw_sum")


def run_sweep(inputs: RunInputs, param_names: Sequence[str],
              value_lists: Sequence[Sequence[float]]) -> str:
    """One session per grid point, row-major over the given value lists.

    Returns CSV text: the swept parameters, then the headline metrics.
    Metrics that could not be computed stay empty, never zero.
    """
    import itertools

    for name in param_names:
        if name not in SWEEP_PARAMS:
            raise ValueError(
                f"unknown sweep parameter {name!r}; valid: {', '.join(sorted(SWEEP_PARAMS))}")
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([*param_names, *_SWEEP_METRICS, "forced_commits"])
    for combo in itertools.product(*value_lists):
        config = inputs.config
        for name, value in zip(param_names, combo):
            config = SWEEP_PARAMS[name](config, value)
        _, report = execute_run(replace(inputs, config=config))
        row = [_fmt(v) for v in combo]
        row += [_fmt(report.metrics[k]) if k in report.metrics else ""
                for k in _SWEEP_METRICS]
        row.append(str(report.forced_commits))
        writer.writerow(row)
    return out.getvalue()


# ---------------------------------------------------------------------------
# summary-table rows (model, bleu, al, ap, dal)

@dataclass(frozen=True)
class TableRow:
    """One row of a quality/latency summary table; nan marks absent cells."""

    model: str
    bleu: float
    al: float
    ap: float
    dal: float


def format_table_rows(rows: Sequence[TableRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["model", "bleu", "al", "ap", "dal"])
    for row in rows:
        writer.writerow([row.model, repr(row.bleu), repr(row.al),
                         repr(row.ap), repr(row.dal)])
    return out.getvalue()


def parse_table_rows(text: str) -> tuple[TableRow, ...]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["model", "bleu", "al", "ap", "dal"]:
        raise ValueError(f"unexpected table header: {header}")
    rows = []
    for parts in reader:
        if not parts:
            continue
        if len(parts) != 5:
            raise ValueError(f"table row has {len(parts)} fields, expected 5")
        rows.append(TableRow(parts[0], float(parts[1]), float(parts[2]),
                             float(parts[3]), float(parts[4])))
    return tuple(rows)


# ---------------------------------------------------------------------------
# offline scoring (no session)

def score_report(ref_lines: Sequence[str], hyp_lines: Sequence[str],
                 nouns: Optional[Sequence[str]] = None,
                 alignment: Optional[AlignmentSet] = None,
                 normalize: bool = True, max_n: int = 4) -> str:
    """Score line-paired references and hypotheses; one row per segment plus
    count-pooled corpus aggregates."""
    if len(ref_lines) != len(hyp_lines):
        raise ValueError(
            f"reference has {len(ref_lines)} lines, hypothesis {len(hyp_lines)}")
    if not ref_lines:
        raise ValueError("nothing to score: reference is empty")

    lines = ["# simulkit score report", "", "[segments]"]
    total_edits = 0
    total_ref = 0
    total_char_edits = 0
    total_char_ref = 0
    stats = None
    for idx, (ref, hyp) in enumerate(zip(ref_lines, hyp_lines)):
        ref_tokens = normalize_tokens(ref.split(), normalize)
        hyp_tokens = normalize_tokens(hyp.split(), normalize)
        if not ref_tokens:
            raise ValueError(f"reference line {idx + 1} is empty after normalization")
        edits = edit_distance_tokens(ref_tokens, hyp_tokens)
        total_edits += edits
        total_ref += len(ref_tokens)
        ref_chars = ref.casefold() if normalize else ref
        hyp_chars = hyp.casefold() if normalize else hyp
        char_edits = edit_distance_chars(ref_chars, hyp_chars)
        total_char_edits += char_edits
        total_char_ref += len(ref_chars)
        seg_stats = ngram_stats(ref_tokens, hyp_tokens, max_n)
        stats = seg_stats if stats is None else stats.merge(seg_stats)
        row = [f"line = {idx + 1}",
               f"wer = {_fmt(edits / len(ref_tokens))}",
               f"cer = {_fmt(char_edits / len(ref_chars))}",
               f"bleu = {_fmt(seg_stats.score())}"]
        if nouns:
            row.append(f"pn = {_fmt(proper_noun_score(nouns, hyp.split()))}")
        lines.append("; ".join(row))

    lines += ["", "[corpus]",
              f"wer = {_fmt(total_edits / total_ref)}",
              f"cer = {_fmt(total_char_edits / total_char_ref)}",
              f"bleu = {_fmt(stats.score())}"]
    if nouns:
        all_hyp = " ".join(hyp_lines).split()
        lines.append(f"pn = {_fmt(proper_noun_score(nouns, all_hyp))}")
        lines.append(f"pn_raw_sum = {_fmt(proper_noun_max_sum(nouns, all_hyp))}")
    if alignment is not None:
        out_len = len(" ".join(hyp_lines).split())
        if out_len < 1:
            raise ValueError("hallucination rate needs a non-empty hypothesis")
        lines.append(f"hr = {_fmt(hallucination_rate(out_len, alignment))}")
    lines.append("")
    return "\n".join(lines)
