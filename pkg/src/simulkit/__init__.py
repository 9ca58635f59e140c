"""simulkit: deterministic simulation and scoring of streaming translation front-ends.

Replays or synthesizes streaming recognizer output, applies prefix-commitment
and hallucination-control policies on a virtual clock, and scores sessions
with a full latency/quality metric suite.
"""

from .backends import (
    MissingTraceRecordError,
    RecognizerRequest,
    ScriptWord,
    SyntheticBackend,
    SyntheticModelConfig,
    TraceBackend,
    TraceLoadError,
    TraceRecord,
    load_script,
    load_trace,
    synthesize_script,
)
from .core import (
    AlignmentSet,
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
    concat_text,
    span_duration,
)
from .glossary import (
    GlossaryRescoreWarning,
    TokenDistribution,
    apply_glossary_bias,
    glossary_bias_raw,
    rescore_beam,
    rescore_hypothesis,
)
from .hallucination import (
    DetectionVerdict,
    chars_per_second,
    detect,
    hallucination_indicator,
    hallucination_rate,
    punctuation_word_ratio,
)
from .latency import (
    LatencyInput,
    average_lagging,
    average_proportion,
    average_target_delay,
    differentiable_average_lagging,
    length_adaptive_al,
    real_time_factor,
)
from .policies import (
    PolicyState,
    clip_to_committed,
    hold_n,
    la_n,
    longest_common_prefix,
    sp_n,
)
from .quality import (
    EditAlignment,
    NGramStats,
    align_words,
    bleu,
    cer,
    corpus_bleu,
    lexical_similarity,
    ngram_stats,
    proper_noun_max_sum,
    proper_noun_score,
    wer,
)
from .session import (
    FrameFeed,
    SessionResult,
    SessionState,
    StepOutcome,
    StepSample,
    load_feed,
    lookback_extend,
    run_session,
    step,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
