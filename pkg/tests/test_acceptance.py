"""Acceptance suite: one test per release criterion, each timed where the
criterion bounds runtime and each printing a PASS/FAIL line (run with -s).

The edit-distance criterion is exhaustive: every ordered pair of token
sequences up to length 8 over a three-symbol alphabet is checked against a
recursive oracle, so the comparison runs in compiled code. The oracle
memoizes over sequence ids (every suffix of an enumerated sequence is
itself an enumerated sequence), which keeps the full sweep inside the
time budget without changing the recursion it evaluates.
"""

import contextlib
import math
import random
import subprocess
import sys
import time

import numpy as np
import pytest
from numba import njit, prange

from simulkit import (
    FrameFeed,
    LatencyInput,
    PolicySpec,
    ScriptWord,
    SessionConfig,
    SyntheticModelConfig,
    TokenDistribution,
    apply_glossary_bias,
    average_lagging,
    average_proportion,
    average_target_delay,
    bleu,
    cer,
    differentiable_average_lagging,
    hallucination_rate,
    length_adaptive_al,
    real_time_factor,
    run_session,
    synthesize_script,
    wer,
)
from simulkit import AlignmentSet, BeamSet, Hypothesis, Token
from simulkit._kernels import edit_distance_numba
from simulkit.glossary import rescore_beam
from simulkit.policies import PolicyState, hold_n, la_n, sp_n
from util import mk_hyp, mk_multi_beam


@contextlib.contextmanager
def criterion(number, description):
    try:
        yield
    except BaseException:
        print(f"FAIL criterion {number}: {description}")
        raise
    print(f"PASS criterion {number}: {description}")


# ---------------------------------------------------------------------------
# criterion 1: latency/hallucination metrics match direct-summation oracles

def _al_oracle(times, x, d):
    y = len(times)
    ratio, unit = y / x, d / x
    return sum(times[i] - (i / ratio) * unit for i in range(y)) / y


def _dal_oracle(reads, y, x, d):
    ratio, unit = y / x, d / x
    return sum(reads[t] * unit - ((reads[t] - 1) / ratio) * unit for t in range(y)) / y


def _laal_oracle(times, x, d, y_ref):
    y = len(times)
    ratio, unit = max(y, y_ref) / x, d / x
    return sum(times[i] - (i / ratio) * unit for i in range(y)) / y


def _atd_oracle(times, expected):
    return sum(t - e for t, e in zip(times, expected)) / len(times)


def _ap_oracle(src, tgt):
    return sum(tgt) / sum(src)


def _hr_oracle(length, pairs):
    hits = 0
    for i in range(1, length + 1):
        if all(pair[1] != i for pair in pairs):
            hits += 1
    return hits / length


def test_criterion_1_metric_oracle_equivalence():
    with criterion(1, "AL/DAL/AP/ATD/LAAL/RTF/HR match direct-summation oracles"):
        rng = np.random.default_rng(20260810)
        start = time.perf_counter()
        for _ in range(1000):
            y = int(rng.integers(1, 65))
            x = int(rng.integers(1, 65))
            y_ref = int(rng.integers(1, 65))
            d = float(rng.uniform(0.1, 60.0))
            times = np.sort(rng.uniform(0.0, 60.0, size=y))
            inp = LatencyInput(tuple(times), x, d, reference_target_count=y_ref)
            assert average_lagging(inp) == pytest.approx(
                _al_oracle(times, x, d), abs=1e-9)
            reads = rng.uniform(1.0, x, size=y)
            assert differentiable_average_lagging(inp, reads) == pytest.approx(
                _dal_oracle(reads, y, x, d), abs=1e-9)
            assert length_adaptive_al(inp) == pytest.approx(
                _laal_oracle(times, x, d, y_ref), abs=1e-9)
            expected = np.sort(rng.uniform(0.0, 60.0, size=y))
            assert average_target_delay(inp, expected) == pytest.approx(
                _atd_oracle(times, expected), abs=1e-9)
            n_seg = int(rng.integers(1, 12))
            src = rng.uniform(0.01, 10.0, size=n_seg)
            tgt = rng.uniform(0.0, 10.0, size=n_seg)
            seg_inp = LatencyInput(tuple(times), x, d,
                                   segment_durations_source=tuple(src),
                                   segment_durations_target=tuple(tgt))
            assert average_proportion(seg_inp) == pytest.approx(
                _ap_oracle(src, tgt), abs=1e-9)
            proc, audio = float(rng.uniform(0, 30)), float(rng.uniform(0.1, 60))
            assert real_time_factor(proc, audio) == pytest.approx(proc / audio, abs=1e-9)
            length = int(rng.integers(1, 65))
            pairs = frozenset(
                (int(rng.integers(1, 40)), int(rng.integers(1, 80)))
                for _ in range(int(rng.integers(0, 50))))
            assert hallucination_rate(length, AlignmentSet(pairs)) == pytest.approx(
                _hr_oracle(length, pairs), abs=1e-9)
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"criterion 1 took {elapsed:.1f}s"


# ---------------------------------------------------------------------------
# criterion 2: exhaustive WER oracle, all pairs of length <= 8 over {a, b, c}

_POW3 = np.array([3 ** k for k in range(9)], dtype=np.int64)
_OFFSETS = np.array([(3 ** k - 1) // 2 for k in range(10)], dtype=np.int64)
_N_IDS = int(_OFFSETS[9])  # 9841 sequences of length 0..8


@njit(cache=True)
def _seq_len_of(sid, offsets):
    for length in range(9):
        if sid < offsets[length + 1]:
            return length
    return -1


@njit(cache=True)
def _lev_recursive(x, y, memo, offsets, pow3):
    """Levenshtein straight from the recursive definition, memoized on ids."""
    cached = memo[x, y]
    if cached >= 0:
        return cached
    lx = _seq_len_of(x, offsets)
    ly = _seq_len_of(y, offsets)
    if lx == 0:
        result = ly
    elif ly == 0:
        result = lx
    else:
        vx = x - offsets[lx]
        vy = y - offsets[ly]
        head_x = vx // pow3[lx - 1]
        tail_x = offsets[lx - 1] + vx % pow3[lx - 1]
        head_y = vy // pow3[ly - 1]
        tail_y = offsets[ly - 1] + vy % pow3[ly - 1]
        result = _lev_recursive(tail_x, tail_y, memo, offsets, pow3) + (
            0 if head_x == head_y else 1)
        alt = _lev_recursive(tail_x, y, memo, offsets, pow3) + 1
        if alt < result:
            result = alt
        alt = _lev_recursive(x, tail_y, memo, offsets, pow3) + 1
        if alt < result:
            result = alt
    memo[x, y] = result
    return result


@njit(cache=True)
def _fill_oracle(memo, offsets, pow3, n):
    for x in range(n):
        for y in range(n):
            _lev_recursive(x, y, memo, offsets, pow3)


@njit(parallel=True, cache=True)
def _compare_against_kernel(memo, seqs, lens, n):
    mismatches = 0
    for x in prange(n):
        a = seqs[x, :lens[x]]
        for y in range(n):
            if edit_distance_numba(a, seqs[y, :lens[y]]) != memo[x, y]:
                mismatches += 1
    return mismatches


def _enumerate_sequences():
    seqs = np.zeros((_N_IDS, 8), dtype=np.int64)
    lens = np.zeros(_N_IDS, dtype=np.int64)
    sid = 0
    for length in range(9):
        for value in range(3 ** length):
            digits = []
            v = value
            for _ in range(length):
                digits.append(v % 3)
                v //= 3
            seqs[sid, :length] = digits[::-1]
            lens[sid] = length
            sid += 1
    return seqs, lens


def _sid_of(seq):
    value = 0
    for d in seq:
        value = value * 3 + d
    return (3 ** len(seq) - 1) // 2 + value


def _plain_recursive_lev(a, b):
    if not a:
        return len(b)
    if not b:
        return len(a)
    return min(_plain_recursive_lev(a[1:], b[1:]) + (a[0] != b[0]),
               _plain_recursive_lev(a[1:], b) + 1,
               _plain_recursive_lev(a, b[1:]) + 1)


def test_criterion_2_exhaustive_wer_oracle():
    with criterion(2, "exhaustive WER vs recursive edit distance, lengths <= 8"):
        start = time.perf_counter()
        memo = np.full((_N_IDS, _N_IDS), -1, dtype=np.int8)
        seqs, lens = _enumerate_sequences()
        _fill_oracle(memo, _OFFSETS, _POW3, _N_IDS)

        # the memoized oracle agrees with the plain brute-force recursion
        short = [tuple(seqs[s, :lens[s]]) for s in range(_OFFSETS[4])]  # len <= 3
        for a in short:
            for b in short:
                assert memo[_sid_of(a), _sid_of(b)] == _plain_recursive_lev(a, b)
        rng = random.Random(2)
        for _ in range(200):
            a = tuple(rng.randrange(3) for _ in range(rng.randint(0, 8)))
            b = tuple(rng.randrange(3) for _ in range(rng.randint(0, 8)))
            assert memo[_sid_of(a), _sid_of(b)] == _plain_recursive_lev(a, b)

        # every ordered pair, in compiled code, against the production kernel
        mismatches = _compare_against_kernel(memo, seqs, lens, _N_IDS)
        assert mismatches == 0

        # the public word- and character-level surfaces ride on that kernel
        letters = "abc"
        words = [tuple(seqs[s, :lens[s]]) for s in range(_OFFSETS[5])]  # len <= 4
        for a in words:
            if not a:
                continue
            ref = [letters[d] for d in a]
            for b in words:
                hyp = [letters[d] for d in b]
                expected = int(memo[_sid_of(a), _sid_of(b)])
                assert round(wer(ref, hyp) * len(ref)) == expected
        for a in short:
            if not a:
                continue
            ref = "".join(letters[d] for d in a)
            for b in short:
                hyp = "".join(letters[d] for d in b)
                expected = int(memo[_sid_of(a), _sid_of(b)])
                assert round(cer(ref, hyp) * len(ref)) == expected

        elapsed = time.perf_counter() - start
        pairs = _N_IDS * _N_IDS
        assert elapsed < 60.0, f"criterion 2 took {elapsed:.1f}s"
        print(f"  ({pairs:,} ordered pairs in {elapsed:.1f}s)", end=" ")


# ---------------------------------------------------------------------------
# criterion 3: BLEU fixtures

def test_criterion_3_bleu_fixtures():
    with criterion(3, "BLEU identity, clipping-to-zero, brevity-penalty fixtures"):
        assert bleu("a b c d".split(), "a b c d".split()) == 1.0
        assert bleu("the cat".split(), "the the the".split()) == 0.0
        got = bleu("a b c d".split(), "a b c".split(), max_n=3)
        assert got == pytest.approx(0.7165, abs=1e-4)
        assert got == pytest.approx(math.exp(1 - 4 / 3), abs=1e-9)


# ---------------------------------------------------------------------------
# criterion 4: raising the duration gate removes hallucination fallout

_SCRIPT8 = tuple(
    ScriptWord(end, text) for end, text in
    [(0.3, "alpha"), (0.65, "bravo"), (1.0, "carol"), (1.35, "delta"),
     (1.7, "echo"), (2.05, "fox"), (2.4, "golf"), (2.75, "hotel")]
)


def test_criterion_4_duration_gate_regression():
    with criterion(4, "min-duration 0.35 -> 0.7: detections to 0, spike gone, AL drops"):
        start = time.perf_counter()
        backend = synthesize_script(_SCRIPT8, SyntheticModelConfig(seed=7))
        feed = FrameFeed.regular(8)
        results = {}
        for min_dur in (0.35, 0.7):
            cfg = SessionConfig(min_duration_threshold=min_dur)
            results[min_dur] = run_session(feed, cfg, backend)
        risky, safe = results[0.35], results[0.7]

        assert risky.flagged_count > 0
        assert safe.flagged_count == 0

        risky_max = max(b.processing_latency for _, b in risky.requests)
        safe_max = max(b.processing_latency for _, b in safe.requests)
        assert risky_max == 1.882
        assert safe_max == 0.15

        def al_of(result):
            inp = LatencyInput(result.commit_log.commit_times, len(_SCRIPT8),
                               result.timeline.duration)
            return average_lagging(inp)

        assert al_of(safe) < al_of(risky)
        elapsed = time.perf_counter() - start
        assert elapsed < 5.0, f"criterion 4 took {elapsed:.1f}s"


# ---------------------------------------------------------------------------
# criterion 5: uncommitted-duration bound over a randomized session fleet

def test_criterion_5_uncommitted_bound_fleet():
    with criterion(5, "100 seeded sessions never breach the uncommitted bound"):
        start = time.perf_counter()
        rng = random.Random(909)
        forced_seen = 0
        for k in range(100):
            n_words = rng.randint(4, 14)
            t = 0.0
            words = []
            for i in range(n_words):
                t += rng.uniform(0.2, 0.6)
                words.append(ScriptWord(round(t, 3), f"w{i}"))
            frames = math.ceil(words[-1].end_time / 0.35 - 1e-9)
            cfg = SessionConfig(
                min_duration_threshold=rng.choice([0.35, 0.7, 1.05]),
                max_uncommitted_duration=rng.choice([1.2, 1.7, 2.5]),
                policy=PolicySpec.parse(
                    rng.choice(["la-2", "la-3", "la-6", "hold-1", "hold-2", "sp-1"])),
            )
            backend = synthesize_script(
                words, SyntheticModelConfig(seed=k,
                                            hallucination_prob=rng.choice([0.0, 0.5, 1.0])))
            result = run_session(FrameFeed.regular(frames), cfg, backend)
            forced_seen += result.forced_commits
            for sample in result.step_samples:
                if sample.uncommitted_since is None:
                    continue
                bound = (cfg.max_uncommitted_duration + cfg.chunk_interval
                         + sample.last_processing_latency + 1e-6)
                gap = sample.clock - sample.uncommitted_since
                assert gap <= bound, f"session {k}: gap {gap} > bound {bound}"

        # a session built to stall: the agreement window never fills,
        # so only forced commits can move text out
        stall_cfg = SessionConfig(policy=PolicySpec.parse("la-8"))
        backend = synthesize_script(_SCRIPT8, SyntheticModelConfig(seed=1))
        stalled = run_session(FrameFeed.regular(8), stall_cfg, backend)
        assert stalled.forced_commits > 0
        assert forced_seen + stalled.forced_commits > 0

        elapsed = time.perf_counter() - start
        assert elapsed < 30.0, f"criterion 5 took {elapsed:.1f}s"


# ---------------------------------------------------------------------------
# criterion 6: policy property suite, 10,000 randomized histories

def test_criterion_6_policy_properties():
    with criterion(6, "hold length law, LA/SP membership, SP<=LA, window monotone"):
        start = time.perf_counter()
        rng = random.Random(606)
        alphabet = ["a", "b", "c", "d", "e"]
        for _ in range(10_000):
            window = rng.randint(1, 4)
            state = PolicyState(window)
            for _ in range(rng.randint(0, 6)):
                hyps = [tuple(rng.choice(alphabet) for _ in range(rng.randint(0, 6)))
                        for _ in range(rng.randint(1, 3))]
                state = state.push(mk_multi_beam(hyps, latency=0.0))

            n_hold = rng.randint(0, 6)
            best = (state.history[-1].best if state.history
                    else mk_hyp(*(rng.choice(alphabet) for _ in range(rng.randint(0, 6)))))
            held = hold_n(best, n_hold)
            assert len(held) == max(0, len(best.tokens) - n_hold)

            la = [t.text for t in la_n(state)]
            sp = [t.text for t in sp_n(state)]
            if len(state.history) >= window:
                for beam in state.history[-window:]:
                    assert list(beam.best.token_texts())[:len(la)] == la
                    for hyp in beam.hypotheses:
                        assert list(hyp.token_texts())[:len(sp)] == sp
            else:
                assert la == [] and sp == []
            assert len(sp) <= len(la)
            wider = PolicyState(window + 1, state.history)
            assert len(la_n(wider)) <= len(la)
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"criterion 6 took {elapsed:.1f}s"


# ---------------------------------------------------------------------------
# criterion 7: byte-identical reports for identical inputs and seed

def _cli(*args):
    proc = subprocess.run([sys.executable, "-m", "simulkit", *args],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


def test_criterion_7_byte_identical_reports(data_dir, tmp_path):
    with criterion(7, "identical inputs and seed give byte-identical reports"):
        for backend_spec in (f"trace:{data_dir / 'trace6.jsonl'}",
                             f"synthetic:{data_dir / 'script8.tsv'}"):
            outputs = []
            for run_idx in (1, 2):
                report = tmp_path / f"report_{run_idx}.txt"
                dump = tmp_path / f"commits_{run_idx}.tsv"
                _cli("run", "--backend", backend_spec,
                     "--config", str(data_dir / "config_hold2.cfg"),
                     "--reference", str(data_dir / "reference6.txt"),
                     "--seed", "3",
                     "--out", str(report), "--dump-commits", str(dump))
                outputs.append((report.read_bytes(), dump.read_bytes()))
            assert outputs[0] == outputs[1]


# ---------------------------------------------------------------------------
# criterion 8: glossary biasing

def test_criterion_8_glossary_bias():
    with criterion(8, "renormalized bias, rank-flip fixture, alpha composition law"):
        rng = random.Random(808)
        for _ in range(300):
            size = rng.randint(1, 15)
            raw = [rng.random() + 1e-9 for _ in range(size)]
            total = sum(raw)
            dist = TokenDistribution({f"w{i}": p / total for i, p in enumerate(raw)})
            glossary = {f"w{i}" for i in range(size) if rng.random() < 0.5}
            biased = apply_glossary_bias(dist, glossary, rng.uniform(0.01, 0.99))
            assert abs(sum(biased.entries.values()) - 1.0) <= 1e-9

        plain = Hypothesis((Token("meat", -0.2), Token("alive", -0.2)), -0.2)
        glossed = Hypothesis((Token("meet", -0.2), Token("Alice", -0.2)), -0.2)
        beam = BeamSet((plain, glossed), 0.1)
        assert rescore_beam(beam, ["alice"], 0.9).best.text == "meet Alice"

        for _ in range(200):
            p = rng.uniform(0.01, 0.99)
            alpha = rng.uniform(0.05, 0.95)
            dist = TokenDistribution({"g": p, "o": 1.0 - p})
            twice = apply_glossary_bias(
                apply_glossary_bias(dist, {"g"}, alpha), {"g"}, alpha)
            alpha2 = alpha ** 2 / (alpha ** 2 + (1 - alpha) ** 2)
            once = apply_glossary_bias(dist, {"g"}, alpha2)
            for word in ("g", "o"):
                assert twice.probability(word) == pytest.approx(
                    once.probability(word), abs=1e-9)


# ---------------------------------------------------------------------------
# criterion 9: desk-scale statement and lossless table-row round-trip

def test_criterion_9_table_rows_round_trip():
    description = ("published headline scores need real models and full corpora; "
                   "substituting criteria 1-8 plus lossless table-row round-trip")
    with criterion(9, description):
        from simulkit.reporting import TableRow, format_table_rows, parse_table_rows
        rows = (
            TableRow("cascade baseline", 27.4, 920.0, 0.68, 1420.0),
            TableRow("streaming, tuned", 30.75, 2740.0, 0.9, 3630.0),
            TableRow("offline topline", 33.14, 5794.0, 1.0, 5794.0),
            TableRow("restricted decoder", 30.6, 1922.0, float("nan"), 3121.0),
        )
        text = format_table_rows(rows)
        reparsed = parse_table_rows(text)
        assert format_table_rows(reparsed) == text
        for a, b in zip(reparsed, rows):
            assert a.model == b.model
            for field in ("bleu", "al", "ap", "dal"):
                va, vb = getattr(a, field), getattr(b, field)
                assert (math.isnan(va) and math.isnan(vb)) or va == vb
