"""Command-line interface: run sessions, sweep parameters, score text.

Exit codes: 0 on success, 2 for bad input (missing files, parse errors,
unknown flags), 1 for internal failures.
"""

from __future__ import annotations

import argparse
import os
import sys

from .core import SessionConfig
from .reporting import (
    RunInputs,
    execute_run,
    load_alignment,
    load_reference,
    load_terms,
    parse_config_file,
    render_commit_dump,
    render_report,
    run_sweep,
    score_report,
)

REPORT_DIR_ENV = "SIMULKIT_REPORT_DIR"


def _resolve_out(path: str | None) -> str | None:
    if path is None:
        return None
    if os.path.isabs(path):
        return path
    return os.path.join(os.environ.get(REPORT_DIR_ENV, "."), path)


def _write_or_print(text: str, path: str | None) -> None:
    resolved = _resolve_out(path)
    if resolved is None:
        sys.stdout.write(text)
    else:
        os.makedirs(os.path.dirname(resolved) or ".", exist_ok=True)
        with open(resolved, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _load_run_inputs(args) -> RunInputs:
    if args.config:
        config, cfg_seed = parse_config_file(args.config)
    else:
        config, cfg_seed = SessionConfig(), None
    seed = args.seed if args.seed is not None else (cfg_seed if cfg_seed is not None else 0)
    reference = load_reference(args.reference) if args.reference else None
    nouns = load_terms(args.nouns) if args.nouns else None
    alignment = load_alignment(args.alignment) if getattr(args, "alignment", None) else None
    return RunInputs(
        backend_spec=args.backend,
        config=config,
        seed=seed,
        frames=args.frames,
        feed_path=args.feed,
        reference_text=reference,
        nouns=nouns,
        alignment=alignment,
    )


def cmd_run(args) -> int:
    inputs = _load_run_inputs(args)
    result, report = execute_run(inputs)
    _write_or_print(render_report(report), args.out)
    if args.dump_commits:
        _write_or_print(render_commit_dump(result), args.dump_commits)
    return 0


def cmd_sweep(args) -> int:
    if not args.param:
        raise ValueError("sweep needs at least one --param NAME --values v1,v2,...")
    if len(args.param) != len(args.values):
        raise ValueError("each --param needs a matching --values list")
    value_lists = []
    for raw in args.values:
        try:
            value_lists.append([float(v) for v in raw.split(",") if v.strip()])
        except ValueError:
            raise ValueError(f"--values {raw!r} is not a comma-separated number list") from None
    inputs = _load_run_inputs(args)
    csv_text = run_sweep(inputs, args.param, value_lists)
    _write_or_print(csv_text, args.out)
    return 0


def _read_lines(path) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]


def cmd_score(args) -> int:
    if args.hr and not args.alignment:
        raise ValueError("hallucination rate needs --alignment")
    ref_lines = _read_lines(args.ref)
    hyp_lines = _read_lines(args.hyp)
    if args.single:
        ref_lines = [" ".join(ref_lines)]
        hyp_lines = [" ".join(hyp_lines)]
    alignment = load_alignment(args.alignment) if args.alignment else None
    if alignment is not None and len(hyp_lines) != 1:
        raise ValueError("alignment-based scoring needs --single or a one-line pair")
    nouns = load_terms(args.nouns) if args.nouns else None
    text = score_report(ref_lines, hyp_lines, nouns, alignment,
                        normalize=not args.no_normalize)
    _write_or_print(text, args.out)
    return 0


def _add_run_like_flags(sub, with_dump: bool) -> None:
    sub.add_argument("--backend", required=True,
                     help="trace:PATH or synthetic:PATH")
    sub.add_argument("--config", help="flat KEY = VALUE session config file")
    sub.add_argument("--frames", type=int, help="total frames in the feed")
    sub.add_argument("--feed", help="feed file with explicit frame arrivals")
    sub.add_argument("--reference", help="reference transcript file")
    sub.add_argument("--nouns", help="proper-noun list, one phrase per line")
    sub.add_argument("--alignment", help="source/target alignment pairs file")
    sub.add_argument("--seed", type=int, help="backend seed (overrides config SEED)")
    sub.add_argument("--out", help="output path (relative paths land in "
                                   f"${REPORT_DIR_ENV} when set)")
    if with_dump:
        sub.add_argument("--dump-commits", help="also write the commit log as TSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulkit",
        description="Simulate and score streaming recognition sessions.")
    subs = parser.add_subparsers(dest="command", required=True)

    run = subs.add_parser("run", help="run one session and write its report")
    _add_run_like_flags(run, with_dump=True)
    run.set_defaults(func=cmd_run)

    sweep = subs.add_parser("sweep", help="run a parameter grid, one session per point")
    _add_run_like_flags(sweep, with_dump=False)
    sweep.add_argument("--param", action="append", default=[],
                       help="config parameter to sweep (repeatable)")
    sweep.add_argument("--values", action="append", default=[],
                       help="comma-separated values for the matching --param")
    sweep.set_defaults(func=cmd_sweep)

    score = subs.add_parser("score", help="score hypothesis text against a reference")
    score.add_argument("--hyp", required=True, help="hypothesis text file")
    score.add_argument("--ref", required=True, help="reference text file")
    score.add_argument("--nouns", help="proper-noun list file")
    score.add_argument("--alignment", help="alignment pairs file (single-segment)")
    score.add_argument("--hr", action="store_true",
                       help="require the hallucination-rate column")
    score.add_argument("--single", action="store_true",
                       help="treat whole files as one segment instead of per-line pairs")
    score.add_argument("--no-normalize", action="store_true",
                       help="skip case-folding and edge-punctuation stripping")
    score.add_argument("--out", help="output path")
    score.set_defaults(func=cmd_score)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, LookupError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - internal invariant failures
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
