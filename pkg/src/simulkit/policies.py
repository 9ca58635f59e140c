"""Prefix-commitment strategies: hold-n, local agreement, shared prefix.

All functions are pure. Agreement is exact token-text equality; log-probs
never influence it. The returned tokens are taken from the most recent
hypothesis so the freshest log-probs travel with the commit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import BeamSet, Hypothesis, Token


@dataclass(frozen=True)
class PolicyState:
    """Rolling history of recognizer responses consumed by a policy."""

    window: int
    history: tuple[BeamSet, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "history", tuple(self.history))
        if self.window < 0:
            raise ValueError(f"window must be >= 0, got {self.window}")

    def push(self, beam: BeamSet) -> "PolicyState":
        return PolicyState(self.window, self.history + (beam,))


def hold_n(best: Hypothesis, n: int) -> tuple[Token, ...]:
    """First max(0, len - n) tokens of the current best hypothesis."""
    if n < 0:
        raise ValueError(f"hold-n requires n >= 0, got {n}")
    keep = max(0, len(best.tokens) - n)
    return best.tokens[:keep]


def longest_common_prefix(sequences: Sequence[Iterable[Token]]) -> tuple[Token, ...]:
    """Longest prefix, by token text, shared by every sequence."""
    seqs = [tuple(s) for s in sequences]
    if not seqs:
        raise ValueError("longest_common_prefix needs at least one sequence")
    shared = min(len(s) for s in seqs)
    length = 0
    for i in range(shared):
        first = seqs[0][i].text
        if any(s[i].text != first for s in seqs[1:]):
            break
        length = i + 1
    return seqs[-1][:length]


def la_n(state: PolicyState) -> tuple[Token, ...]:
    """Local agreement: LCP of the best hypotheses of the last n responses.

    Empty until the window holds n responses; an intersection over a short
    history is undefined, and waiting is the conservative choice.
    """
    if state.window < 1:
        raise ValueError("la-n requires a window >= 1")
    if len(state.history) < state.window:
        return ()
    recent = state.history[-state.window:]
    return longest_common_prefix([b.best.tokens for b in recent])


def sp_n(state: PolicyState) -> tuple[Token, ...]:
    """Shared prefix: LCP over every hypothesis of the last n responses."""
    if state.window < 1:
        raise ValueError("sp-n requires a window >= 1")
    if len(state.history) < state.window:
        return ()
    seqs = [h.tokens for b in state.history[-state.window:] for h in b.hypotheses]
    return longest_common_prefix(seqs)


def clip_to_committed(candidate: Iterable[Token],
                      committed: Iterable[Token]) -> tuple[Token, ...]:
    """Suffix of `candidate` past `committed`; empty unless it extends it.

    Committed text is never retracted, so a candidate that conflicts with
    what is already out yields nothing.
    """
    cand = tuple(candidate)
    done = tuple(committed)
    if len(cand) < len(done):
        return ()
    for a, b in zip(cand, done):
        if a.text != b.text:
            return ()
    return cand[len(done):]
