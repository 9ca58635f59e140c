"""Shared builders for test objects."""

from simulkit import BeamSet, Hypothesis, Token


def mk_hyp(*texts, lp=-0.1):
    """Hypothesis from token texts with a uniform log-prob."""
    return Hypothesis(tuple(Token(t, lp) for t in texts), lp)


def mk_beam(*texts, latency=0.1, lp=-0.1):
    """Single-hypothesis beam."""
    return BeamSet((mk_hyp(*texts, lp=lp),), latency)


def mk_multi_beam(hyp_texts, latency=0.1):
    """Beam from a list of token-text tuples; scores decrease with rank."""
    hyps = tuple(
        mk_hyp(*texts, lp=-0.1 * (rank + 1)) for rank, texts in enumerate(hyp_texts)
    )
    return BeamSet(hyps, latency)


def texts(tokens):
    return [t.text for t in tokens]
