"""CTC fundamentals: alignment collapse, greedy decoding, and the exact
conditional probability of a transcript via the interleaved-blank forward
DP, plus an exhaustive-enumeration oracle for cross-checking it.

A transcript is a plain tuple of token indices in collapsed form (adjacent
repeats merged, blanks removed); text rendering lives on
:class:`~ctcrelax.tensor_io.Vocabulary`.  All probability arithmetic is in
natural-log domain with ``-inf`` as the impossible-event sentinel.
"""

from __future__ import annotations

import itertools
from math import exp, inf, log1p

import numpy as np

from .errors import SizeError

Transcript = tuple[int, ...]

BRUTE_FORCE_LIMIT = 10**7  # max C**T alignments the oracle will enumerate

NEG_INF = -inf


def log_add(a: float, b: float) -> float:
    """Numerically stable log(exp(a) + exp(b)); -inf propagates correctly."""
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a < b:
        a, b = b, a
    return a + log1p(exp(b - a))


def collapse(alignment, blank: int) -> Transcript:
    """CTC collapse: merge adjacent repeats, then drop blanks."""
    out: list[int] = []
    prev = -1
    for tok in alignment:
        if tok != prev and tok != blank:
            out.append(tok)
        prev = tok
    return tuple(out)


def greedy_decode(logprobs: np.ndarray, blank: int) -> Transcript:
    """Per-frame argmax (ties to the lowest token index), then collapse."""
    path = np.argmax(logprobs, axis=1)
    return collapse(path.tolist(), blank)


def ctc_forward(logprobs: np.ndarray, target, blank: int) -> float:
    """Log-probability of ``target`` summed over all alignments collapsing
    to it, via the standard interleaved-blank forward DP.

    Returns ``-inf`` when the target cannot fit in the available frames
    (a blank is required between repeated tokens).
    """
    lp = np.asarray(logprobs, dtype=np.float64)
    num_frames = lp.shape[0]
    target = tuple(target)
    if not target:
        return float(lp[:, blank].sum())

    # Expanded label sequence [blank, y1, blank, y2, ..., blank].
    length = len(target)
    num_states = 2 * length + 1
    labels = np.full(num_states, blank, dtype=np.int64)
    labels[1::2] = target
    # Skip from state s-2 is legal for non-blank states whose label differs
    # from the previous non-blank label.
    can_skip = np.zeros(num_states, dtype=bool)
    can_skip[3::2] = labels[3::2] != labels[1:-2:2]

    alpha = np.full(num_states, NEG_INF)
    alpha[0] = lp[0, blank]
    alpha[1] = lp[0, target[0]]
    for t in range(1, num_frames):
        stay = alpha
        step = np.concatenate(([NEG_INF], alpha[:-1]))
        skip = np.concatenate(([NEG_INF, NEG_INF], alpha[:-2]))
        skip = np.where(can_skip, skip, NEG_INF)
        merged = np.logaddexp(np.logaddexp(stay, step), skip)
        alpha = merged + lp[t, labels]

    return float(np.logaddexp(alpha[-1], alpha[-2]))


def ctc_brute_force(logprobs: np.ndarray, target, blank: int) -> float:
    """Oracle for :func:`ctc_forward`: enumerate every alignment, sum the
    ones collapsing to ``target``.  Guarded to C**T <= 10**7 alignments.
    """
    target = tuple(target)
    table = brute_force_all(logprobs, blank)
    return table.get(target, NEG_INF)


def brute_force_all(logprobs: np.ndarray, blank: int) -> dict[Transcript, float]:
    """Exhaustive map from every reachable transcript to its exact CTC
    log-probability, by enumerating all C**T alignments once.
    """
    lp = np.asarray(logprobs, dtype=np.float64)
    num_frames, vocab_size = lp.shape
    if vocab_size**num_frames > BRUTE_FORCE_LIMIT:
        raise SizeError(
            f"{vocab_size}**{num_frames} alignments exceed the enumeration guard"
        )
    rows = [lp[t].tolist() for t in range(num_frames)]
    table: dict[Transcript, float] = {}
    for path in itertools.product(range(vocab_size), repeat=num_frames):
        score = 0.0
        for t, tok in enumerate(path):
            score += rows[t][tok]
        key = collapse(path, blank)
        prev = table.get(key)
        table[key] = score if prev is None else log_add(prev, score)
    return table
