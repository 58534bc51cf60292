"""CTC prefix beam search with n-gram shallow fusion and word-insertion
score.

Hypotheses are collapsed prefixes; at every frame duplicate prefixes are
merged, with the acoustic mass split into blank-ending and
non-blank-ending components combined by log-sum-exp.  Each hypothesis
additionally tracks the mass of its best single alignment, and per-frame
pruning ranks by that best-alignment mass (plus LM terms): with beam
width 1 the surviving prefix is then always the collapse of the
per-frame argmax path, i.e. width-1 decoding degenerates exactly to
greedy decoding.  Returned scores use the full merged mass, so with
pruning disabled and a wide enough beam the top hypothesis is the exact
argmax of

    log P(Y|X) + lm_weight * ln P_LM(Y) + word_score * |Y|

over collapsed strings, |Y| counting words.

LM fusion is word-boundary shallow fusion: when a separator emission
completes a word, the word's LM step (converted from the ARPA log10 to
natural log) is weighted into the hypothesis score along with the word
score.  Before final ranking every hypothesis is charged for its trailing
un-terminated word, if any, and for the end-of-sentence LM transition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .aggregation import AggregationConfig, pipeline_logprobs
from .ctc import NEG_INF, Transcript, log_add
from .errors import ConfigError, ShapeError
from .lm import SENTENCE_END, LmState, NGramModel
from .tensor_io import LayerStack, ProjectionHead, Vocabulary

LN10 = math.log(10.0)


@dataclass(frozen=True)
class DecodeConfig:
    """Beam search knobs.

    token_prune_log_threshold drops per-frame emissions more than that many
    nats below the frame's best token; beam_prune_log_margin drops
    hypotheses more than that many nats below the frame's best hypothesis.
    Both are disabled at -inf.
    """

    beam_width: int
    lm_weight: float = 0.0  # weight on ln P_LM
    word_score: float = 0.0  # additive bonus per decoded word
    token_prune_log_threshold: float = -5.0
    beam_prune_log_margin: float = -10.0

    def __post_init__(self):
        if self.beam_width < 1:
            raise ConfigError(f"beam_width must be >= 1, got {self.beam_width}")
        if self.token_prune_log_threshold > 0 or self.beam_prune_log_margin > 0:
            raise ConfigError("pruning thresholds must be <= 0")

    def without_pruning(self) -> "DecodeConfig":
        return replace(
            self,
            token_prune_log_threshold=NEG_INF,
            beam_prune_log_margin=NEG_INF,
        )


class Hypothesis:
    """One live prefix: merged and best-alignment acoustic masses plus LM state.

    p_blank/p_non_blank are the natural-log probabilities of all alignments
    collapsing to the prefix that end/do not end in blank; v_blank/v_non_blank
    are the same split for the single best alignment.  lm_log_prob is the
    accumulated natural-log LM score of the words completed so far.
    """

    __slots__ = (
        "prefix",
        "p_blank",
        "p_non_blank",
        "v_blank",
        "v_non_blank",
        "lm_state",
        "lm_log_prob",
        "word_count",
        "cur_word",
    )

    def __init__(self, prefix, lm_state, lm_log_prob, word_count, cur_word):
        self.prefix: Transcript = prefix
        self.p_blank = NEG_INF
        self.p_non_blank = NEG_INF
        self.v_blank = NEG_INF
        self.v_non_blank = NEG_INF
        self.lm_state: LmState = lm_state
        self.lm_log_prob = lm_log_prob
        self.word_count = word_count
        self.cur_word: Transcript = cur_word

    @property
    def acoustic_log_prob(self) -> float:
        return log_add(self.p_blank, self.p_non_blank)


def beam_search_decode(
    logprobs: np.ndarray,
    vocab: Vocabulary,
    lm: NGramModel | None,
    cfg: DecodeConfig,
) -> list[tuple[Transcript, float]]:
    """Decode one utterance; returns up to beam_width (transcript, score)
    pairs, best first, deterministic (score ties break to the
    lexicographically smaller prefix)."""
    lp = np.asarray(logprobs, dtype=np.float64)
    if lp.ndim != 2 or lp.shape[1] != vocab.size:
        raise ShapeError(
            f"logprobs shape {lp.shape} incompatible with vocabulary size {vocab.size}"
        )
    num_frames = lp.shape[0]
    blank = vocab.blank_index
    separator = vocab.separator_index
    alpha_lm = cfg.lm_weight
    alpha_word = cfg.word_score

    root = Hypothesis(
        prefix=(),
        lm_state=lm.initial_state() if lm is not None else (),
        lm_log_prob=0.0,
        word_count=0,
        cur_word=(),
    )
    root.p_blank = 0.0
    root.v_blank = 0.0
    beam: dict[Transcript, Hypothesis] = {(): root}

    for t in range(num_frames):
        frame = lp[t]
        if cfg.token_prune_log_threshold == NEG_INF:
            emit_ok = None  # all tokens allowed
        else:
            cutoff = float(frame.max()) + cfg.token_prune_log_threshold
            emit_ok = frame >= cutoff
        row = frame.tolist()
        blank_lp = row[blank]
        tokens = [
            c
            for c in range(vocab.size)
            if c != blank and (emit_ok is None or emit_ok[c])
        ]

        nxt: dict[Transcript, Hypothesis] = {}
        for prefix, hyp in beam.items():
            p_total = log_add(hyp.p_blank, hyp.p_non_blank)
            v_total = max(hyp.v_blank, hyp.v_non_blank)
            last = prefix[-1] if prefix else -1

            # Blank emission keeps the prefix.
            same = nxt.get(prefix)
            if same is None:
                same = _carry(hyp)
                nxt[prefix] = same
            same.p_blank = log_add(same.p_blank, p_total + blank_lp)
            same.v_blank = max(same.v_blank, v_total + blank_lp)

            for c in tokens:
                token_lp = row[c]
                if c == last:
                    # Re-emitting the last token merges into the same
                    # prefix; only blank-ending mass starts a new copy.
                    same.p_non_blank = log_add(
                        same.p_non_blank, hyp.p_non_blank + token_lp
                    )
                    same.v_non_blank = max(
                        same.v_non_blank, hyp.v_non_blank + token_lp
                    )
                    src_p, src_v = hyp.p_blank, hyp.v_blank
                else:
                    src_p, src_v = p_total, v_total
                if src_p == NEG_INF and src_v == NEG_INF:
                    continue
                child_prefix = prefix + (c,)
                child = nxt.get(child_prefix)
                if child is None:
                    child = _extend(hyp, child_prefix, c, separator, vocab, lm)
                    nxt[child_prefix] = child
                child.p_non_blank = log_add(child.p_non_blank, src_p + token_lp)
                child.v_non_blank = max(child.v_non_blank, src_v + token_lp)

        # Rank by best-alignment mass plus LM terms; keep the top width.
        ranked = sorted(
            nxt.items(),
            key=lambda item: (
                -(
                    max(item[1].v_blank, item[1].v_non_blank)
                    + alpha_lm * item[1].lm_log_prob
                    + alpha_word * item[1].word_count
                ),
                item[0],
            ),
        )
        if cfg.beam_prune_log_margin != NEG_INF and ranked:
            top = ranked[0][1]
            best = (
                max(top.v_blank, top.v_non_blank)
                + alpha_lm * top.lm_log_prob
                + alpha_word * top.word_count
            )
            floor = best + cfg.beam_prune_log_margin
            ranked = [
                item
                for item in ranked
                if max(item[1].v_blank, item[1].v_non_blank)
                + alpha_lm * item[1].lm_log_prob
                + alpha_word * item[1].word_count
                >= floor
            ]
        beam = dict(ranked[: cfg.beam_width])

    finals = [
        (prefix, _finalize(hyp, vocab, lm, cfg)) for prefix, hyp in beam.items()
    ]
    finals.sort(key=lambda item: (-item[1], item[0]))
    return finals[: cfg.beam_width]


def _carry(hyp: Hypothesis) -> Hypothesis:
    """Same-prefix successor: LM bookkeeping is unchanged."""
    return Hypothesis(
        prefix=hyp.prefix,
        lm_state=hyp.lm_state,
        lm_log_prob=hyp.lm_log_prob,
        word_count=hyp.word_count,
        cur_word=hyp.cur_word,
    )


def _extend(
    hyp: Hypothesis,
    child_prefix: Transcript,
    token: int,
    separator: int,
    vocab: Vocabulary,
    lm: NGramModel | None,
) -> Hypothesis:
    """New-prefix successor; a separator that completes a word charges the
    LM step and the word count."""
    lm_state = hyp.lm_state
    lm_log_prob = hyp.lm_log_prob
    word_count = hyp.word_count
    if token == separator:
        if hyp.cur_word:
            if lm is not None:
                word = "".join(vocab.tokens[i] for i in hyp.cur_word)
                step10, lm_state = lm.score_word(lm_state, word)
                lm_log_prob += LN10 * step10
            word_count += 1
        cur_word: Transcript = ()
    else:
        cur_word = hyp.cur_word + (token,)
    return Hypothesis(
        prefix=child_prefix,
        lm_state=lm_state,
        lm_log_prob=lm_log_prob,
        word_count=word_count,
        cur_word=cur_word,
    )


def _finalize(
    hyp: Hypothesis, vocab: Vocabulary, lm: NGramModel | None, cfg: DecodeConfig
) -> float:
    """Ranking key: merged acoustic mass, the LM charged through the
    end-of-sentence transition (trailing word included), and the word score."""
    score = log_add(hyp.p_blank, hyp.p_non_blank)
    word_count = hyp.word_count + (1 if hyp.cur_word else 0)
    lm_log_prob = hyp.lm_log_prob
    if lm is not None:
        state = hyp.lm_state
        if hyp.cur_word:
            word = "".join(vocab.tokens[i] for i in hyp.cur_word)
            step10, state = lm.score_word(state, word)
            lm_log_prob += LN10 * step10
        step10, _ = lm.score_word(state, SENTENCE_END)
        lm_log_prob += LN10 * step10
        score += cfg.lm_weight * lm_log_prob
    return score + cfg.word_score * word_count


def decode_utterance(
    stack: LayerStack,
    head: ProjectionHead,
    vocab: Vocabulary,
    lm: NGramModel | None,
    agg_cfg: AggregationConfig,
    cfg: DecodeConfig,
) -> list[tuple[Transcript, float]]:
    """Full pipeline: aggregated/interpolated logits -> log-softmax -> beam."""
    logprobs = pipeline_logprobs(stack, head, agg_cfg)
    return beam_search_decode(logprobs, vocab, lm, cfg)


@dataclass(frozen=True)
class DecodePipeline:
    """Everything needed to decode a stack file; picklable so manifest
    evaluation can fan utterances out to worker processes."""

    head: ProjectionHead
    vocab: Vocabulary
    lm: NGramModel | None
    agg_cfg: AggregationConfig
    decode_cfg: DecodeConfig

    def decode_stack(self, stack: LayerStack) -> tuple[Transcript, str, float]:
        results = decode_utterance(
            stack, self.head, self.vocab, self.lm, self.agg_cfg, self.decode_cfg
        )
        tokens, score = results[0]
        return tokens, self.vocab.render(tokens), score

    def decode_file(self, path) -> tuple[Transcript, str, float]:
        from .tensor_io import load_layer_stack

        return self.decode_stack(load_layer_stack(path))
