"""Prefix beam search: degenerate equivalences, exhaustive oracles, LM and
word-score behavior, and the full decode pipeline."""

import numpy as np
import pytest

from ctcrelax import (
    AggregationConfig,
    ConfigError,
    DecodeConfig,
    DecodePipeline,
    ShapeError,
    baseline_logits,
    beam_search_decode,
    decode_utterance,
    get_preset,
    greedy_decode,
    log_softmax,
)
from conftest import random_logprobs
from oracles import eq3_exhaustive_best


def plain_cfg(width, **kwargs) -> DecodeConfig:
    return DecodeConfig(beam_width=width, **kwargs)


class TestDegenerateEquivalences:
    def test_width_one_equals_greedy(self, tiny_vocab):
        rng = np.random.default_rng(43)
        for _ in range(50):
            t = int(rng.integers(1, 9))
            lp = random_logprobs(rng, t, tiny_vocab.size)
            beam = beam_search_decode(lp, tiny_vocab, None, plain_cfg(1))
            assert beam[0][0] == greedy_decode(lp, tiny_vocab.blank_index)

    def test_width_one_score_is_valid_log_prob(self, tiny_vocab):
        rng = np.random.default_rng(44)
        lp = random_logprobs(rng, 5, tiny_vocab.size)
        beam = beam_search_decode(lp, tiny_vocab, None, plain_cfg(4))
        for _, score in beam:
            assert score <= 1e-6


class TestExhaustiveOracle:
    def test_matches_brute_force_argmax_with_lm(self, tiny_vocab, beam_lm):
        rng = np.random.default_rng(45)
        cfg = plain_cfg(10**4, lm_weight=0.7, word_score=0.4).without_pruning()
        for _ in range(30):
            t = int(rng.integers(1, 6))
            lp = random_logprobs(rng, t, tiny_vocab.size)
            got = beam_search_decode(lp, tiny_vocab, beam_lm, cfg)
            want_prefix, want_score = eq3_exhaustive_best(
                lp, tiny_vocab, beam_lm, 0.7, 0.4
            )
            assert got[0][0] == want_prefix
            assert got[0][1] == pytest.approx(want_score, abs=1e-8)

    def test_acoustic_only_oracle(self, tiny_vocab):
        rng = np.random.default_rng(46)
        cfg = plain_cfg(10**4).without_pruning()
        for _ in range(20):
            lp = random_logprobs(rng, int(rng.integers(1, 6)), tiny_vocab.size)
            got = beam_search_decode(lp, tiny_vocab, None, cfg)
            want_prefix, want_score = eq3_exhaustive_best(lp, tiny_vocab, None, 0, 0)
            assert got[0][0] == want_prefix
            assert got[0][1] == pytest.approx(want_score, abs=1e-8)


class TestWordScore:
    def test_word_score_breaks_acoustic_tie_toward_more_words(self, tiny_vocab):
        # frames: "a" certain; sep/blank split 50/50; "b" certain.
        # "a b" (a,sep,b) and "ab" (a,blank,b) tie acoustically at 0.5;
        # a positive word score pays twice for the two-word reading.
        tiny = 1e-9
        lp = np.log(
            np.array(
                [
                    [tiny, tiny, 1.0, tiny],
                    [0.5, 0.5, tiny, tiny],
                    [tiny, tiny, tiny, 1.0],
                ]
            )
        )
        lp = log_softmax(lp)  # renormalize the epsilon mass
        up = beam_search_decode(
            lp, tiny_vocab, None, plain_cfg(100, word_score=5.0).without_pruning()
        )
        assert up[0][0] == (2, 1, 3)  # "a b"
        down = beam_search_decode(
            lp, tiny_vocab, None, plain_cfg(100, word_score=-5.0).without_pruning()
        )
        assert down[0][0] == (2, 3)  # "ab"

    def test_hand_scored_gap(self, tiny_vocab):
        # with alpha2 = w the two candidates differ by exactly w
        tiny = 1e-9
        lp = log_softmax(
            np.log(
                np.array(
                    [
                        [tiny, tiny, 1.0, tiny],
                        [0.5, 0.5, tiny, tiny],
                        [tiny, tiny, tiny, 1.0],
                    ]
                )
            )
        )
        res = beam_search_decode(
            lp, tiny_vocab, None, plain_cfg(100, word_score=5.0).without_pruning()
        )
        scores = dict(res)
        assert scores[(2, 1, 3)] - scores[(2, 3)] == pytest.approx(5.0, abs=1e-6)


class TestSearchStructure:
    def test_no_duplicate_prefixes_returned(self, tiny_vocab):
        rng = np.random.default_rng(47)
        lp = random_logprobs(rng, 6, tiny_vocab.size)
        res = beam_search_decode(lp, tiny_vocab, None, plain_cfg(50).without_pruning())
        prefixes = [p for p, _ in res]
        assert len(prefixes) == len(set(prefixes))

    def test_deterministic_across_runs(self, tiny_vocab, beam_lm):
        rng = np.random.default_rng(48)
        lp = random_logprobs(rng, 8, tiny_vocab.size)
        cfg = plain_cfg(20, lm_weight=0.5, word_score=0.3)
        first = beam_search_decode(lp, tiny_vocab, beam_lm, cfg)
        second = beam_search_decode(lp.copy(), tiny_vocab, beam_lm, cfg)
        assert first == second

    def test_monotone_in_beam_width(self, tiny_vocab, beam_lm):
        rng = np.random.default_rng(49)
        for _ in range(10):
            lp = random_logprobs(rng, 7, tiny_vocab.size)
            best_scores = []
            for width in (1, 2, 4, 8, 16, 64):
                cfg = plain_cfg(width, lm_weight=0.4, word_score=0.2).without_pruning()
                res = beam_search_decode(lp, tiny_vocab, beam_lm, cfg)
                best_scores.append(res[0][1])
            for lo, hi in zip(best_scores, best_scores[1:]):
                assert hi >= lo - 1e-12

    def test_returns_at_most_beam_width(self, tiny_vocab):
        rng = np.random.default_rng(50)
        lp = random_logprobs(rng, 6, tiny_vocab.size)
        res = beam_search_decode(lp, tiny_vocab, None, plain_cfg(5).without_pruning())
        assert len(res) <= 5

    def test_shape_mismatch(self, tiny_vocab):
        rng = np.random.default_rng(51)
        lp = random_logprobs(rng, 3, tiny_vocab.size + 1)
        with pytest.raises(ShapeError):
            beam_search_decode(lp, tiny_vocab, None, plain_cfg(4))

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            DecodeConfig(beam_width=0)
        with pytest.raises(ConfigError):
            DecodeConfig(beam_width=1, token_prune_log_threshold=0.5)
        with pytest.raises(ConfigError):
            DecodeConfig(beam_width=1, beam_prune_log_margin=1.0)

    def test_pruning_keeps_the_top_hypothesis(self, tiny_vocab):
        rng = np.random.default_rng(52)
        for _ in range(20):
            lp = random_logprobs(rng, 6, tiny_vocab.size)
            pruned = beam_search_decode(lp, tiny_vocab, None, plain_cfg(1))
            assert pruned[0][0] == greedy_decode(lp, tiny_vocab.blank_index)


class TestDecodeUtterance:
    def test_beta_one_recovers_direct_baseline_decode(self, corpus):
        vocab, head = corpus["vocab"], corpus["head"]
        cfg = plain_cfg(16)
        for stack in corpus["stacks"].values():
            via_pipeline = decode_utterance(
                stack, head, vocab, None,
                AggregationConfig(num_aggregated_layers=4, beta=1.0), cfg,
            )
            direct = beam_search_decode(
                log_softmax(baseline_logits(stack, head)), vocab, None, cfg
            )
            assert via_pipeline == direct

    def test_pure_aggregation_boundary(self, corpus):
        vocab, head = corpus["vocab"], corpus["head"]
        stack = next(iter(corpus["stacks"].values()))
        res = decode_utterance(
            stack, head, vocab, None,
            AggregationConfig(num_aggregated_layers=stack.num_layers, beta=0.0),
            plain_cfg(8),
        )
        assert len(res) >= 1

    def test_table_preset_runs_end_to_end(self, corpus, beam_lm):
        # shipped preset for the 12-layer base model at full resource
        preset = get_preset("w2v-base-960h")
        assert (preset.beta, preset.num_aggregated_layers) == (0.75, 6)
        vocab, head = corpus["vocab"], corpus["head"]
        stack = next(iter(corpus["stacks"].values()))
        assert stack.num_layers == preset.num_layers
        res = decode_utterance(
            stack, head, vocab, beam_lm,
            AggregationConfig(
                num_aggregated_layers=preset.num_aggregated_layers, beta=preset.beta
            ),
            plain_cfg(12, lm_weight=0.5, word_score=0.1),
        )
        assert 1 <= len(res) <= 12
        scores = [s for _, s in res]
        assert scores == sorted(scores, reverse=True)


class TestPipelineObject:
    def test_decode_file_round_trip(self, corpus):
        pipeline = DecodePipeline(
            head=corpus["head"],
            vocab=corpus["vocab"],
            lm=None,
            agg_cfg=AggregationConfig(num_aggregated_layers=1, beta=1.0),
            decode_cfg=plain_cfg(1),
        )
        entry = corpus["manifest"].entries[0]
        tokens, text, score = pipeline.decode_file(entry.stack_path)
        from ctcrelax import normalize_text

        assert normalize_text(text) == entry.reference
