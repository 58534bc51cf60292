"""Shared fixtures: toy ARPA models, small vocabularies, and a synthetic
fixture corpus (stacks + head + vocab + manifest + LM on disk)."""

from __future__ import annotations

import io

import numpy as np
import pytest

from ctcrelax import (
    AggregationConfig,
    EvalManifest,
    LayerStack,
    ManifestEntry,
    ProjectionHead,
    Vocabulary,
    greedy_decode,
    normalize_text,
    parse_arpa,
    pipeline_logprobs,
    save_layer_stack,
    save_projection_head,
    save_vocabulary,
    write_manifest,
)

# 6 n-gram lines; hand-computed values used across LM tests:
#   P(the | <s>)     = -0.30103                   (bigram hit)
#   P(</s> | <s>)    = -0.2 + -1.0   = -1.2       (backoff: <s> bow + </s> uni)
#   P(<unk> | the)   = -0.3 + -1.2   = -1.5       (backoff: the bow + unk uni)
#   P(</s> | the)    = -0.60206                   (bigram hit)
TOY_ARPA = """\\data\\
ngram 1=4
ngram 2=2

\\1-grams:
-0.5\t<s>\t-0.2
-1.0\t</s>
-0.7\tthe\t-0.3
-1.2\t<unk>

\\2-grams:
-0.30103\t<s> the
-0.60206\tthe </s>

\\end\\
"""

# Word LM over single-letter words "a"/"b" for tiny beam-search instances.
BEAM_ARPA = """\\data\\
ngram 1=5
ngram 2=4

\\1-grams:
-99\t<s>\t-0.30103
-0.69897\t</s>
-0.52288\ta\t-0.30103
-0.69897\tb\t-0.1549
-1.0\t<unk>

\\2-grams:
-0.22185\t<s> a
-0.39794\ta b
-0.52288\tb a
-0.30103\ta </s>

\\end\\
"""


@pytest.fixture(scope="session")
def toy_lm():
    return parse_arpa(io.StringIO(TOY_ARPA))


@pytest.fixture(scope="session")
def beam_lm():
    return parse_arpa(io.StringIO(BEAM_ARPA))


@pytest.fixture(scope="session")
def tiny_vocab():
    """blank, separator, and the two letters the toy word LM knows."""
    return Vocabulary(tokens=("<blank>", "<sep>", "a", "b"), blank_index=0, separator_index=1)


def random_logprobs(rng: np.random.Generator, num_frames: int, vocab_size: int) -> np.ndarray:
    """Random valid log-distributions, one row per frame."""
    return np.log(rng.dirichlet(np.ones(vocab_size), size=num_frames))


@pytest.fixture(scope="session")
def corpus(tmp_path_factory) -> dict:
    """Synthetic fixture corpus: 12-layer stacks through a shared head.

    Hidden states are diffuse random normals, so the projected
    distributions stay broad and the beam fills up; references are the
    baseline greedy transcripts, making the beta=1 pipeline a zero-WER
    baseline the tuner tests can reason about.
    """
    root = tmp_path_factory.mktemp("corpus")
    rng = np.random.default_rng(20240817)

    letters = tuple("abcdefghijkl")
    vocab = Vocabulary(
        tokens=("<blank>", "<sep>") + letters, blank_index=0, separator_index=1
    )
    dim = 8
    head = ProjectionHead(
        weights=rng.normal(scale=0.8, size=(vocab.size, dim)).astype(np.float32),
        bias=rng.normal(scale=0.1, size=vocab.size).astype(np.float32),
    )
    head_path = root / "model.sslp"
    save_projection_head(head, head_path)
    vocab_path = root / "model.vocab"
    save_vocabulary(vocab, vocab_path)

    entries = []
    stacks = {}
    for i in range(2):
        stack = LayerStack(rng.normal(scale=1.0, size=(12, 48, dim)).astype(np.float32))
        path = root / f"utt{i:02d}.ssla"
        save_layer_stack(stack, path)
        baseline = pipeline_logprobs(
            stack, head, AggregationConfig(num_aggregated_layers=1, beta=1.0)
        )
        reference = normalize_text(
            vocab.render(greedy_decode(baseline, vocab.blank_index))
        )
        entries.append(ManifestEntry(f"utt{i:02d}", path, reference))
        stacks[f"utt{i:02d}"] = stack

    manifest = EvalManifest(entries=tuple(entries))
    manifest_path = root / "dev.manifest"
    with open(manifest_path, "w", encoding="utf-8") as f:
        write_manifest(manifest, f)

    lm_path = root / "lm.arpa"
    lm_path.write_text(BEAM_ARPA, encoding="utf-8")

    return {
        "root": root,
        "vocab": vocab,
        "vocab_path": vocab_path,
        "head": head,
        "head_path": head_path,
        "manifest": manifest,
        "manifest_path": manifest_path,
        "stacks": stacks,
        "lm_path": lm_path,
        "dim": dim,
    }
