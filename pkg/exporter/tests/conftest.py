"""Fixtures: a tiny wav2vec2-style CTC checkpoint built offline, plus a
synthetic 16 kHz WAV corpus.

The sandbox has no model-hub access, so the "small public checkpoint" is
stood up locally from a config with a fixed seed; the parity oracle
(native greedy transcription vs. exported-tensor decoding) is exactly as
meaningful with random weights as with trained ones.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
import torch

from ctcrelax_exporter.audio import write_wav_16k_mono

LETTERS = [chr(c) for c in range(ord("a"), ord("z") + 1)] + ["'"]


@pytest.fixture(scope="session")
def checkpoint(tmp_path_factory) -> Path:
    """A 3-layer, 32-dim, 32-token CTC model saved as a local checkpoint."""
    from transformers import (
        Wav2Vec2Config,
        Wav2Vec2CTCTokenizer,
        Wav2Vec2FeatureExtractor,
        Wav2Vec2ForCTC,
        Wav2Vec2Processor,
    )

    ckpt_dir = tmp_path_factory.mktemp("checkpoint")
    vocab = {"<pad>": 0, "<s>": 1, "</s>": 2, "<unk>": 3, "|": 4}
    for i, ch in enumerate(LETTERS):
        vocab[ch.upper()] = 5 + i
    vocab_file = ckpt_dir / "vocab.json"
    vocab_file.write_text(json.dumps(vocab))

    tokenizer = Wav2Vec2CTCTokenizer(
        str(vocab_file),
        bos_token="<s>",
        eos_token="</s>",
        unk_token="<unk>",
        pad_token="<pad>",
        word_delimiter_token="|",
    )
    feature_extractor = Wav2Vec2FeatureExtractor(
        feature_size=1,
        sampling_rate=16_000,
        padding_value=0.0,
        do_normalize=True,
        return_attention_mask=False,
    )
    processor = Wav2Vec2Processor(
        feature_extractor=feature_extractor, tokenizer=tokenizer
    )

    torch.manual_seed(1234)
    config = Wav2Vec2Config(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=3,
        num_attention_heads=2,
        intermediate_size=64,
        conv_dim=(24, 24, 24),
        conv_kernel=(8, 5, 5),
        conv_stride=(4, 4, 4),
        num_conv_pos_embeddings=16,
        num_conv_pos_embedding_groups=4,
        pad_token_id=0,
    )
    model = Wav2Vec2ForCTC(config)
    model.eval()
    model.save_pretrained(ckpt_dir)
    processor.save_pretrained(ckpt_dir)
    return ckpt_dir


@pytest.fixture(scope="session")
def wav_corpus(tmp_path_factory) -> list[tuple[str, Path, str]]:
    """Twelve short clips (tones + noise bursts) with synthetic references."""
    audio_dir = tmp_path_factory.mktemp("audio")
    rng = np.random.default_rng(99)
    corpus = []
    for i in range(12):
        seconds = float(rng.uniform(0.3, 0.6))
        n = int(16_000 * seconds)
        t = np.arange(n) / 16_000
        freq = float(rng.uniform(120, 2200))
        samples = 0.4 * np.sin(2 * np.pi * freq * t) + 0.1 * rng.normal(size=n)
        path = audio_dir / f"utt{i:02d}.wav"
        write_wav_16k_mono(path, samples)
        words = [
            "".join(rng.choice(list("abcdefgh"), size=rng.integers(2, 6)))
            for _ in range(rng.integers(1, 4))
        ]
        corpus.append((f"utt{i:02d}", path, " ".join(words)))
    return corpus
