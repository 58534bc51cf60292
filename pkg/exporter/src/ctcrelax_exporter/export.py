"""Checkpoint-to-tensor export.

Loads a fine-tuned wav2vec2-style CTC checkpoint (a Hugging Face model
directory or hub id), runs audio through it with hidden-state output
enabled, and writes the decoder-side artifacts: one ``.ssla`` stack per
utterance (all N post-layer hidden states, lowest layer first), a
``.sslp`` projection head, a ``.vocab`` token list, and a ``.manifest``
evaluation list.

The export is inference-mode and deterministic: the same clip through the
same checkpoint produces bit-identical files.  The key correctness oracle
is greedy parity: the checkpoint's own argmax transcription must equal
greedy CTC decoding over the exported top layer and head.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .audio import AudioError, read_wav_16k_mono
from .formats import (
    BLANK_TOKEN,
    SEPARATOR_TOKEN,
    write_head_file,
    write_manifest_file,
    write_stack_file,
    write_vocab_file,
)

logger = logging.getLogger(__name__)


class ExportError(Exception):
    """Checkpoint lacks a required piece (projection head, CTC vocab)."""


@dataclass
class ExportJob:
    """One batch export: a checkpoint, a list of clips, an output directory.

    corpus entries are (utterance_id, wav_path, reference transcript).
    """

    model_ref: str
    corpus: list[tuple[str, Path, str]]
    out_dir: Path

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)


@dataclass
class ExportResult:
    head_path: Path
    vocab_path: Path
    manifest_path: Path
    stack_paths: dict[str, Path] = field(default_factory=dict)
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (utt_id, reason)


class CheckpointExporter:
    """Wraps a loaded CTC checkpoint with export and probing helpers."""

    def __init__(self, model_ref: str):
        from transformers import Wav2Vec2ForCTC, Wav2Vec2Processor

        self.model = Wav2Vec2ForCTC.from_pretrained(model_ref)
        self.model.eval()
        self.processor = Wav2Vec2Processor.from_pretrained(model_ref)
        if getattr(self.model, "lm_head", None) is None:
            raise ExportError(f"{model_ref}: checkpoint has no CTC projection head")
        config = self.model.config
        if config.vocab_size != self.model.lm_head.out_features:
            raise ExportError(
                f"{model_ref}: projection output {self.model.lm_head.out_features} "
                f"disagrees with vocab size {config.vocab_size}"
            )

    # -- checkpoint metadata -------------------------------------------------

    @property
    def num_layers(self) -> int:
        return self.model.config.num_hidden_layers

    @property
    def hidden_dim(self) -> int:
        return self.model.config.hidden_size

    @property
    def vocab_size(self) -> int:
        return self.model.config.vocab_size

    def expected_frame_count(self, num_samples: int) -> int:
        """Output frames for a clip length, from the conv front-end config."""
        length = num_samples
        config = self.model.config
        for kernel, stride in zip(config.conv_kernel, config.conv_stride):
            length = (length - kernel) // stride + 1
        return length

    # -- forward passes ------------------------------------------------------

    def _input_values(self, samples: np.ndarray) -> torch.Tensor:
        features = self.processor(
            samples, sampling_rate=16_000, return_tensors="pt"
        )
        return features.input_values

    def hidden_stack(self, samples: np.ndarray) -> np.ndarray:
        """All N post-layer hidden states as float32 [N, T, D], lowest first."""
        with torch.no_grad():
            out = self.model(
                self._input_values(samples), output_hidden_states=True
            )
        # hidden_states[0] is the pre-layer embedding; [1:] are layer outputs
        layers = [h.squeeze(0).numpy().astype(np.float32) for h in out.hidden_states[1:]]
        return np.stack(layers)

    def native_logits(self, samples: np.ndarray) -> np.ndarray:
        with torch.no_grad():
            out = self.model(self._input_values(samples))
        return out.logits.squeeze(0).numpy()

    def native_greedy_transcription(self, samples: np.ndarray) -> str:
        """The checkpoint ecosystem's own argmax decode (parity oracle)."""
        ids = np.argmax(self.native_logits(samples), axis=-1)
        return self.processor.batch_decode(ids[None, :])[0]

    # -- artifact writers ----------------------------------------------------

    def export_head_and_vocab(self, out_dir: Path) -> tuple[Path, Path]:
        out_dir.mkdir(parents=True, exist_ok=True)
        head_path = out_dir / "model.sslp"
        weights = self.model.lm_head.weight.detach().numpy().astype(np.float32)
        bias = self.model.lm_head.bias.detach().numpy().astype(np.float32)
        write_head_file(head_path, weights, bias)

        vocab_path = out_dir / "model.vocab"
        write_vocab_file(vocab_path, self.export_tokens())
        return head_path, vocab_path

    def export_tokens(self) -> list[str]:
        """Token list in id order with blank/separator renamed to the
        decoder-side markers."""
        tokenizer = self.processor.tokenizer
        vocab = tokenizer.get_vocab()
        if len(vocab) != self.vocab_size:
            raise ExportError(
                f"tokenizer has {len(vocab)} tokens, config says {self.vocab_size}"
            )
        by_id = sorted(vocab.items(), key=lambda kv: kv[1])
        blank_id = self.model.config.pad_token_id
        separator = tokenizer.word_delimiter_token
        tokens = []
        for token, idx in by_id:
            if idx == blank_id:
                tokens.append(BLANK_TOKEN)
            elif token == separator:
                tokens.append(SEPARATOR_TOKEN)
            else:
                tokens.append(token)
        return tokens

    def export_utterance(self, wav_path: Path, out_path: Path) -> tuple[Path, int]:
        """Write one clip's layer stack; returns (path, frame count)."""
        samples = read_wav_16k_mono(wav_path)
        stack = self.hidden_stack(samples)
        write_stack_file(out_path, stack)
        return out_path, stack.shape[1]


def run_export(job: ExportJob) -> ExportResult:
    """Export a whole corpus: head, vocab, stacks, and the manifest.

    Undecodable clips are skipped with a logged reason; everything else
    aborts the run (a broken checkpoint should not half-export).
    """
    exporter = CheckpointExporter(job.model_ref)
    job.out_dir.mkdir(parents=True, exist_ok=True)
    head_path, vocab_path = exporter.export_head_and_vocab(job.out_dir)

    entries: list[tuple[str, Path, str]] = []
    result = ExportResult(
        head_path=head_path,
        vocab_path=vocab_path,
        manifest_path=job.out_dir / "corpus.manifest",
    )
    for utt_id, wav_path, reference in job.corpus:
        out_path = job.out_dir / f"{utt_id}.ssla"
        try:
            exporter.export_utterance(wav_path, out_path)
        except AudioError as exc:
            logger.warning("skipping %s: %s", utt_id, exc)
            result.skipped.append((utt_id, str(exc)))
            continue
        result.stack_paths[utt_id] = out_path
        entries.append((utt_id, out_path.name, reference))

    write_manifest_file(result.manifest_path, entries)
    return result
