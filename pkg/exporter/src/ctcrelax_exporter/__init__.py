"""Checkpoint exporter: materializes ctcrelax tensor files from
wav2vec2-style CTC checkpoints."""

from .audio import AudioError, read_wav_16k_mono, write_wav_16k_mono
from .export import CheckpointExporter, ExportError, ExportJob, ExportResult, run_export
from .formats import (
    write_head_file,
    write_manifest_file,
    write_stack_file,
    write_vocab_file,
)

__version__ = "0.1.0"
