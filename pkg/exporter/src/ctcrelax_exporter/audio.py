"""Minimal 16 kHz mono WAV ingestion for export jobs."""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np

TARGET_SAMPLE_RATE = 16_000


class AudioError(Exception):
    """Clip cannot be used: wrong container, rate, or channel count."""


def read_wav_16k_mono(path: Path | str) -> np.ndarray:
    """Load a 16 kHz mono PCM16 WAV as float32 in [-1, 1]."""
    try:
        with wave.open(str(path), "rb") as wav:
            channels = wav.getnchannels()
            rate = wav.getframerate()
            width = wav.getsampwidth()
            frames = wav.readframes(wav.getnframes())
    except (wave.Error, EOFError, OSError) as exc:
        raise AudioError(f"{path}: not a readable WAV file ({exc})") from exc
    if channels != 1:
        raise AudioError(f"{path}: expected mono, got {channels} channels")
    if rate != TARGET_SAMPLE_RATE:
        raise AudioError(f"{path}: expected {TARGET_SAMPLE_RATE} Hz, got {rate}")
    if width != 2:
        raise AudioError(f"{path}: expected 16-bit PCM, got {8 * width}-bit")
    samples = np.frombuffer(frames, dtype="<i2").astype(np.float32) / 32768.0
    if samples.size == 0:
        raise AudioError(f"{path}: empty clip")
    return samples


def write_wav_16k_mono(path: Path | str, samples: np.ndarray) -> None:
    """Write float samples in [-1, 1] as 16 kHz mono PCM16 (test/demo aid)."""
    pcm = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    pcm = (pcm * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(TARGET_SAMPLE_RATE)
        wav.writeframes(pcm.tobytes())
