"""Writers for the ctcrelax on-disk interfaces.

These deliberately reimplement the published formats rather than import
the decoder package: the byte layout is the contract between the two
sides.

``.ssla``: "SSLA" | version=1 u32 | N u32 | T u32 | D u32 | N*T*D float32,
little-endian, layer-major (layer 1 = lowest transformer layer).

``.sslp``: "SSLP" | version=1 u32 | C u32 | D u32 | C*D float32 row-major
weights | C float32 biases.

``.vocab``: one token per line; the literal lines ``<blank>`` and
``<sep>`` mark the CTC blank and the word separator.

``.manifest``: ``utterance_id<TAB>stack_path<TAB>reference`` per line.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1

BLANK_TOKEN = "<blank>"
SEPARATOR_TOKEN = "<sep>"


def write_stack_file(path: Path | str, hidden: np.ndarray) -> int:
    """Write an [N, T, D] float32 stack; returns bytes written."""
    arr = np.ascontiguousarray(hidden, dtype="<f4")
    if arr.ndim != 3:
        raise ValueError(f"stack must be [layers, frames, dim], got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("stack contains NaN or Inf")
    n, t, d = arr.shape
    header = b"SSLA" + struct.pack("<IIII", FORMAT_VERSION, n, t, d)
    payload = arr.tobytes()
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload)
    return len(header) + len(payload)


def write_head_file(path: Path | str, weights: np.ndarray, bias: np.ndarray) -> int:
    """Write a [C, D] weight matrix and [C] bias; returns bytes written."""
    w = np.ascontiguousarray(weights, dtype="<f4")
    b = np.ascontiguousarray(bias, dtype="<f4")
    if w.ndim != 2 or b.ndim != 1 or b.shape[0] != w.shape[0]:
        raise ValueError(f"bad head shapes: weights {w.shape}, bias {b.shape}")
    if not (np.isfinite(w).all() and np.isfinite(b).all()):
        raise ValueError("projection head contains NaN or Inf")
    c, d = w.shape
    header = b"SSLP" + struct.pack("<III", FORMAT_VERSION, c, d)
    payload = w.tobytes() + b.tobytes()
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload)
    return len(header) + len(payload)


def write_vocab_file(path: Path | str, tokens: list[str]) -> None:
    if BLANK_TOKEN not in tokens or SEPARATOR_TOKEN not in tokens:
        raise ValueError(f"vocabulary must contain {BLANK_TOKEN} and {SEPARATOR_TOKEN}")
    if len(set(tokens)) != len(tokens):
        raise ValueError("vocabulary tokens must be unique")
    with open(path, "w", encoding="utf-8") as f:
        for tok in tokens:
            f.write(tok + "\n")


def write_manifest_file(
    path: Path | str, entries: list[tuple[str, Path | str, str]]
) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for utt_id, stack_path, reference in entries:
            f.write(f"{utt_id}\t{stack_path}\t{reference}\n")
