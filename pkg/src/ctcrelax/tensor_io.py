"""On-disk formats for hidden-state stacks, projection heads, vocabularies,
and evaluation manifests.

Binary layouts (all little-endian, 32-bit floats):

``.ssla`` layer stack::

    "SSLA" | version u32 | N u32 | T u32 | D u32 | N*T*D float32

with the payload ordered layer-major then time-major, layer index 1 being
the lowest transformer layer and N the top.  Total size is
``20 + 4*N*T*D`` bytes.

``.sslp`` projection head::

    "SSLP" | version u32 | C u32 | D u32 | C*D float32 (row-major) | C float32

``.vocab`` is a UTF-8 text file with one token per line; the literal lines
``<blank>`` and ``<sep>`` designate the CTC blank and the word separator
and must each occur exactly once.

``.manifest`` is a UTF-8 text file with one tab-separated record per line:
``utterance_id <TAB> stack_path <TAB> reference``.  Relative stack paths
resolve against the manifest's own directory.

Readers are pure and validate everything up front; loaded values are
immutable and safe to share across parallel decoding workers.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, TextIO

import numpy as np

from .errors import (
    FormatError,
    IoError,
    ParseError,
    TruncationError,
    VersionError,
)

STACK_MAGIC = b"SSLA"
HEAD_MAGIC = b"SSLP"
FORMAT_VERSION = 1

BLANK_TOKEN = "<blank>"
SEPARATOR_TOKEN = "<sep>"


@dataclass(frozen=True)
class LayerStack:
    """Per-utterance hidden states, shaped [num_layers, num_frames, hidden_dim].

    Layer index 0 of ``data`` is the lowest transformer layer; index
    ``num_layers - 1`` is the top.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 3:
            raise ValueError(f"stack data must be 3-D [N,T,D], got ndim={arr.ndim}")
        if min(arr.shape) < 1:
            raise ValueError(f"stack dimensions must be positive, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("stack contains NaN or Inf")
        object.__setattr__(self, "data", arr)

    @property
    def num_layers(self) -> int:
        return self.data.shape[0]

    @property
    def num_frames(self) -> int:
        return self.data.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class ProjectionHead:
    """Affine map from hidden dim D to vocabulary size C: ``weights @ h + bias``."""

    weights: np.ndarray  # [C, D]
    bias: np.ndarray  # [C]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float32)
        b = np.asarray(self.bias, dtype=np.float32)
        if w.ndim != 2:
            raise ValueError(f"weights must be 2-D [C,D], got ndim={w.ndim}")
        if b.ndim != 1 or b.shape[0] != w.shape[0]:
            raise ValueError(
                f"bias length {b.shape} does not match weight rows {w.shape}"
            )
        if min(w.shape) < 1:
            raise ValueError(f"head dimensions must be positive, got {w.shape}")
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise ValueError("projection head contains NaN or Inf")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def vocab_size(self) -> int:
        return self.weights.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class Vocabulary:
    """Ordered token list with designated CTC blank and word-separator indices."""

    tokens: tuple[str, ...]
    blank_index: int
    separator_index: int

    def __post_init__(self):
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("vocabulary tokens must be unique")
        if self.blank_index == self.separator_index:
            raise ValueError("blank and separator must differ")
        for idx in (self.blank_index, self.separator_index):
            if not 0 <= idx < len(self.tokens):
                raise ValueError(f"special index {idx} out of range")

    @property
    def size(self) -> int:
        return len(self.tokens)

    def render(self, token_ids: Iterable[int]) -> str:
        """Render a collapsed token sequence as text, separator -> space."""
        parts = []
        for tok in token_ids:
            parts.append(" " if tok == self.separator_index else self.tokens[tok])
        return "".join(parts)

    def encode(self, text: str) -> tuple[int, ...]:
        """Inverse of :meth:`render` for single-character tokens; space ->
        separator.  Falls back across case so lowercase references encode
        against uppercase character vocabularies."""
        lookup = {t: i for i, t in enumerate(self.tokens)}
        ids = []
        for ch in text:
            if ch == " ":
                ids.append(self.separator_index)
                continue
            for candidate in (ch, ch.upper(), ch.lower()):
                if candidate in lookup:
                    ids.append(lookup[candidate])
                    break
            else:
                raise ValueError(f"character {ch!r} not in vocabulary")
        return tuple(ids)


@dataclass(frozen=True)
class ManifestEntry:
    utterance_id: str
    stack_path: Path
    reference: str


@dataclass(frozen=True)
class EvalManifest:
    """Evaluation list: unique utterance ids with stack paths and references."""

    entries: tuple[ManifestEntry, ...] = field(default_factory=tuple)


def write_layer_stack(stack: LayerStack, sink: BinaryIO) -> int:
    """Serialize a stack; returns total bytes written (20 + 4*N*T*D)."""
    header = STACK_MAGIC + struct.pack(
        "<IIII", FORMAT_VERSION, stack.num_layers, stack.num_frames, stack.hidden_dim
    )
    payload = np.ascontiguousarray(stack.data, dtype="<f4").tobytes()
    try:
        sink.write(header)
        sink.write(payload)
    except OSError as exc:
        raise IoError(f"stack write failed: {exc}") from exc
    return len(header) + len(payload)


def read_layer_stack(source: BinaryIO) -> LayerStack:
    """Inverse of :func:`write_layer_stack`; validates magic, version, and payload."""
    magic, version, dims = _read_header(source, STACK_MAGIC, ndims=3)
    n, t, d = dims
    if min(dims) < 1:
        raise FormatError(f"non-positive stack dimensions {dims}")
    data = _read_floats(source, n * t * d, what="stack payload")
    _expect_exhausted(source, what="stack")
    arr = data.reshape(n, t, d)
    if not np.isfinite(arr).all():
        raise ValueError("stack payload contains NaN or Inf")
    return LayerStack(data=arr)


def write_projection_head(head: ProjectionHead, sink: BinaryIO) -> int:
    """Serialize a projection head; returns total bytes written."""
    header = HEAD_MAGIC + struct.pack(
        "<III", FORMAT_VERSION, head.vocab_size, head.hidden_dim
    )
    payload = (
        np.ascontiguousarray(head.weights, dtype="<f4").tobytes()
        + np.ascontiguousarray(head.bias, dtype="<f4").tobytes()
    )
    try:
        sink.write(header)
        sink.write(payload)
    except OSError as exc:
        raise IoError(f"head write failed: {exc}") from exc
    return len(header) + len(payload)


def read_projection_head(source: BinaryIO) -> ProjectionHead:
    """Parse a ``.sslp`` head: magic, version, C, D, weights row-major, bias."""
    magic, version, dims = _read_header(source, HEAD_MAGIC, ndims=2)
    c, d = dims
    if min(dims) < 1:
        raise FormatError(f"non-positive head dimensions {dims}")
    weights = _read_floats(source, c * d, what="head weights").reshape(c, d)
    bias = _read_floats(source, c, what="head bias")
    _expect_exhausted(source, what="head")
    if not (np.isfinite(weights).all() and np.isfinite(bias).all()):
        raise ValueError("projection head contains NaN or Inf")
    return ProjectionHead(weights=weights, bias=bias)


def read_vocabulary(source: TextIO) -> Vocabulary:
    """Parse a token-per-line vocabulary with ``<blank>``/``<sep>`` markers."""
    tokens = [line.rstrip("\n") for line in source]
    seen: set[str] = set()
    for i, tok in enumerate(tokens):
        if tok in seen:
            raise ParseError(f"duplicate token {tok!r} at line {i + 1}")
        seen.add(tok)
    if BLANK_TOKEN not in seen:
        raise ParseError(f"vocabulary is missing the {BLANK_TOKEN!r} line")
    if SEPARATOR_TOKEN not in seen:
        raise ParseError(f"vocabulary is missing the {SEPARATOR_TOKEN!r} line")
    return Vocabulary(
        tokens=tuple(tokens),
        blank_index=tokens.index(BLANK_TOKEN),
        separator_index=tokens.index(SEPARATOR_TOKEN),
    )


def write_vocabulary(vocab: Vocabulary, sink: TextIO) -> None:
    for tok in vocab.tokens:
        sink.write(tok + "\n")


def read_manifest(source: TextIO, base_dir: Path | None = None) -> EvalManifest:
    """Parse a tab-separated manifest and verify every stack path resolves."""
    base = Path(base_dir) if base_dir is not None else Path(".")
    entries: list[ManifestEntry] = []
    seen_ids: set[str] = set()
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(f"manifest line {lineno}: expected 3 tab-separated fields")
        utt_id, path_str, reference = fields
        if utt_id in seen_ids:
            raise ParseError(f"manifest line {lineno}: duplicate utterance id {utt_id!r}")
        seen_ids.add(utt_id)
        path = Path(path_str)
        if not path.is_absolute():
            path = base / path
        if not path.exists():
            raise ParseError(f"manifest line {lineno}: stack path {path} does not exist")
        entries.append(ManifestEntry(utt_id, path, reference))
    return EvalManifest(entries=tuple(entries))


def write_manifest(manifest: EvalManifest, sink: TextIO) -> None:
    for e in manifest.entries:
        sink.write(f"{e.utterance_id}\t{e.stack_path}\t{e.reference}\n")


def load_layer_stack(path: Path | str) -> LayerStack:
    with open(path, "rb") as f:
        return read_layer_stack(f)


def save_layer_stack(stack: LayerStack, path: Path | str) -> int:
    with open(path, "wb") as f:
        return write_layer_stack(stack, f)


def load_projection_head(path: Path | str) -> ProjectionHead:
    with open(path, "rb") as f:
        return read_projection_head(f)


def save_projection_head(head: ProjectionHead, path: Path | str) -> int:
    with open(path, "wb") as f:
        return write_projection_head(head, f)


def load_vocabulary(path: Path | str) -> Vocabulary:
    with open(path, "r", encoding="utf-8") as f:
        return read_vocabulary(f)


def save_vocabulary(vocab: Vocabulary, path: Path | str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        write_vocabulary(vocab, f)


def load_manifest(path: Path | str) -> EvalManifest:
    p = Path(path)
    with open(p, "r", encoding="utf-8") as f:
        return read_manifest(f, base_dir=p.parent)


def _read_header(source: BinaryIO, expect_magic: bytes, ndims: int):
    try:
        head = source.read(4 + 4 + 4 * ndims)
    except OSError as exc:
        raise IoError(f"header read failed: {exc}") from exc
    if len(head) < 4 or head[:4] != expect_magic:
        raise FormatError(
            f"bad magic {head[:4]!r}, expected {expect_magic.decode('ascii')!r}"
        )
    if len(head) < 4 + 4 + 4 * ndims:
        raise TruncationError("header truncated")
    version = struct.unpack_from("<I", head, 4)[0]
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported format version {version}")
    dims = struct.unpack_from(f"<{ndims}I", head, 8)
    return head[:4], version, dims


def _expect_exhausted(source: BinaryIO, what: str) -> None:
    # the header fully determines the payload length, so trailing bytes
    # mean the file does not match its own header
    if source.read(1):
        raise FormatError(f"{what}: trailing data beyond the header-declared payload")


def _read_floats(source: BinaryIO, count: int, what: str) -> np.ndarray:
    try:
        raw = source.read(4 * count)
    except OSError as exc:
        raise IoError(f"{what} read failed: {exc}") from exc
    if len(raw) < 4 * count:
        raise TruncationError(
            f"{what}: expected {4 * count} bytes, got {len(raw)}"
        )
    return np.frombuffer(raw, dtype="<f4", count=count).copy()
