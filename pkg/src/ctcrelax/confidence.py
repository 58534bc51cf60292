"""Per-layer confidence analytics: how peaked the projected distributions
are at each transformer layer, which token each layer would pick per
frame, and per-frame top-k probability traces.

Probing projects the raw hidden states of every layer through the shared
head (no L2 normalization here; that belongs to the decoding path) and
softmaxes at temperature 1.  Confidence is reported both as mean max
probability and mean entropy so either reading of "confidence" is
covered.  All frames count toward the means; there is no blank
filtering.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .aggregation import log_softmax, softmax
from .errors import ConfigError, ShapeError
from .tensor_io import LayerStack, ProjectionHead


@dataclass(frozen=True)
class LayerConfidenceProfile:
    """Mean max-probability and mean entropy per probed layer, low to top.

    layer_index is 1-based, matching the "layer N is the top" convention.
    """

    layer_index: tuple[int, ...]
    mean_max_prob: tuple[float, ...]
    mean_entropy_nats: tuple[float, ...]


def frame_confidence(probs: np.ndarray) -> tuple[float, float]:
    """(max probability, entropy in nats) of one frame's distribution.

    0 * ln 0 counts as 0, so one-hot rows have exactly zero entropy.
    """
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1:
        raise ValueError(f"expected a probability vector, got ndim={p.ndim}")
    if (p < 0).any() or abs(p.sum() - 1.0) > 1e-6:
        raise ValueError("input is not a normalized probability distribution")
    nonzero = p[p > 0]
    entropy = float(-(nonzero * np.log(nonzero)).sum())
    return float(p.max()), entropy


def layer_confidence_profile(
    stack: LayerStack, head: ProjectionHead
) -> LayerConfidenceProfile:
    """Probe every layer: project raw hidden states, softmax, average the
    per-frame (max prob, entropy) over frames."""
    if stack.hidden_dim != head.hidden_dim:
        raise ShapeError(
            f"stack hidden_dim {stack.hidden_dim} != head hidden_dim {head.hidden_dim}"
        )
    weights = head.weights.T.astype(np.float64)
    bias = head.bias.astype(np.float64)
    indices, max_probs, entropies = [], [], []
    for n in range(stack.num_layers):
        logits = stack.data[n].astype(np.float64) @ weights + bias  # [T, C]
        probs = softmax(logits)
        logp = log_softmax(logits)
        # -sum p*log p with the p=0 limit handled by masking
        ent = -np.where(probs > 0, probs * logp, 0.0).sum(axis=1)
        indices.append(n + 1)
        max_probs.append(float(probs.max(axis=1).mean()))
        entropies.append(float(ent.mean()))
    return LayerConfidenceProfile(
        layer_index=tuple(indices),
        mean_max_prob=tuple(max_probs),
        mean_entropy_nats=tuple(entropies),
    )


def mean_profile(profiles: list[LayerConfidenceProfile]) -> LayerConfidenceProfile:
    """Average several same-depth profiles layer-wise (manifest-level mean)."""
    if not profiles:
        raise ConfigError("cannot average zero profiles")
    depth = profiles[0].layer_index
    for p in profiles:
        if p.layer_index != depth:
            raise ShapeError("profiles disagree on layer count")
    return LayerConfidenceProfile(
        layer_index=depth,
        mean_max_prob=tuple(
            float(np.mean([p.mean_max_prob[i] for p in profiles]))
            for i in range(len(depth))
        ),
        mean_entropy_nats=tuple(
            float(np.mean([p.mean_entropy_nats[i] for p in profiles]))
            for i in range(len(depth))
        ),
    )


def token_evolution(stack: LayerStack, head: ProjectionHead) -> np.ndarray:
    """[N, T] grid of per-layer per-frame argmax tokens (ties to lowest index)."""
    if stack.hidden_dim != head.hidden_dim:
        raise ShapeError(
            f"stack hidden_dim {stack.hidden_dim} != head hidden_dim {head.hidden_dim}"
        )
    weights = head.weights.T.astype(np.float64)
    bias = head.bias.astype(np.float64)
    logits = stack.data.astype(np.float64) @ weights + bias  # [N, T, C]
    return np.argmax(logits, axis=2)


def top_k_trace(logits: np.ndarray, k: int) -> list[list[tuple[int, float]]]:
    """Per frame, the k largest softmax probabilities with their tokens,
    descending; equal probabilities order by lower token index."""
    logits = np.asarray(logits, dtype=np.float64)
    vocab_size = logits.shape[1]
    if not 1 <= k <= vocab_size:
        raise ConfigError(f"k must be in [1, {vocab_size}], got {k}")
    probs = softmax(logits)
    trace: list[list[tuple[int, float]]] = []
    for row in probs:
        # stable sort on -p keeps the original (ascending-index) order on ties
        order = np.argsort(-row, kind="stable")[:k]
        trace.append([(int(i), float(row[i])) for i in order])
    return trace


def write_profile_csv(profile: LayerConfidenceProfile, sink: TextIO) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(["layer", "mean_max_prob", "mean_entropy"])
    for i in range(len(profile.layer_index)):
        writer.writerow(
            [
                profile.layer_index[i],
                f"{profile.mean_max_prob[i]:.8f}",
                f"{profile.mean_entropy_nats[i]:.8f}",
            ]
        )
