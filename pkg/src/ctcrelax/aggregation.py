"""Logit construction: projection, L2-normalized layer aggregation,
interpolation against the top-layer baseline, and temperature-scaled
softmax.

Logit frame sequences are plain ``float`` arrays of shape [T, C]; no
wrapper type is needed.  The aggregation sums the top M layers after
per-frame L2 normalization of the hidden vectors, applies the linear part
of the projection head to the sum (projection is linear, so per-layer
projection and projection-of-the-sum agree), and adds the bias exactly
once so its magnitude stays comparable to the baseline logits it is
interpolated with.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError
from .tensor_io import LayerStack, ProjectionHead

NORM_EPS = 1e-12


@dataclass(frozen=True)
class AggregationConfig:
    """How to build decoding logits from a layer stack.

    num_aggregated_layers counts the top layers entering the aggregation
    sum; beta interpolates between the top-layer baseline (beta=1) and the
    pure aggregate (beta=0); temperature divides the logits at the softmax
    boundary only.
    """

    num_aggregated_layers: int
    beta: float
    temperature: float = 1.0

    def __post_init__(self):
        if self.num_aggregated_layers < 1:
            raise ConfigError(
                f"num_aggregated_layers must be >= 1, got {self.num_aggregated_layers}"
            )
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must be in [0,1], got {self.beta}")
        if not self.temperature > 0:
            raise ConfigError(f"temperature must be positive, got {self.temperature}")


def l2_normalize(v: np.ndarray) -> np.ndarray:
    """Scale ``v`` to unit L2 norm; all-zero vectors pass through unchanged.

    The degenerate case returns the input as-is so silent or padded frames
    cannot abort decoding.
    """
    v = np.asarray(v, dtype=np.float64)
    norm = np.linalg.norm(v)
    if norm <= NORM_EPS:
        return v.copy()
    return v / norm


def project(h: np.ndarray, head: ProjectionHead) -> np.ndarray:
    """Apply the affine head: ``weights @ h + bias``."""
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (head.hidden_dim,):
        raise ShapeError(
            f"hidden vector has shape {h.shape}, head expects ({head.hidden_dim},)"
        )
    return head.weights.astype(np.float64) @ h + head.bias.astype(np.float64)


def baseline_logits(stack: LayerStack, head: ProjectionHead) -> np.ndarray:
    """Project the raw top-layer hidden states; returns [T, C]."""
    if stack.hidden_dim != head.hidden_dim:
        raise ShapeError(
            f"stack hidden_dim {stack.hidden_dim} != head hidden_dim {head.hidden_dim}"
        )
    top = stack.data[-1].astype(np.float64)  # [T, D]
    return top @ head.weights.T.astype(np.float64) + head.bias.astype(np.float64)


def aggregate_logits(stack: LayerStack, head: ProjectionHead, num_layers: int) -> np.ndarray:
    """Sum the projections of the L2-normalized top ``num_layers`` layers.

    Per frame t: sum over n in the top ``num_layers`` of
    ``weights @ (H_n_t / ||H_n_t||)``, plus the bias added once after the
    sum.  The per-frame normalization absorbs any positive rescaling of a
    layer's hidden states.
    """
    if stack.hidden_dim != head.hidden_dim:
        raise ShapeError(
            f"stack hidden_dim {stack.hidden_dim} != head hidden_dim {head.hidden_dim}"
        )
    if not 1 <= num_layers <= stack.num_layers:
        raise ConfigError(
            f"num_aggregated_layers must be in [1, {stack.num_layers}], got {num_layers}"
        )
    layers = stack.data[stack.num_layers - num_layers :].astype(np.float64)  # [M, T, D]
    norms = np.linalg.norm(layers, axis=2, keepdims=True)  # [M, T, 1]
    scale = np.where(norms > NORM_EPS, norms, 1.0)
    summed = (layers / scale).sum(axis=0)  # [T, D]
    return summed @ head.weights.T.astype(np.float64) + head.bias.astype(np.float64)


def interpolate(base: np.ndarray, agg: np.ndarray, beta: float) -> np.ndarray:
    """Blend ``beta * base + (1 - beta) * agg`` elementwise.

    The endpoints short-circuit so beta=1 reproduces the baseline logits
    bit-exactly (and beta=0 the aggregate).
    """
    base = np.asarray(base, dtype=np.float64)
    agg = np.asarray(agg, dtype=np.float64)
    if base.shape != agg.shape:
        raise ShapeError(f"shape mismatch: base {base.shape} vs agg {agg.shape}")
    if not 0.0 <= beta <= 1.0:
        raise ConfigError(f"beta must be in [0,1], got {beta}")
    if beta == 1.0:
        return base.copy()
    if beta == 0.0:
        return agg.copy()
    return beta * base + (1.0 - beta) * agg


def softmax(logits: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """Row-wise softmax of ``logits / temperature`` with max-subtraction."""
    return np.exp(log_softmax(logits, temperature))


def log_softmax(logits: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """Row-wise ``log(softmax(logits / temperature))``, numerically stable.

    Works on a single [C] vector or a [T, C] matrix; exponentials of each
    output row sum to 1.
    """
    if not temperature > 0:
        raise ConfigError(f"temperature must be positive, got {temperature}")
    z = np.asarray(logits, dtype=np.float64) / temperature
    shifted = z - z.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    return shifted - lse


def pipeline_logprobs(
    stack: LayerStack, head: ProjectionHead, cfg: AggregationConfig
) -> np.ndarray:
    """Full logit pipeline: baseline + aggregate -> interpolate -> log-softmax."""
    if not 1 <= cfg.num_aggregated_layers <= stack.num_layers:
        raise ConfigError(
            f"num_aggregated_layers must be in [1, {stack.num_layers}], "
            f"got {cfg.num_aggregated_layers}"
        )
    base = baseline_logits(stack, head)
    # beta=1 skips the aggregation entirely so the baseline is recovered
    # bit-exactly.
    mixed = (
        base
        if cfg.beta == 1.0
        else interpolate(base, aggregate_logits(stack, head, cfg.num_aggregated_layers), cfg.beta)
    )
    return log_softmax(mixed, cfg.temperature)
