"""Shipped (beta, M) presets: the tuned aggregation settings per model
family, size, and amount of fine-tuning data.

Keys are ``<family>-<size>-<resource>`` with resources in
{10m, 1h, 10h, 100h, 360h, 960h}.  num_layers records the depth of the
model the preset was tuned for, as a sanity check against the stack being
decoded.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class Preset:
    name: str
    beta: float
    num_aggregated_layers: int
    num_layers: int


_TABLE: dict[str, tuple[float, int, int]] = {
    # name: (beta, M, model depth N)
    "w2v-base-10m": (0.25, 4, 12),
    "w2v-base-1h": (0.25, 4, 12),
    "w2v-base-10h": (0.3, 4, 12),
    "w2v-base-100h": (0.5, 5, 12),
    "w2v-base-360h": (0.7, 4, 12),
    "w2v-base-960h": (0.75, 6, 12),
    "w2v-large-10m": (0.5, 6, 24),
    "w2v-large-1h": (0.5, 6, 24),
    "w2v-large-10h": (0.65, 6, 24),
    "w2v-large-100h": (0.7, 6, 24),
    "w2v-large-360h": (0.7, 6, 24),
    "w2v-large-960h": (0.75, 12, 24),
    "hubert-base-10m": (0.5, 4, 12),
    "hubert-base-1h": (0.5, 5, 12),
    "hubert-base-10h": (0.6, 5, 12),
    "hubert-base-100h": (0.65, 5, 12),
    "hubert-base-360h": (0.7, 5, 12),
    "hubert-base-960h": (0.7, 6, 12),
    "hubert-large-100h": (0.7, 10, 24),
    "hubert-large-360h": (0.75, 12, 24),
    "hubert-large-960h": (0.75, 13, 24),
    "hubert-xl-960h": (0.8, 24, 48),
}


def preset_names() -> tuple[str, ...]:
    return tuple(sorted(_TABLE))


def get_preset(name: str) -> Preset:
    try:
        beta, m, depth = _TABLE[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; known presets: {', '.join(preset_names())}"
        )
    return Preset(name=name, beta=beta, num_aggregated_layers=m, num_layers=depth)
