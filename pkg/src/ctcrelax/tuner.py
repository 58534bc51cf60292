"""Hyperparameter harnesses: (beta, M) grid search on a dev manifest,
beam-width sweeps with wall-clock accounting, and temperature calibration.

Everything here is a deterministic exhaustive sweep; re-running yields
identical selections.  Grid points that fail are recorded on the side and
skipped rather than aborting the search, so a sweep's row count is always
the requested point count minus its failures.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, replace
from typing import Sequence, TextIO

from .aggregation import AggregationConfig, pipeline_logprobs
from .beam import DecodeConfig, DecodePipeline
from .ctc import ctc_forward
from .errors import ConfigError
from .lm import NGramModel
from .metrics import evaluate_manifest
from .tensor_io import EvalManifest, ProjectionHead, Vocabulary, load_layer_stack

DEFAULT_BETA_GRID = tuple(round(0.05 * i, 2) for i in range(21))  # 0.0 .. 1.0
DEFAULT_TEMPERATURE_GRID = tuple(round(0.5 + 0.1 * i, 1) for i in range(46))  # 0.5 .. 5.0


@dataclass(frozen=True)
class GridSpec:
    """Search space for the aggregation parameters at a fixed decode config."""

    beta_values: tuple[float, ...]
    m_values: tuple[int, ...]
    decode_cfg: DecodeConfig
    temperature: float = 1.0

    def __post_init__(self):
        if not self.beta_values or not self.m_values:
            raise ConfigError("grid must contain at least one beta and one M value")
        if list(self.beta_values) != sorted(self.beta_values):
            raise ConfigError("beta_values must be ascending")
        if any(not 0.0 <= b <= 1.0 for b in self.beta_values):
            raise ConfigError("beta values must lie in [0,1]")
        if any(m < 1 for m in self.m_values):
            raise ConfigError("M values must be >= 1")


@dataclass(frozen=True)
class SweepRow:
    params: dict
    wer: float
    cer: float
    wall_clock_ms: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]  # successful points, in grid order
    failed: tuple[tuple[dict, str], ...] = ()  # (params, reason)


def grid_search(
    dev_manifest: EvalManifest,
    head: ProjectionHead,
    vocab: Vocabulary,
    lm: NGramModel | None,
    grid: GridSpec,
    jobs: int = 1,
) -> tuple[float, int, SweepResult]:
    """Decode the dev manifest at every (beta, M) and pick the pooled-WER
    minimizer; ties prefer larger beta, then smaller M (closer to the
    baseline, fewer aggregated layers)."""
    rows: list[SweepRow] = []
    failed: list[tuple[dict, str]] = []
    best: tuple[float, float, int] | None = None  # (wer, -beta, M)
    for m in grid.m_values:
        for beta in grid.beta_values:
            params = {"beta": beta, "M": m}
            started = time.perf_counter()
            try:
                pipeline = DecodePipeline(
                    head=head,
                    vocab=vocab,
                    lm=lm,
                    agg_cfg=AggregationConfig(
                        num_aggregated_layers=m, beta=beta, temperature=grid.temperature
                    ),
                    decode_cfg=grid.decode_cfg,
                )
                report = evaluate_manifest(dev_manifest, pipeline, jobs=jobs)
                point_wer, point_cer = report.pooled_wer, report.pooled_cer
            except Exception as exc:
                failed.append((params, str(exc)))
                continue
            elapsed = (time.perf_counter() - started) * 1000.0
            rows.append(SweepRow(params, point_wer, point_cer, elapsed))
            key = (point_wer, -beta, m)
            if best is None or key < best:
                best = key
    if best is None:
        raise ConfigError("every grid point failed")
    return -best[1], best[2], SweepResult(rows=tuple(rows), failed=tuple(failed))


def beam_width_sweep(
    manifest: EvalManifest,
    pipeline: DecodePipeline,
    widths: Sequence[int],
    jobs: int = 1,
) -> SweepResult:
    """Pooled WER/CER and wall clock per beam width, widths ascending."""
    if not widths or any(w < 1 for w in widths):
        raise ConfigError("widths must be >= 1")
    if list(widths) != sorted(widths):
        raise ConfigError("widths must be ascending")
    rows: list[SweepRow] = []
    failed: list[tuple[dict, str]] = []
    for width in widths:
        params = {"beam_width": width}
        point = replace(pipeline, decode_cfg=replace(pipeline.decode_cfg, beam_width=width))
        started = time.perf_counter()
        try:
            report = evaluate_manifest(manifest, point, jobs=jobs)
            point_wer, point_cer = report.pooled_wer, report.pooled_cer
        except Exception as exc:
            failed.append((params, str(exc)))
            continue
        elapsed = (time.perf_counter() - started) * 1000.0
        rows.append(SweepRow(params, point_wer, point_cer, elapsed))
    return SweepResult(rows=tuple(rows), failed=tuple(failed))


def calibrate_temperature(
    dev_manifest: EvalManifest,
    pipeline: DecodePipeline,
    t_grid: Sequence[float] = DEFAULT_TEMPERATURE_GRID,
    objective: str = "wer",
    jobs: int = 1,
) -> tuple[float, SweepResult]:
    """Pick the temperature minimizing the objective on the dev manifest.

    "wer" decodes; "nll" scores the references' mean CTC negative
    log-likelihood under the temperature-scaled distribution.  Ties keep
    the smaller temperature.
    """
    if not t_grid or any(t <= 0 for t in t_grid):
        raise ConfigError("temperature grid must be positive")
    if objective not in ("wer", "nll"):
        raise ConfigError(f"unknown objective {objective!r}")
    rows: list[SweepRow] = []
    failed: list[tuple[dict, str]] = []
    best: tuple[float, float] | None = None  # (objective value, temperature)
    for temperature in t_grid:
        params = {"temperature": temperature}
        point = replace(pipeline, agg_cfg=replace(pipeline.agg_cfg, temperature=temperature))
        started = time.perf_counter()
        try:
            if objective == "wer":
                report = evaluate_manifest(dev_manifest, point, jobs=jobs)
                value = report.pooled_wer
                point_wer, point_cer = report.pooled_wer, report.pooled_cer
            else:
                value = _mean_reference_nll(dev_manifest, point)
                point_wer = point_cer = float("nan")
        except Exception as exc:
            failed.append((params, str(exc)))
            continue
        elapsed = (time.perf_counter() - started) * 1000.0
        rows.append(
            SweepRow({"temperature": temperature, "objective": value}, point_wer, point_cer, elapsed)
        )
        if best is None or value < best[0]:
            best = (value, temperature)
    if best is None:
        raise ConfigError("every temperature point failed")
    return best[1], SweepResult(rows=tuple(rows), failed=tuple(failed))


def _mean_reference_nll(manifest: EvalManifest, pipeline: DecodePipeline) -> float:
    """Mean over utterances of -ln P_CTC(reference | stack)."""
    total = 0.0
    for entry in manifest.entries:
        stack = load_layer_stack(entry.stack_path)
        logprobs = pipeline_logprobs(stack, pipeline.head, pipeline.agg_cfg)
        target = pipeline.vocab.encode(entry.reference)
        total += -ctc_forward(logprobs, target, pipeline.vocab.blank_index)
    return total / len(manifest.entries)


def write_sweep_csv(result: SweepResult, sink: TextIO) -> None:
    """One row per evaluated point (params, wer, cer, wall_clock_ms), with
    failed points appended as metric-less rows flagged failed=1."""
    param_keys: list[str] = []
    for row in result.rows:
        for key in row.params:
            if key not in param_keys:
                param_keys.append(key)
    for params, _ in result.failed:
        for key in params:
            if key not in param_keys:
                param_keys.append(key)
    def fmt(x: float) -> str:
        return "" if x != x else f"{x:.6f}"  # NaN marks metrics the objective skipped

    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(param_keys + ["wer", "cer", "wall_clock_ms", "failed"])
    for row in result.rows:
        record = [row.params.get(k, "") for k in param_keys]
        record += [fmt(row.wer), fmt(row.cer), f"{row.wall_clock_ms:.3f}", "0"]
        writer.writerow(record)
    for params, reason in result.failed:
        record = [params.get(k, "") for k in param_keys]
        record += ["", "", "", "1"]
        writer.writerow(record)
