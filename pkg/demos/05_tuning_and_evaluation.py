"""End to end: build a tiny corpus on disk, tune (beta, M), sweep beam
widths, and score WER/CER.

The corpus here is synthetic: stacks whose lower layer knows the right
answer while the top layer is noisy-confident, so the grid search has a
real optimum away from the beta = 1 baseline.
"""

import tempfile
from pathlib import Path

import numpy as np

from ctcrelax import (
    AggregationConfig,
    DecodeConfig,
    DecodePipeline,
    EvalManifest,
    GridSpec,
    LayerStack,
    ManifestEntry,
    ProjectionHead,
    Vocabulary,
    beam_width_sweep,
    evaluate_manifest,
    grid_search,
    save_layer_stack,
)

rng = np.random.default_rng(5)
workdir = Path(tempfile.mkdtemp(prefix="ctcrelax-demo-"))

vocab = Vocabulary(tokens=("<blank>", "<sep>", "a", "b", "c"), blank_index=0, separator_index=1)
head = ProjectionHead(
    weights=np.eye(5, dtype=np.float32), bias=np.zeros(5, dtype=np.float32)
)

# Each utterance spells one two-letter word.  The top layer garbles the
# second letter toward "a"; the lower layer has it right but quieter.
entries = []
for i, word in enumerate(["ab", "cb", "ba"]):
    tok1, tok2 = vocab.encode(word)
    top = np.full((4, 5), -4.0)
    low = np.full((4, 5), -4.0)
    top[0, tok1] = low[0, tok1] = 5.0
    top[1, 0] = low[1, 0] = 5.0          # blank keeps letters apart
    top[2, 2] = 1.2                       # top layer leans "a"
    top[2, tok2] = 1.0
    low[2, tok2] = 6.0                    # lower layer is sure
    top[3, 0] = low[3, 0] = 5.0
    stack = LayerStack(np.stack([low, top]).astype(np.float32)[:, :, :])
    path = workdir / f"utt{i}.ssla"
    save_layer_stack(stack, path)
    entries.append(ManifestEntry(f"utt{i}", path, word))
manifest = EvalManifest(entries=tuple(entries))

# Grid search: the aggregated settings should beat the pure baseline.
grid = GridSpec(
    beta_values=(0.0, 0.25, 0.5, 0.75, 1.0),
    m_values=(1, 2),
    decode_cfg=DecodeConfig(beam_width=8),
)
best_beta, best_m, sweep = grid_search(manifest, head, vocab, None, grid)
print(f"grid search winner: beta={best_beta}, M={best_m}")
print(f"{'beta':>6} {'M':>3} {'WER':>7}")
for row in sweep.rows:
    print(f"{row.params['beta']:>6} {row.params['M']:>3} {row.wer:>7.3f}")

# Evaluate at the winning point.
pipeline = DecodePipeline(
    head=head, vocab=vocab, lm=None,
    agg_cfg=AggregationConfig(num_aggregated_layers=best_m, beta=best_beta),
    decode_cfg=DecodeConfig(beam_width=8),
)
report = evaluate_manifest(manifest, pipeline)
print(f"\npooled WER {report.pooled_wer:.3f}, pooled CER {report.pooled_cer:.3f}")
for r in report.results:
    print(f"  {r.utterance_id}: hyp={r.hypothesis!r} wer={r.word_errors.rate:.2f}")

# Beam width sweep: wall clock grows with width, accuracy saturates.
widths = [1, 4, 16, 64]
costs = beam_width_sweep(manifest, pipeline, widths)
print(f"\n{'width':>6} {'WER':>7} {'ms':>9}")
for row in costs.rows:
    print(f"{row.params['beam_width']:>6} {row.wer:>7.3f} {row.wall_clock_ms:>9.2f}")
