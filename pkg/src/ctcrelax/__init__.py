"""CTC decoding with confidence-relaxed transformer layer aggregation.

The package decodes per-layer hidden-state stacks through a CTC
projection head: it interpolates top-layer logits with an L2-normalized
aggregate of the top M layers, then runs an LM-fused prefix beam search.
Alongside the decoder it ships per-layer confidence analytics,
(beta, M)/beam-width/temperature tuning harnesses, WER/CER evaluation,
and the binary tensor formats that feed it all.
"""

from .aggregation import (
    AggregationConfig,
    aggregate_logits,
    baseline_logits,
    interpolate,
    l2_normalize,
    log_softmax,
    pipeline_logprobs,
    project,
    softmax,
)
from .beam import DecodeConfig, DecodePipeline, beam_search_decode, decode_utterance
from .confidence import (
    LayerConfidenceProfile,
    frame_confidence,
    layer_confidence_profile,
    mean_profile,
    token_evolution,
    top_k_trace,
)
from .ctc import (
    Transcript,
    brute_force_all,
    collapse,
    ctc_brute_force,
    ctc_forward,
    greedy_decode,
    log_add,
)
from .errors import (
    ConfigError,
    CtcRelaxError,
    FormatError,
    IoError,
    ParseError,
    ShapeError,
    SizeError,
    TruncationError,
    VersionError,
)
from .lm import LmState, NGramModel, load_arpa, parse_arpa, write_arpa
from .metrics import (
    ErrorBreakdown,
    EvalReport,
    cer,
    evaluate_manifest,
    normalize_text,
    wer,
)
from .presets import Preset, get_preset, preset_names
from .tensor_io import (
    EvalManifest,
    LayerStack,
    ManifestEntry,
    ProjectionHead,
    Vocabulary,
    load_layer_stack,
    load_manifest,
    load_projection_head,
    load_vocabulary,
    read_layer_stack,
    read_manifest,
    read_projection_head,
    read_vocabulary,
    save_layer_stack,
    save_projection_head,
    save_vocabulary,
    write_layer_stack,
    write_manifest,
    write_projection_head,
    write_vocabulary,
)
from .tuner import (
    GridSpec,
    SweepResult,
    SweepRow,
    beam_width_sweep,
    calibrate_temperature,
    grid_search,
)

__version__ = "0.1.0"
