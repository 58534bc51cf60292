"""Command-line frontend.

Subcommands: decode, evaluate, tune, sweep-beam, calibrate-temp,
profile-confidence.  Exit codes: 0 success, 1 runtime failure, 2 usage
error (unknown flags are fatal).  Every run echoes a JSON header of all
effective parameters with their provenance (flag, env, preset, or
default) to stderr so results are reproducible from logs alone.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import confidence as conf
from . import metrics as met
from . import tuner as tun
from .aggregation import AggregationConfig
from .beam import DecodeConfig, DecodePipeline
from .errors import CtcRelaxError
from .lm import load_arpa
from .presets import get_preset, preset_names
from .tensor_io import (
    load_layer_stack,
    load_manifest,
    load_projection_head,
    load_vocabulary,
)

USAGE_ERROR = 2
RUNTIME_ERROR = 1


class UsageError(Exception):
    """Bad invocation: reported on stderr with exit code 2."""


def main(argv: list[str] | None = None) -> int:
    return run(sys.argv[1:] if argv is None else list(argv))


def run(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles usage errors itself
        return int(exc.code or 0)
    try:
        return _dispatch(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (CtcRelaxError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctcrelax",
        description="CTC decoding with confidence-relaxed layer aggregation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--head", required=True, help=".sslp projection head")
        p.add_argument("--vocab", required=True, help=".vocab token list")
        p.add_argument("--lm", default=None, help="optional ARPA language model")

    def add_decode_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--preset", default=None, choices=preset_names(),
                       help="shipped (beta, layers) preset")
        p.add_argument("--beta", type=float, default=None,
                       help="interpolation weight on the top-layer logits")
        p.add_argument("--layers", type=int, default=None,
                       help="number of aggregated top layers (M)")
        p.add_argument("--temp", type=float, default=None, help="softmax temperature")
        p.add_argument("--beam", type=int, default=None, help="beam width")
        p.add_argument("--lm-weight", type=float, default=None,
                       help="weight on the LM log-probability")
        p.add_argument("--word-score", type=float, default=None,
                       help="additive bonus per decoded word")
        p.add_argument("--no-prune", action="store_true",
                       help="disable token and beam-margin pruning")

    p = sub.add_parser("decode", help="decode a single stack file")
    p.add_argument("--stack", required=True, help=".ssla layer stack")
    add_model_flags(p)
    add_decode_flags(p)
    p.add_argument("--out", default=None, help="write n-best JSON here")

    p = sub.add_parser("evaluate", help="decode and score a manifest")
    p.add_argument("--manifest", required=True, help=".manifest evaluation list")
    add_model_flags(p)
    add_decode_flags(p)
    p.add_argument("--jobs", type=int, default=None, help="parallel workers")
    p.add_argument("--out", default=None, help="write per-utterance CSV here")

    p = sub.add_parser("tune", help="grid search (beta, layers) on a dev manifest")
    p.add_argument("--manifest", required=True)
    add_model_flags(p)
    add_decode_flags(p)
    p.add_argument("--betas", default=None,
                   help="comma-separated beta grid (default 0.0..1.0 step 0.05)")
    p.add_argument("--layers-grid", default=None,
                   help="comma-separated M grid (default 1..N)")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", default=None, help="write the full grid CSV here")

    p = sub.add_parser("sweep-beam", help="WER/cost sweep over beam widths")
    p.add_argument("--manifest", required=True)
    add_model_flags(p)
    add_decode_flags(p)
    p.add_argument("--widths", required=True,
                   help="comma-separated ascending beam widths")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("calibrate-temp", help="calibrate the softmax temperature")
    p.add_argument("--manifest", required=True)
    add_model_flags(p)
    add_decode_flags(p)
    p.add_argument("--temps", default=None,
                   help="comma-separated temperature grid (default 0.5..5.0 step 0.1)")
    p.add_argument("--objective", default="wer", choices=["wer", "nll"])
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("profile-confidence", help="per-layer confidence profile CSV")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--stack", help="profile one stack")
    group.add_argument("--manifest", help="mean profile over a manifest")
    p.add_argument("--head", required=True)
    p.add_argument("--out", default=None)

    return parser


def _dispatch(args: argparse.Namespace) -> int:
    handlers = {
        "decode": _cmd_decode,
        "evaluate": _cmd_evaluate,
        "tune": _cmd_tune,
        "sweep-beam": _cmd_sweep_beam,
        "calibrate-temp": _cmd_calibrate_temp,
        "profile-confidence": _cmd_profile,
    }
    return handlers[args.command](args)


# ----------------------------------------------------------------------
# Effective-parameter resolution with provenance
# ----------------------------------------------------------------------


def _resolve_params(args: argparse.Namespace) -> dict[str, dict]:
    """Merge flag > env > preset > default, recording where each value came
    from."""
    params: dict[str, dict] = {}

    def put(name: str, value, source: str) -> None:
        params[name] = {"value": value, "source": source}

    preset = None
    if getattr(args, "preset", None) is not None:
        preset = get_preset(args.preset)
        put("preset", preset.name, "flag")

    def pick(name: str, flag_value, preset_value, default):
        if flag_value is not None:
            put(name, flag_value, "flag")
            return flag_value
        if preset_value is not None:
            put(name, preset_value, "preset")
            return preset_value
        put(name, default, "default")
        return default

    beta = pick("beta", getattr(args, "beta", None),
                preset.beta if preset else None, 1.0)
    layers = pick("layers", getattr(args, "layers", None),
                  preset.num_aggregated_layers if preset else None, 1)
    temp = pick("temp", getattr(args, "temp", None), None, 1.0)
    beam = pick("beam", getattr(args, "beam", None), None, 50)
    lm_weight = pick("lm_weight", getattr(args, "lm_weight", None), None, 0.5)
    word_score = pick("word_score", getattr(args, "word_score", None), None, 0.0)

    no_prune = bool(getattr(args, "no_prune", False))
    put("no_prune", no_prune, "flag" if no_prune else "default")

    if hasattr(args, "jobs"):
        if args.jobs is not None:
            put("jobs", args.jobs, "flag")
        elif os.environ.get("CTCRELAX_JOBS"):
            try:
                put("jobs", int(os.environ["CTCRELAX_JOBS"]), "env")
            except ValueError:
                raise UsageError(
                    f"CTCRELAX_JOBS={os.environ['CTCRELAX_JOBS']!r} is not an integer"
                )
        else:
            put("jobs", os.cpu_count() or 1, "default")

    if not 0.0 <= beta <= 1.0:
        raise UsageError("beta must be in [0,1]")
    if layers < 1:
        raise UsageError("layers must be >= 1")
    if temp <= 0:
        raise UsageError("temp must be positive")
    if beam < 1:
        raise UsageError("beam must be >= 1")
    if params.get("jobs", {}).get("value", 1) < 1:
        raise UsageError("jobs must be >= 1")

    for name in ("stack", "manifest", "head", "vocab", "lm", "out",
                 "objective", "widths", "betas", "layers_grid", "temps"):
        if getattr(args, name, None) is not None:
            put(name, str(getattr(args, name)), "flag")
    return params


def _echo(params: dict[str, dict]) -> None:
    print(json.dumps({"effective_params": params}, sort_keys=True), file=sys.stderr)


def _value(params: dict[str, dict], name: str):
    return params[name]["value"]


def _build_pipeline(args: argparse.Namespace, params: dict[str, dict]) -> DecodePipeline:
    head = load_projection_head(args.head)
    vocab = load_vocabulary(args.vocab)
    lm = load_arpa(args.lm) if args.lm else None
    agg_cfg = AggregationConfig(
        num_aggregated_layers=_value(params, "layers"),
        beta=_value(params, "beta"),
        temperature=_value(params, "temp"),
    )
    decode_cfg = DecodeConfig(
        beam_width=_value(params, "beam"),
        lm_weight=_value(params, "lm_weight") if lm is not None else 0.0,
        word_score=_value(params, "word_score"),
    )
    if _value(params, "no_prune"):
        decode_cfg = decode_cfg.without_pruning()
    return DecodePipeline(
        head=head, vocab=vocab, lm=lm, agg_cfg=agg_cfg, decode_cfg=decode_cfg
    )


def _load_nonempty_manifest(path: str):
    manifest = load_manifest(path)
    if not manifest.entries:
        raise UsageError(f"manifest {path} is empty")
    return manifest


def _write_text(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------


def _cmd_decode(args: argparse.Namespace) -> int:
    params = _resolve_params(args)
    _echo(params)
    pipeline = _build_pipeline(args, params)
    stack = load_layer_stack(args.stack)
    from .beam import decode_utterance

    results = decode_utterance(
        stack, pipeline.head, pipeline.vocab, pipeline.lm,
        pipeline.agg_cfg, pipeline.decode_cfg,
    )
    best_tokens, best_score = results[0]
    best_text = pipeline.vocab.render(best_tokens)
    print(best_text)
    payload = {
        "stack": str(args.stack),
        "transcript": best_text,
        "score": best_score,
        "nbest": [
            {"transcript": pipeline.vocab.render(toks), "score": score}
            for toks, score in results
        ],
    }
    _write_text(args.out, json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    params = _resolve_params(args)
    _echo(params)
    manifest = _load_nonempty_manifest(args.manifest)
    pipeline = _build_pipeline(args, params)
    report = met.evaluate_manifest(manifest, pipeline, jobs=_value(params, "jobs"))
    if args.out:
        import io

        sink = io.StringIO()
        met.write_report_csv(report, sink)
        _write_text(args.out, sink.getvalue())
    print(
        json.dumps(
            {
                "pooled_wer": round(report.pooled_wer, 6) if report.results else None,
                "pooled_cer": round(report.pooled_cer, 6) if report.results else None,
                "scored": len(report.results),
                "failed": len(report.failures),
            },
            sort_keys=True,
        )
    )
    return 0


def _cmd_tune(args: argparse.Namespace) -> int:
    params = _resolve_params(args)
    _echo(params)
    manifest = _load_nonempty_manifest(args.manifest)
    pipeline = _build_pipeline(args, params)
    if args.betas:
        betas = tuple(_parse_float_list(args.betas, "betas"))
    else:
        betas = tun.DEFAULT_BETA_GRID
    if args.layers_grid:
        m_values = tuple(_parse_int_list(args.layers_grid, "layers-grid"))
    else:
        first = load_layer_stack(manifest.entries[0].stack_path)
        m_values = tuple(range(1, first.num_layers + 1))
    grid = tun.GridSpec(
        beta_values=betas,
        m_values=m_values,
        decode_cfg=pipeline.decode_cfg,
        temperature=_value(params, "temp"),
    )
    best_beta, best_m, sweep = tun.grid_search(
        manifest, pipeline.head, pipeline.vocab, pipeline.lm, grid,
        jobs=_value(params, "jobs"),
    )
    _write_sweep(args.out, sweep)
    print(json.dumps({"best_beta": best_beta, "best_layers": best_m}, sort_keys=True))
    return 0


def _cmd_sweep_beam(args: argparse.Namespace) -> int:
    params = _resolve_params(args)
    _echo(params)
    manifest = _load_nonempty_manifest(args.manifest)
    pipeline = _build_pipeline(args, params)
    widths = _parse_int_list(args.widths, "widths")
    sweep = tun.beam_width_sweep(manifest, pipeline, widths, jobs=_value(params, "jobs"))
    _write_sweep(args.out, sweep)
    print(json.dumps({"points": len(sweep.rows)}, sort_keys=True))
    return 0


def _cmd_calibrate_temp(args: argparse.Namespace) -> int:
    params = _resolve_params(args)
    _echo(params)
    manifest = _load_nonempty_manifest(args.manifest)
    pipeline = _build_pipeline(args, params)
    if args.temps:
        t_grid = _parse_float_list(args.temps, "temps")
    else:
        t_grid = list(tun.DEFAULT_TEMPERATURE_GRID)
    best_t, sweep = tun.calibrate_temperature(
        manifest, pipeline, t_grid, objective=args.objective,
        jobs=_value(params, "jobs"),
    )
    _write_sweep(args.out, sweep)
    print(json.dumps({"best_temperature": best_t}, sort_keys=True))
    return 0


def _cmd_profile(args: argparse.Namespace) -> int:
    params = _resolve_params(args)
    _echo(params)
    head = load_projection_head(args.head)
    if args.stack:
        profile = conf.layer_confidence_profile(load_layer_stack(args.stack), head)
    else:
        manifest = _load_nonempty_manifest(args.manifest)
        profiles = [
            conf.layer_confidence_profile(load_layer_stack(e.stack_path), head)
            for e in manifest.entries
        ]
        profile = conf.mean_profile(profiles)
    import io

    sink = io.StringIO()
    conf.write_profile_csv(profile, sink)
    text = sink.getvalue()
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _write_sweep(path: str | None, sweep) -> None:
    if not path:
        return
    import io

    sink = io.StringIO()
    tun.write_sweep_csv(sweep, sink)
    _write_text(path, sink.getvalue())


def _parse_float_list(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--{what} must be a comma-separated list of numbers")


def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--{what} must be a comma-separated list of integers")


if __name__ == "__main__":
    sys.exit(main())
