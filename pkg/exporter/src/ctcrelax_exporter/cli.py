"""Batch export entry point.

Reads a corpus TSV (``utterance_id<TAB>wav_path<TAB>reference`` per line,
paths relative to the TSV), pushes every clip through the checkpoint, and
writes the decoder-side artifacts into the output directory.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .export import ExportJob, run_export


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ctcrelax-export",
        description="Export hidden states, head, and vocab from a CTC checkpoint",
    )
    parser.add_argument("--model", required=True, help="checkpoint directory or hub id")
    parser.add_argument("--corpus", required=True, help="TSV of id, wav path, reference")
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")

    corpus_path = Path(args.corpus)
    corpus: list[tuple[str, Path, str]] = []
    with open(corpus_path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                print(f"error: corpus line {lineno} needs 3 fields", file=sys.stderr)
                return 2
            utt_id, wav, reference = fields
            wav_path = Path(wav)
            if not wav_path.is_absolute():
                wav_path = corpus_path.parent / wav_path
            corpus.append((utt_id, wav_path, reference))

    result = run_export(ExportJob(args.model, corpus, Path(args.out)))
    print(
        f"exported {len(result.stack_paths)} utterances "
        f"({len(result.skipped)} skipped) -> {result.manifest_path}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
