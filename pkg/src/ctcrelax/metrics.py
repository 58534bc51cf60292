"""WER/CER via Levenshtein alignment, plus manifest-level evaluation with
pooled corpus rates.

Text is normalized before scoring: lowercased, whitespace collapsed to
single spaces, stripped.  Corpus rates are pooled (total errors over total
reference length), not averaged over utterances.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence, TextIO

from .beam import DecodePipeline
from .errors import ConfigError
from .tensor_io import EvalManifest


@dataclass(frozen=True)
class ErrorBreakdown:
    substitutions: int
    insertions: int
    deletions: int
    ref_len: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    @property
    def rate(self) -> float:
        return self.errors / self.ref_len


def normalize_text(text: str) -> str:
    """Lowercase, collapse runs of whitespace, strip."""
    return " ".join(text.lower().split())


def edit_breakdown(reference: Sequence, hypothesis: Sequence) -> ErrorBreakdown:
    """Unit-cost Levenshtein alignment with a deterministic traceback that
    prefers substitution over insertion over deletion on ties."""
    if len(reference) == 0:
        raise ConfigError("reference must be non-empty")
    n, m = len(reference), len(hypothesis)
    # dist[i][j]: edit distance between reference[:i] and hypothesis[:j]
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dist[i][0] = i
    for j in range(m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        ref_tok = reference[i - 1]
        row = dist[i]
        prev = dist[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (ref_tok != hypothesis[j - 1])
            ins = row[j - 1] + 1
            dele = prev[j] + 1
            row[j] = min(sub, ins, dele)

    subs = ins = dels = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + (
            reference[i - 1] != hypothesis[j - 1]
        ):
            if reference[i - 1] != hypothesis[j - 1]:
                subs += 1
            i, j = i - 1, j - 1
        elif j > 0 and dist[i][j] == dist[i][j - 1] + 1:
            ins += 1
            j -= 1
        else:
            dels += 1
            i -= 1
    return ErrorBreakdown(subs, ins, dels, ref_len=n)


def wer(reference: str, hypothesis: str) -> ErrorBreakdown:
    """Word error breakdown between two raw transcripts."""
    ref_words = normalize_text(reference).split()
    hyp_words = normalize_text(hypothesis).split()
    return edit_breakdown(ref_words, hyp_words)


def cer(reference: str, hypothesis: str) -> ErrorBreakdown:
    """Character error breakdown, spaces included."""
    return edit_breakdown(normalize_text(reference), normalize_text(hypothesis))


@dataclass(frozen=True)
class UtteranceResult:
    utterance_id: str
    hypothesis: str
    word_errors: ErrorBreakdown
    char_errors: ErrorBreakdown


@dataclass(frozen=True)
class EvalReport:
    results: tuple[UtteranceResult, ...]
    failures: tuple[tuple[str, str], ...]  # (utterance_id, reason)

    @property
    def pooled_wer(self) -> float:
        if not self.results:
            raise ConfigError("no scored utterances to pool")
        errors = sum(r.word_errors.errors for r in self.results)
        total = sum(r.word_errors.ref_len for r in self.results)
        return errors / total

    @property
    def pooled_cer(self) -> float:
        if not self.results:
            raise ConfigError("no scored utterances to pool")
        errors = sum(r.char_errors.errors for r in self.results)
        total = sum(r.char_errors.ref_len for r in self.results)
        return errors / total


def evaluate_manifest(
    manifest: EvalManifest, pipeline: DecodePipeline, jobs: int = 1
) -> EvalReport:
    """Decode and score every manifest entry.

    Entries that fail to load or decode are recorded as failures and the
    run continues.  Output order follows the manifest regardless of the
    worker count.
    """
    if not manifest.entries:
        raise ConfigError("manifest is empty")
    hyps: list[str | None] = [None] * len(manifest.entries)
    errors: list[str | None] = [None] * len(manifest.entries)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_decode_text, pipeline, str(e.stack_path))
                for e in manifest.entries
            ]
            for i, fut in enumerate(futures):
                try:
                    hyps[i] = fut.result()
                except Exception as exc:  # per-utterance isolation
                    errors[i] = str(exc)
    else:
        for i, entry in enumerate(manifest.entries):
            try:
                hyps[i] = _decode_text(pipeline, str(entry.stack_path))
            except Exception as exc:
                errors[i] = str(exc)

    results: list[UtteranceResult] = []
    failures: list[tuple[str, str]] = []
    for entry, hyp, err in zip(manifest.entries, hyps, errors):
        if err is not None:
            failures.append((entry.utterance_id, err))
            continue
        results.append(
            UtteranceResult(
                utterance_id=entry.utterance_id,
                hypothesis=hyp,
                word_errors=wer(entry.reference, hyp),
                char_errors=cer(entry.reference, hyp),
            )
        )
    return EvalReport(results=tuple(results), failures=tuple(failures))


def _decode_text(pipeline: DecodePipeline, stack_path: str) -> str:
    return pipeline.decode_file(stack_path)[1]


def write_report_csv(report: EvalReport, sink: TextIO) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(["utt_id", "wer", "cer", "subs", "ins", "dels", "ref_len"])
    for r in report.results:
        writer.writerow(
            [
                r.utterance_id,
                f"{r.word_errors.rate:.6f}",
                f"{r.char_errors.rate:.6f}",
                r.word_errors.substitutions,
                r.word_errors.insertions,
                r.word_errors.deletions,
                r.word_errors.ref_len,
            ]
        )
    for utt_id, reason in report.failures:
        writer.writerow([utt_id, "FAILED", reason, "", "", "", ""])
