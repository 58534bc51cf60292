"""ARPA-format backoff n-gram language model: parsing, serialization, and
Katz-style scoring.

Stored values are log10, exactly as they appear in the file; the decoder
converts to natural log once at its fusion boundary.  A parsed model is
immutable and safe for concurrent readers; scoring state is a small word
tuple copied per beam-search hypothesis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, TextIO

from .errors import ParseError

SENTENCE_START = "<s>"
SENTENCE_END = "</s>"
UNKNOWN = "<unk>"

MAX_ORDER = 5

LmState = tuple[str, ...]

NGramTable = dict[tuple[str, ...], tuple[float, float]]  # (log10_prob, log10_backoff)


@dataclass(frozen=True)
class NGramModel:
    """Backoff n-gram model with per-order tables keyed by word tuples."""

    tables: tuple[NGramTable, ...]  # tables[k] holds (k+1)-grams

    @property
    def max_order(self) -> int:
        return len(self.tables)

    @property
    def vocabulary(self) -> set[str]:
        return {words[0] for words in self.tables[0]}

    def initial_state(self) -> LmState:
        """Context at the start of a sentence (empty for unigram models)."""
        if self.max_order == 1:
            return ()
        return (self._map_word(SENTENCE_START),)

    def _map_word(self, word: str) -> str:
        return word if (word,) in self.tables[0] else UNKNOWN

    def score_word(self, state: LmState, word: str) -> tuple[float, LmState]:
        """Katz-backoff log10 probability of ``word`` given ``state``.

        Unknown words map to ``<unk>``; on an n-gram miss the context's
        backoff weight (0 when the context itself is absent) is added to
        the next-lower-order score.  Returns the probability and the
        context extended by the word, truncated to max_order - 1.
        """
        w = self._map_word(word)
        context = state
        score = 0.0
        while True:
            order = len(context) + 1
            entry = self.tables[order - 1].get(context + (w,))
            if entry is not None:
                score += entry[0]
                break
            if not context:
                # <unk> is required at parse time, so the unigram base
                # case always resolves.
                raise KeyError(f"unigram {w!r} missing; corrupt model")
            ctx_entry = self.tables[len(context) - 1].get(context)
            if ctx_entry is not None:
                score += ctx_entry[1]
            context = context[1:]
        next_state = (state + (w,))[-(self.max_order - 1) :] if self.max_order > 1 else ()
        return score, next_state

    def score_sentence(self, words: Iterable[str]) -> float:
        """Total log10 probability from ``<s>`` through the ``</s>`` step."""
        state = self.initial_state()
        total = 0.0
        for word in words:
            step, state = self.score_word(state, word)
            total += step
        step, _ = self.score_word(state, SENTENCE_END)
        return total + step


def parse_arpa(source: TextIO) -> NGramModel:
    r"""Parse Doug Paul's ARPA text format.

    Validates the ``\data\`` counts against the listed n-grams, requires a
    closing ``\end\``, and requires ``<unk>`` so backoff scoring is total.
    """
    lines = [line.rstrip("\n") for line in source]
    counts = _parse_data_header(lines)
    max_order = len(counts)
    if max_order > MAX_ORDER:
        raise ParseError(f"order {max_order} exceeds supported maximum {MAX_ORDER}")

    tables: list[NGramTable] = [dict() for _ in range(max_order)]
    section = 0  # current n-gram order, 0 = outside any section
    saw_end = False
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped == "\\data\\" or stripped.startswith("ngram "):
            continue
        if stripped == "\\end\\":
            saw_end = True
            section = 0
            continue
        if stripped.endswith("-grams:") and stripped.startswith("\\"):
            try:
                section = int(stripped[1:].split("-")[0])
            except ValueError:
                raise ParseError(f"line {lineno}: bad section header {stripped!r}")
            if not 1 <= section <= max_order:
                raise ParseError(
                    f"line {lineno}: section order {section} not declared in \\data\\"
                )
            continue
        if section == 0:
            raise ParseError(f"line {lineno}: content outside any n-gram section")
        entry = _parse_ngram_line(stripped, section, lineno)
        words, prob, backoff = entry
        if words in tables[section - 1]:
            raise ParseError(f"line {lineno}: duplicate {section}-gram {' '.join(words)!r}")
        tables[section - 1][words] = (prob, backoff)

    if not saw_end:
        raise ParseError("missing \\end\\ marker")
    for order, declared in enumerate(counts, start=1):
        actual = len(tables[order - 1])
        if actual != declared:
            raise ParseError(
                f"\\data\\ declares {declared} {order}-grams but file lists {actual}"
            )
    if (UNKNOWN,) not in tables[0]:
        raise ParseError(f"model must define {UNKNOWN!r}")
    return NGramModel(tables=tuple(tables))


def write_arpa(model: NGramModel, sink: TextIO) -> None:
    """Serialize back to ARPA text; parse(write(m)) scores identically to m."""
    sink.write("\\data\\\n")
    for order in range(1, model.max_order + 1):
        sink.write(f"ngram {order}={len(model.tables[order - 1])}\n")
    for order in range(1, model.max_order + 1):
        sink.write(f"\n\\{order}-grams:\n")
        for words in sorted(model.tables[order - 1]):
            prob, backoff = model.tables[order - 1][words]
            # repr round-trips floats exactly, keeping re-parsed scores identical
            line = f"{prob!r}\t{' '.join(words)}"
            if backoff != 0.0:
                line += f"\t{backoff!r}"
            sink.write(line + "\n")
    sink.write("\n\\end\\\n")


def load_arpa(path) -> NGramModel:
    with open(path, "r", encoding="utf-8") as f:
        return parse_arpa(f)


def _parse_data_header(lines: list[str]) -> list[int]:
    try:
        start = next(i for i, l in enumerate(lines) if l.strip() == "\\data\\")
    except StopIteration:
        raise ParseError("missing \\data\\ header")
    counts: dict[int, int] = {}
    for lineno in range(start + 1, len(lines)):
        stripped = lines[lineno].strip()
        if not stripped:
            continue
        if not stripped.startswith("ngram "):
            break
        body = stripped[len("ngram ") :]
        try:
            order_str, count_str = body.split("=")
            order, count = int(order_str), int(count_str)
        except ValueError:
            raise ParseError(f"line {lineno + 1}: bad count declaration {stripped!r}")
        counts[order] = count
    if not counts:
        raise ParseError("\\data\\ header declares no n-gram counts")
    max_order = max(counts)
    if sorted(counts) != list(range(1, max_order + 1)):
        raise ParseError(f"non-contiguous n-gram orders declared: {sorted(counts)}")
    return [counts[k] for k in range(1, max_order + 1)]


def _parse_ngram_line(line: str, order: int, lineno: int):
    fields = line.split()
    if len(fields) not in (order + 1, order + 2):
        raise ParseError(
            f"line {lineno}: {order}-gram line has {len(fields)} fields, "
            f"expected {order + 1} or {order + 2}"
        )
    try:
        prob = float(fields[0])
    except ValueError:
        raise ParseError(f"line {lineno}: bad log-probability {fields[0]!r}")
    words = tuple(fields[1 : 1 + order])
    backoff = 0.0
    if len(fields) == order + 2:
        try:
            backoff = float(fields[-1])
        except ValueError:
            raise ParseError(f"line {lineno}: bad backoff weight {fields[-1]!r}")
    return words, prob, backoff
