"""Domain types shared by the whole toolkit.

A corpus instance is one sentence with a single target-entity span and an
optional gold factuality label.  Spans are measured in Unicode code points
of the sentence text (files are UTF-8), never in bytes, so every consumer
of the JSONL corpus format agrees on offsets.

Text normalization is offset-preserving: `normalize` returns the folded
text together with a map from each normalized code point back to the
half-open source range it came from.  Umlaut folding can grow the text
(one source "ß" becomes "ss"), which is why the map is explicit instead of
an assumed 1:1 correspondence.
"""

from __future__ import annotations

import enum
import json
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

ENTITY_OPEN = "<E>"
ENTITY_CLOSE = "</E>"

_UMLAUT_FOLD = {
    "ä": "ae",
    "ö": "oe",
    "ü": "ue",
    "Ä": "Ae",
    "Ö": "Oe",
    "Ü": "Ue",
    "ß": "ss",
}


class FactualityLabel(enum.Enum):
    """Three-valued classification target.

    The order Affirmed < Negated < Possible is fixed so that reports and
    serialized output are deterministic.
    """

    AFFIRMED = "affirmed"
    NEGATED = "negated"
    POSSIBLE = "possible"

    def __lt__(self, other: "FactualityLabel") -> bool:
        if not isinstance(other, FactualityLabel):
            return NotImplemented
        return _LABEL_ORDER[self] < _LABEL_ORDER[other]

    @classmethod
    def from_string(cls, value: str) -> "FactualityLabel":
        try:
            return cls(value.lower())
        except ValueError:
            raise ValueError(f"unknown factuality label: {value!r}") from None


_LABEL_ORDER = {
    FactualityLabel.AFFIRMED: 0,
    FactualityLabel.NEGATED: 1,
    FactualityLabel.POSSIBLE: 2,
}

LABELS = (FactualityLabel.AFFIRMED, FactualityLabel.NEGATED, FactualityLabel.POSSIBLE)


class SpanError(ValueError):
    """An entity span does not fit its sentence text."""


class MarkupErrorKind(enum.Enum):
    NO_TAGS = "no_tags"
    MULTIPLE_TAGS = "multiple_tags"
    UNBALANCED = "unbalanced"
    EMPTY_ENTITY = "empty_entity"


class MarkupError(ValueError):
    """Inline entity markup is malformed; `kind` names the malformation."""

    def __init__(self, kind: MarkupErrorKind, message: str):
        super().__init__(message)
        self.kind = kind


@dataclass(frozen=True)
class AnnotatedSentence:
    """One sentence with a single target-entity character span.

    `entity` is (start inclusive, end exclusive) in code points of `text`.
    """

    id: str
    text: str
    entity: tuple[int, int]
    language: str
    gold: Optional[FactualityLabel] = None
    source: Optional[str] = None

    def __post_init__(self) -> None:
        start, end = self.entity
        if not (0 <= start < end <= len(self.text)):
            raise SpanError(
                f"entity span [{start},{end}) outside text of length {len(self.text)}"
            )
        if not self.text[start:end].strip():
            raise SpanError(f"entity span [{start},{end}) is whitespace only")

    @property
    def entity_text(self) -> str:
        return self.text[self.entity[0] : self.entity[1]]


@dataclass(frozen=True)
class NormalizationPolicy:
    """Which folds to apply before matching.

    fold_umlauts rewrites ä/ö/ü/Ä/Ö/Ü/ß to ae/oe/ue/Ae/Oe/Ue/ss so text and
    trigger lists that encode umlauts differently still meet.  Application
    is deterministic and idempotent.
    """

    fold_case: bool = False
    fold_umlauts: bool = False
    unicode_compose: bool = False

    @classmethod
    def identity(cls) -> "NormalizationPolicy":
        return cls()


@dataclass(frozen=True)
class NormalizedText:
    """Normalized text plus, per normalized code point, its source range.

    `ranges[i]` is the half-open source span that normalized code point i
    derives from; ranges are monotonically non-decreasing and cover the
    normalized text completely.
    """

    text: str
    ranges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        assert len(self.text) == len(self.ranges)

    def span_to_source(self, start: int, end: int) -> tuple[int, int]:
        """Map a normalized span back to the covering source span."""
        if start == end:
            pos = self.ranges[start][0] if start < len(self.ranges) else (
                self.ranges[-1][1] if self.ranges else 0
            )
            return (pos, pos)
        return (self.ranges[start][0], self.ranges[end - 1][1])

    def is_aligned(self, start: int, end: int) -> bool:
        """True if neither endpoint splits a multi-character expansion."""

        def boundary(i: int) -> bool:
            if i == 0 or i == len(self.ranges):
                return True
            return self.ranges[i - 1] != self.ranges[i]

        return boundary(start) and boundary(end)


def _compose_segments(text: str) -> Iterator[tuple[str, int, int]]:
    """Yield NFC-composed output per canonical segment with source range.

    A segment starts at each character with combining class 0; NFC is
    closed over such segments, so composing them independently equals
    composing the whole string while keeping offsets.
    """
    n = len(text)
    i = 0
    while i < n:
        j = i + 1
        while j < n and unicodedata.combining(text[j]) != 0:
            j += 1
        yield unicodedata.normalize("NFC", text[i:j]), i, j
        i = j


def _normalize_pass(text: str, policy: NormalizationPolicy) -> tuple[str, list[tuple[int, int]]]:
    """One compose/fold pass; ranges index into `text`."""
    staged: list[tuple[str, int, int]] = []
    if policy.unicode_compose:
        for chunk, src_start, src_end in _compose_segments(text):
            if chunk == text[src_start:src_end]:
                for offset, ch in enumerate(chunk):
                    staged.append((ch, src_start + offset, src_start + offset + 1))
            elif len(chunk) == 1:
                staged.append((chunk, src_start, src_end))
            else:
                # Partially composable segments keep the whole source range
                # on every output character, like a fold expansion.
                for ch in chunk:
                    staged.append((ch, src_start, src_end))
    else:
        staged = [(text[i], i, i + 1) for i in range(len(text))]

    out_chars: list[str] = []
    out_ranges: list[tuple[int, int]] = []
    for ch, src_start, src_end in staged:
        piece = ch
        if policy.fold_umlauts:
            piece = "".join(_UMLAUT_FOLD.get(c, c) for c in piece)
        if policy.fold_case:
            piece = piece.lower()
        for c in piece:
            out_chars.append(c)
            out_ranges.append((src_start, src_end))
    return "".join(out_chars), out_ranges


def normalize(text: str, policy: NormalizationPolicy) -> NormalizedText:
    """Apply `policy` to `text`, keeping a total normalized→source map.

    With all policy flags false this is the identity: output text equals
    input and every code point maps to itself.  The fold pass runs to a
    fixpoint: folding can surface new composable pairs (an expansion's
    trailing letter meeting a combining mark), so a single pass would not
    be idempotent.
    """
    if policy == NormalizationPolicy.identity():
        return NormalizedText(text, tuple((i, i + 1) for i in range(len(text))))

    current = text
    ranges = [(i, i + 1) for i in range(len(text))]
    for _ in range(5):
        step_text, step_ranges = _normalize_pass(current, policy)
        if step_text == current:
            break
        ranges = [(ranges[a][0], ranges[b - 1][1]) for a, b in step_ranges]
        current = step_text
    return NormalizedText(current, tuple(ranges))


def parse_tagged(tagged: str) -> tuple[str, tuple[int, int]]:
    """Strip one <E>…</E> pair, returning (text, entity span).

    Raises MarkupError naming the malformation: NO_TAGS when neither tag is
    present, MULTIPLE_TAGS when either occurs more than once, UNBALANCED
    when only one tag is present or they appear out of order, EMPTY_ENTITY
    when nothing but whitespace sits between them.
    """
    opens = tagged.count(ENTITY_OPEN)
    closes = tagged.count(ENTITY_CLOSE)
    # "</E>" contains no "<E>", so the two counts are independent.
    if opens == 0 and closes == 0:
        raise MarkupError(MarkupErrorKind.NO_TAGS, "no entity tags present")
    if opens > 1 or closes > 1:
        raise MarkupError(MarkupErrorKind.MULTIPLE_TAGS, "more than one entity tagged")
    if opens != 1 or closes != 1:
        raise MarkupError(MarkupErrorKind.UNBALANCED, "unpaired entity tag")
    open_at = tagged.index(ENTITY_OPEN)
    close_at = tagged.index(ENTITY_CLOSE)
    if close_at < open_at:
        raise MarkupError(MarkupErrorKind.UNBALANCED, "closing tag precedes opening tag")

    inner = tagged[open_at + len(ENTITY_OPEN) : close_at]
    if not inner.strip():
        raise MarkupError(MarkupErrorKind.EMPTY_ENTITY, "entity span is empty")

    text = (
        tagged[:open_at]
        + inner
        + tagged[close_at + len(ENTITY_CLOSE) :]
    )
    return text, (open_at, open_at + len(inner))


def render_tagged(sentence: AnnotatedSentence) -> str:
    """Insert <E>…</E> around the entity span; inverse of parse_tagged."""
    start, end = sentence.entity
    return (
        sentence.text[:start]
        + ENTITY_OPEN
        + sentence.text[start:end]
        + ENTITY_CLOSE
        + sentence.text[end:]
    )


class CorpusFormatError(ValueError):
    """A corpus JSONL line does not match the record schema."""

    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


def sentence_to_record(sentence: AnnotatedSentence) -> dict:
    record = {
        "id": sentence.id,
        "text": sentence.text,
        "entity": {"start": sentence.entity[0], "end": sentence.entity[1]},
        "lang": sentence.language,
    }
    if sentence.gold is not None:
        record["label"] = sentence.gold.value
    if sentence.source is not None:
        record["source"] = sentence.source
    return record


def record_to_sentence(record: dict) -> AnnotatedSentence:
    try:
        entity = record["entity"]
        gold = record.get("label")
        return AnnotatedSentence(
            id=str(record["id"]),
            text=record["text"],
            entity=(int(entity["start"]), int(entity["end"])),
            language=record["lang"],
            gold=FactualityLabel.from_string(gold) if gold is not None else None,
            source=record.get("source"),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed corpus record: {exc}") from exc


def read_corpus(lines: Iterable[str]) -> Iterator[AnnotatedSentence]:
    """Parse corpus JSONL; raises CorpusFormatError with the line number."""
    for number, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(number, f"invalid JSON: {exc}") from exc
        try:
            yield record_to_sentence(record)
        except (ValueError, SpanError) as exc:
            raise CorpusFormatError(number, str(exc)) from exc


def write_corpus(sentences: Iterable[AnnotatedSentence]) -> Iterator[str]:
    """Render sentences as corpus JSONL lines (no trailing newline)."""
    for sentence in sentences:
        yield json.dumps(sentence_to_record(sentence), ensure_ascii=False)
