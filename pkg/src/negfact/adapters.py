"""Corpus importers: external annotation formats -> canonical JSONL records.

None of the source corpora ship with this package; each adapter is
exercised by a synthetic fixture that mimics the documented format.  Label
mappings are total over their declared vocabulary — an unknown label is a
loud error, a declared-but-unwanted label is an explicit drop.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .core import AnnotatedSentence, FactualityLabel, LABELS, SpanError

DROP = None  # mapping target for labels excluded from the three-class task


class AdapterFormatError(ValueError):
    def __init__(self, record: str, reason: str):
        super().__init__(f"{reason} (record: {record})")
        self.record = record
        self.reason = reason


class OffsetError(AdapterFormatError):
    """A concept span points outside its line."""


class MappingError(ValueError):
    """A source label is missing from the declared vocabulary."""


class MissingGold(ValueError):
    """A record without a gold label where one is required."""


@dataclass(frozen=True)
class LabelMapping:
    """Source-label vocabulary -> FactualityLabel or DROP (= None)."""

    name: str
    rules: dict[str, Optional[FactualityLabel]]

    def apply(self, source_label: str) -> Optional[FactualityLabel]:
        try:
            return self.rules[source_label]
        except KeyError:
            known = ", ".join(sorted(self.rules))
            raise MappingError(
                f"{self.name}: unmapped label {source_label!r} (vocabulary: {known})"
            ) from None


def i2b2_mapping() -> LabelMapping:
    """Assertion classes -> the three target labels; the rest is dropped."""
    return LabelMapping(
        name="i2b2",
        rules={
            "present": FactualityLabel.AFFIRMED,
            "absent": FactualityLabel.NEGATED,
            "possible": FactualityLabel.POSSIBLE,
            "conditional": DROP,
            "hypothetical": DROP,
            "not_associated": DROP,
            "associated_with_someone_else": DROP,
        },
    )


def ex4cds_mapping() -> LabelMapping:
    return LabelMapping(
        name="ex4cds",
        rules={
            "affirmed": FactualityLabel.AFFIRMED,
            "negated": FactualityLabel.NEGATED,
            "possible": FactualityLabel.POSSIBLE,
            "possible-future": FactualityLabel.POSSIBLE,
            "unlikely": FactualityLabel.POSSIBLE,
            "minor": FactualityLabel.AFFIRMED,
        },
    )


def bronco_mapping() -> LabelMapping:
    return LabelMapping(
        name="bronco",
        rules={
            "affirmed": FactualityLabel.AFFIRMED,
            "negated": FactualityLabel.NEGATED,
            "possible_future": FactualityLabel.POSSIBLE,
            "speculation": FactualityLabel.POSSIBLE,
        },
    )


@dataclass
class ImportSummary:
    input: int = 0
    emitted: int = 0
    dropped: Counter = field(default_factory=Counter)  # source label -> count
    excluded: int = 0  # structural exclusions (unmergeable fragments, type filter)

    @property
    def total_dropped(self) -> int:
        return sum(self.dropped.values())

    def to_text(self) -> str:
        parts = [
            f"records {self.input}, emitted {self.emitted}, "
            f"dropped {self.total_dropped}, excluded {self.excluded}"
        ]
        for label, count in sorted(self.dropped.items()):
            parts.append(f"  dropped {label}: {count}")
        return "\n".join(parts) + "\n"


_ASSERTION_LINE = re.compile(
    r'^c="(?P<concept>.*)"\s+'
    r"(?P<line1>\d+):(?P<tok1>\d+)\s+(?P<line2>\d+):(?P<tok2>\d+)"
    r'\|\|t="(?P<ctype>.*)"'
    r'\|\|a="(?P<assertion>.*)"\s*$'
)


def _token_char_spans(line: str) -> list[tuple[int, int]]:
    spans = []
    position = 0
    for token in line.split():
        start = line.index(token, position)
        spans.append((start, start + len(token)))
        position = start + len(token)
    return spans


def import_assertion_corpus(
    assertion_lines: Iterable[str],
    document_lines: Sequence[str],
    mapping: Optional[LabelMapping] = None,
    doc_id: str = "doc",
    language: str = "en",
) -> tuple[list[AnnotatedSentence], ImportSummary]:
    """Convert concept/assertion records against their document.

    Records look like  c="concept text" L:T L:T||t="type"||a="assertion"
    with 1-based line numbers and 0-based token offsets (inclusive on both
    ends).  The concept must stay on one line: instances are sentence
    scoped.  Dropped assertion classes are counted, not emitted.
    """
    mapping = mapping or i2b2_mapping()
    summary = ImportSummary()
    sentences: list[AnnotatedSentence] = []
    for raw in assertion_lines:
        raw = raw.strip()
        if not raw:
            continue
        summary.input += 1
        match = _ASSERTION_LINE.match(raw)
        if match is None:
            raise AdapterFormatError(raw, "unparseable assertion record")
        line1, tok1 = int(match["line1"]), int(match["tok1"])
        line2, tok2 = int(match["line2"]), int(match["tok2"])
        if line1 != line2:
            raise AdapterFormatError(raw, "concept spans multiple lines")
        if not (1 <= line1 <= len(document_lines)):
            raise OffsetError(raw, f"line {line1} outside document of {len(document_lines)} lines")
        line_text = document_lines[line1 - 1].rstrip("\n")
        spans = _token_char_spans(line_text)
        if tok1 > tok2 or tok2 >= len(spans):
            raise OffsetError(raw, f"token range {tok1}:{tok2} outside line of {len(spans)} tokens")
        label = mapping.apply(match["assertion"])
        if label is DROP:
            summary.dropped[match["assertion"]] += 1
            continue
        entity = (spans[tok1][0], spans[tok2][1])
        sentences.append(
            AnnotatedSentence(
                id=f"{doc_id}:{line1}:{tok1}-{tok2}",
                text=line_text,
                entity=entity,
                language=language,
                gold=label,
                source=mapping.name,
            )
        )
        summary.emitted += 1
    return sentences, summary


@dataclass(frozen=True)
class FragmentedEntity:
    """An entity split into ordered, non-overlapping spans in one sentence."""

    fragments: tuple[tuple[int, int], ...]
    max_gap: int = 50

    def __post_init__(self) -> None:
        if not self.fragments:
            raise ValueError("at least one fragment required")
        for start, end in self.fragments:
            if start >= end:
                raise ValueError(f"empty fragment [{start},{end})")
        for (_, prev_end), (next_start, _) in zip(self.fragments, self.fragments[1:]):
            if next_start < prev_end:
                raise ValueError("fragments must be sorted and non-overlapping")


def merge_fragments(text: str, entity: FragmentedEntity) -> Optional[tuple[int, int]]:
    """Hull span when every inter-fragment gap is small enough, else None.

    The gap is counted in code points between one fragment's end and the
    next fragment's start; a gap beyond max_gap makes the whole entity
    unmergeable (the record is excluded, not truncated).
    """
    for (_, prev_end), (next_start, _) in zip(entity.fragments, entity.fragments[1:]):
        if next_start - prev_end > entity.max_gap:
            return None
    hull = (entity.fragments[0][0], entity.fragments[-1][1])
    if hull[1] > len(text):
        raise SpanError(f"fragment hull {hull} outside text of length {len(text)}")
    return hull


def label_distribution(corpus: Iterable[AnnotatedSentence]) -> dict[FactualityLabel, int]:
    """Gold-label counts in fixed label order (affirmed, negated, possible)."""
    counts = {label: 0 for label in LABELS}
    for sentence in corpus:
        if sentence.gold is None:
            raise MissingGold(f"record {sentence.id!r} has no gold label")
        counts[sentence.gold] += 1
    return counts


def read_tabular(
    lines: Iterable[str],
    expected_columns: Sequence[str],
) -> Iterable[dict[str, str]]:
    """Read a headered TSV export, yielding one dict per row."""
    iterator = iter(lines)
    try:
        header_line = next(iterator)
    except StopIteration:
        return
    header = header_line.rstrip("\n").split("\t")
    if header != list(expected_columns):
        raise AdapterFormatError(
            header_line.rstrip("\n"),
            f"expected header {list(expected_columns)}, got {header}",
        )
    for number, line in enumerate(iterator, start=2):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        values = line.split("\t")
        if len(values) != len(header):
            raise AdapterFormatError(line, f"row {number}: expected {len(header)} columns")
        yield dict(zip(header, values))


EX4CDS_COLUMNS = ("id", "label", "entity_type", "start", "end", "text")


def import_ex4cds(
    lines: Iterable[str],
    entity_type: str = "medical-condition",
    language: str = "de",
) -> tuple[list[AnnotatedSentence], ImportSummary]:
    """Import a physician-note export, keeping one entity type.

    Rows of other entity types are excluded (counted), matching the
    target-entity restriction the factuality task uses.
    """
    mapping = ex4cds_mapping()
    summary = ImportSummary()
    sentences: list[AnnotatedSentence] = []
    for row in read_tabular(lines, EX4CDS_COLUMNS):
        summary.input += 1
        if row["entity_type"] != entity_type:
            summary.excluded += 1
            continue
        label = mapping.apply(row["label"])
        if label is DROP:
            summary.dropped[row["label"]] += 1
            continue
        try:
            entity = (int(row["start"]), int(row["end"]))
        except ValueError as exc:
            raise AdapterFormatError(str(row), f"bad span: {exc}") from exc
        sentences.append(
            AnnotatedSentence(
                id=row["id"],
                text=row["text"],
                entity=entity,
                language=language,
                gold=label,
                source="ex4cds",
            )
        )
        summary.emitted += 1
    return sentences, summary


BRONCO_COLUMNS = ("id", "label", "fragments", "text")


def import_bronco(
    lines: Iterable[str],
    max_gap: int = 50,
    language: str = "de",
) -> tuple[list[AnnotatedSentence], ImportSummary]:
    """Import a discharge-summary export with fragmented entities.

    The fragments column is "start-end" pairs joined by ";"; fragments are
    merged to their hull when every gap is within max_gap, otherwise the
    record is excluded and counted.
    """
    mapping = bronco_mapping()
    summary = ImportSummary()
    sentences: list[AnnotatedSentence] = []
    for row in read_tabular(lines, BRONCO_COLUMNS):
        summary.input += 1
        label = mapping.apply(row["label"])
        if label is DROP:
            summary.dropped[row["label"]] += 1
            continue
        try:
            fragments = tuple(
                (int(part.split("-")[0]), int(part.split("-")[1]))
                for part in row["fragments"].split(";")
            )
            fragmented = FragmentedEntity(fragments=fragments, max_gap=max_gap)
        except (ValueError, IndexError) as exc:
            raise AdapterFormatError(str(row), f"bad fragments column: {exc}") from exc
        hull = merge_fragments(row["text"], fragmented)
        if hull is None:
            summary.excluded += 1
            continue
        sentences.append(
            AnnotatedSentence(
                id=row["id"],
                text=row["text"],
                entity=hull,
                language=language,
                gold=label,
                source="bronco",
            )
        )
        summary.emitted += 1
    return sentences, summary
