"""The rule-based factuality classifier.

Pipeline per sentence: normalize and tokenize, find trigger phrases, give
each trigger a scope (a token window it governs, cut short by termination
cues), then label the target entity:

  * a negation trigger whose scope covers an entity token -> negated
  * a possibility trigger whose scope covers an entity token -> possible
  * both kinds covering -> the configured precedence rule decides
  * otherwise, with the compound rule enabled, an entity token ending in a
    negation suffix ("schmerzfrei") -> negated
  * otherwise -> affirmed

Two configuration profiles matter in practice: `EngineConfig.baseline()`
reproduces a conservative engine that ignores triggers inside the entity
markup and knows no compound suffixes; `EngineConfig.fixed()` enables both
behaviors.  Paired with the bundled de_baseline/de_fixed trigger sets this
makes the German failure modes directly comparable.
"""

from __future__ import annotations

import enum
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from .core import (
    AnnotatedSentence,
    FactualityLabel,
    NormalizationPolicy,
    SpanError,
    normalize,
    record_to_sentence,
)
from .triggers import Trigger, TriggerCategory, TriggerMatcher

MIN_SUFFIX_STEM = 3  # "frei" alone must not negate; require a real stem


class LanguageMismatch(ValueError):
    """Sentence language differs from the matcher's trigger-set language."""


class Precedence(enum.Enum):
    NEAREST_TRIGGER = "nearest"
    POSSIBLE_OVER_NEGATED = "possible"


@dataclass(frozen=True)
class EngineConfig:
    """Knobs of the classifier.

    scope_window is the classic five-token NegEx window.  With
    entity_internal_triggers off, trigger matches lying entirely inside
    the entity span are discarded (translations often pull the cue into
    the markup).  compound_suffix_negation enables the negation-suffix
    rule for single-token compounds.
    """

    scope_window: int = 5
    entity_internal_triggers: bool = True
    compound_suffix_negation: bool = True
    precedence: Precedence = Precedence.NEAREST_TRIGGER

    def __post_init__(self) -> None:
        if self.scope_window < 1:
            raise ValueError("scope_window must be >= 1")

    @classmethod
    def baseline(cls, scope_window: int = 5) -> "EngineConfig":
        return cls(
            scope_window=scope_window,
            entity_internal_triggers=False,
            compound_suffix_negation=False,
        )

    @classmethod
    def fixed(cls, scope_window: int = 5) -> "EngineConfig":
        return cls(
            scope_window=scope_window,
            entity_internal_triggers=True,
            compound_suffix_negation=True,
        )


@dataclass(frozen=True)
class Token:
    text: str  # normalized form
    source_span: tuple[int, int]  # code points in the original text
    inside_entity: bool


@dataclass(frozen=True)
class TriggerMatch:
    trigger: Trigger
    start: int  # token index, inclusive
    end: int  # token index, exclusive
    source_span: tuple[int, int]
    pseudo: bool
    inside_entity: bool  # all matched tokens lie inside the entity span


@dataclass(frozen=True)
class Detection:
    """Classifier output: the label plus the evidence that produced it."""

    label: FactualityLabel
    trigger: Optional[Trigger] = None
    trigger_span: Optional[tuple[int, int]] = None
    scope: Optional[tuple[int, int]] = None  # source coordinates
    mode_notes: tuple[str, ...] = ()


def _is_word_char(ch: str) -> bool:
    return ch.isalnum() or unicodedata.category(ch) in ("Mn", "Mc")


def tokenize(
    text: str,
    policy: NormalizationPolicy,
    entity: Optional[tuple[int, int]] = None,
) -> list[Token]:
    """Split into word tokens carrying normalized text and source spans.

    Tokens are maximal runs of alphanumeric characters (plus combining
    marks); punctuation yields no tokens, but a hyphen between two word
    characters stays inside its token.  A token is inside the entity when
    its source span overlaps the entity span at all, so entity boundaries
    that cut through a word still mark that word.
    """
    normalized = normalize(text, policy)
    norm = normalized.text
    n = len(norm)
    tokens: list[Token] = []
    i = 0
    while i < n:
        if not _is_word_char(norm[i]):
            i += 1
            continue
        start = i
        i += 1
        while i < n:
            if _is_word_char(norm[i]):
                i += 1
            elif norm[i] == "-" and i + 1 < n and _is_word_char(norm[i + 1]):
                i += 1
            else:
                break
        source_span = normalized.span_to_source(start, i)
        inside = False
        if entity is not None:
            inside = source_span[0] < entity[1] and entity[0] < source_span[1]
        tokens.append(Token(norm[start:i], source_span, inside))
    return tokens


def match_triggers(
    tokens: Sequence[Token],
    matcher: TriggerMatcher,
    config: EngineConfig,
) -> list[TriggerMatch]:
    """Longest-match-first, non-overlapping trigger occurrences.

    Pseudo-negation matches are retained (marked) — they already consumed
    their tokens during the scan, which is what blocks sub-phrase negation
    hits.  With entity_internal_triggers off, matches lying entirely
    inside the entity are dropped after the scan, so they still shadow
    overlapping alternatives.
    """
    matches: list[TriggerMatch] = []
    for match in matcher.match([token.text for token in tokens]):
        span_tokens = tokens[match.start : match.end]
        source_span = (span_tokens[0].source_span[0], span_tokens[-1].source_span[1])
        internal = all(token.inside_entity for token in span_tokens)
        if internal and not config.entity_internal_triggers:
            continue
        matches.append(
            TriggerMatch(
                trigger=match.trigger,
                start=match.start,
                end=match.end,
                source_span=source_span,
                pseudo=match.trigger.category is TriggerCategory.PSEUDO_NEGATION,
                inside_entity=internal,
            )
        )
    return matches


def resolve_scope(
    match: TriggerMatch,
    tokens: Sequence[Token],
    config: EngineConfig,
    terminations: Sequence[TriggerMatch] = (),
) -> tuple[int, int]:
    """Token-index range [a, b) the match governs.

    Pre* triggers run forward from the token after the match, Post*
    triggers backward before it, both capped by the scope window, the
    sentence bounds, and the nearest termination match on that side.
    Pseudo and termination triggers govern nothing.
    """
    category = match.trigger.category
    if category.is_forward:
        a = match.end
        b = min(len(tokens), match.end + config.scope_window)
        for termination in terminations:
            if termination.start >= match.end:
                b = min(b, termination.start)
        return (a, b)
    if category.is_backward:
        b = match.start
        a = max(0, match.start - config.scope_window)
        for termination in terminations:
            if termination.end <= match.start:
                a = max(a, termination.end)
        return (a, b)
    return (match.start, match.start)


@dataclass(frozen=True)
class _Candidate:
    match: TriggerMatch
    scope: tuple[int, int]
    distance: int  # tokens between trigger edge and nearest covered entity token


def _candidates(
    matches: Sequence[TriggerMatch],
    tokens: Sequence[Token],
    config: EngineConfig,
) -> list[_Candidate]:
    terminations = [m for m in matches if m.trigger.category is TriggerCategory.TERMINATION]
    out: list[_Candidate] = []
    for match in matches:
        category = match.trigger.category
        if not (category.is_negation or category.is_possible):
            continue
        scope = resolve_scope(match, tokens, config, terminations)
        covered = [i for i in range(scope[0], scope[1]) if tokens[i].inside_entity]
        if not covered:
            continue
        if category.is_forward:
            distance = covered[0] - match.end
        else:
            distance = match.start - covered[-1] - 1
        out.append(_Candidate(match, scope, distance))
    return out


def _best(candidates: list[_Candidate]) -> _Candidate:
    return min(
        candidates,
        key=lambda c: (c.distance, c.match.start, c.match.trigger.phrase_text),
    )


def _suffix_hit(
    tokens: Sequence[Token], matcher: TriggerMatcher
) -> Optional[tuple[Token, Trigger]]:
    if not matcher.suffixes:
        return None
    suffixes = sorted(matcher.suffixes, key=lambda t: (-len(t.phrase[0]), t.phrase[0]))
    for token in tokens:
        if not token.inside_entity:
            continue
        for suffix in suffixes:
            ending = suffix.phrase[0]
            if token.text.endswith(ending) and len(token.text) - len(ending) >= MIN_SUFFIX_STEM:
                return (token, suffix)
    return None


def classify(
    sentence: AnnotatedSentence,
    matcher: TriggerMatcher,
    config: EngineConfig = EngineConfig(),
) -> Detection:
    """Label the sentence's entity as affirmed, negated, or possible."""
    if sentence.language != matcher.language:
        raise LanguageMismatch(
            f"sentence language {sentence.language!r} != trigger set language {matcher.language!r}"
        )
    tokens = tokenize(sentence.text, matcher.policy, sentence.entity)
    matches = match_triggers(tokens, matcher, config)
    candidates = _candidates(matches, tokens, config)
    negations = [c for c in candidates if c.match.trigger.category.is_negation]
    possibles = [c for c in candidates if c.match.trigger.category.is_possible]

    chosen: Optional[_Candidate] = None
    label: Optional[FactualityLabel] = None
    if negations and possibles:
        best_negation = _best(negations)
        best_possible = _best(possibles)
        if config.precedence is Precedence.POSSIBLE_OVER_NEGATED:
            chosen, label = best_possible, FactualityLabel.POSSIBLE
        elif best_negation.distance < best_possible.distance:
            chosen, label = best_negation, FactualityLabel.NEGATED
        else:  # equal distance favors the weaker claim
            chosen, label = best_possible, FactualityLabel.POSSIBLE
    elif negations:
        chosen, label = _best(negations), FactualityLabel.NEGATED
    elif possibles:
        chosen, label = _best(possibles), FactualityLabel.POSSIBLE

    if chosen is not None and label is not None:
        a, b = chosen.scope
        scope_source = (tokens[a].source_span[0], tokens[b - 1].source_span[1])
        return Detection(
            label=label,
            trigger=chosen.match.trigger,
            trigger_span=chosen.match.source_span,
            scope=scope_source,
        )

    if config.compound_suffix_negation:
        hit = _suffix_hit(tokens, matcher)
        if hit is not None:
            token, suffix = hit
            return Detection(
                label=FactualityLabel.NEGATED,
                trigger=suffix,
                trigger_span=token.source_span,
                scope=token.source_span,
                mode_notes=("compound-suffix match",),
            )

    return Detection(label=FactualityLabel.AFFIRMED)


@dataclass(frozen=True)
class BatchResult:
    id: str
    detection: Optional[Detection] = None
    error: Optional[str] = None


def classify_batch(
    corpus: Iterable[Union[AnnotatedSentence, Mapping]],
    matcher: TriggerMatcher,
    config: EngineConfig = EngineConfig(),
) -> Iterator[BatchResult]:
    """Order-preserving classify over a record stream.

    Records may be AnnotatedSentence values or raw corpus dicts; a record
    with an invalid span (or mismatched language) yields a per-record
    error instead of failing the stream.
    """
    for record in corpus:
        if isinstance(record, AnnotatedSentence):
            sentence = record
        else:
            record_id = str(record.get("id", "?")) if hasattr(record, "get") else "?"
            try:
                sentence = record_to_sentence(dict(record))
            except (SpanError, ValueError, TypeError) as exc:
                yield BatchResult(id=record_id, error=str(exc))
                continue
        try:
            detection = classify(sentence, matcher, config)
        except LanguageMismatch as exc:
            yield BatchResult(id=sentence.id, error=str(exc))
            continue
        yield BatchResult(id=sentence.id, detection=detection)


def detection_to_record(sentence_id: str, detection: Detection) -> dict:
    """Wire form of a detection: {"id", "label", "trigger", "scope"}."""
    return {
        "id": sentence_id,
        "label": detection.label.value,
        "trigger": detection.trigger.phrase_text if detection.trigger else None,
        "scope": list(detection.scope) if detection.scope else None,
    }
