"""Trigger sets: the rule base of the factuality engine.

File format (one file per language, human-editable):

    # comment lines and blank lines are skipped
    # version: <set version>        (first such comment is the set version)
    <phrase>TAB<category>[TAB order_insensitive]

Categories: PreNegation, PostNegation, PrePossible, PostPossible,
PseudoNegation, Termination, NegationSuffix.  Phrases are normalized under
the set's policy when loaded; the raw file form is kept so validation can
detect phrases whose on-disk encoding disagrees with the policy (the
classic failure: a folding policy with raw-umlaut phrases, or umlaut-coded
phrases matched against unfolded text).

NegationSuffix entries are single tokens that match inside compounds
("schmerzfrei" ends in "frei"); they are handled by the engine's suffix
rule, not the token-sequence matcher.
"""

from __future__ import annotations

import enum
from array import array
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Optional, Sequence

from . import matching
from .core import AnnotatedSentence, NormalizationPolicy, NormalizedText, normalize


class TriggerCategory(enum.Enum):
    PRE_NEGATION = "PreNegation"
    POST_NEGATION = "PostNegation"
    PRE_POSSIBLE = "PrePossible"
    POST_POSSIBLE = "PostPossible"
    PSEUDO_NEGATION = "PseudoNegation"
    TERMINATION = "Termination"
    NEGATION_SUFFIX = "NegationSuffix"

    @property
    def is_negation(self) -> bool:
        return self in (TriggerCategory.PRE_NEGATION, TriggerCategory.POST_NEGATION)

    @property
    def is_possible(self) -> bool:
        return self in (TriggerCategory.PRE_POSSIBLE, TriggerCategory.POST_POSSIBLE)

    @property
    def is_forward(self) -> bool:
        return self in (TriggerCategory.PRE_NEGATION, TriggerCategory.PRE_POSSIBLE)

    @property
    def is_backward(self) -> bool:
        return self in (TriggerCategory.POST_NEGATION, TriggerCategory.POST_POSSIBLE)


class TriggerFormatError(ValueError):
    """A trigger file line cannot be parsed."""

    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


@dataclass(frozen=True)
class Trigger:
    """One cue phrase.  `phrase` is the normalized token sequence; `raw`
    keeps the file form for encoding validation."""

    phrase: tuple[str, ...]
    category: TriggerCategory
    language: str
    order_insensitive: bool = False
    raw: str = ""

    def __post_init__(self) -> None:
        if not self.phrase:
            raise ValueError("empty trigger phrase")
        if any((not token) or any(c.isspace() for c in token) for token in self.phrase):
            raise ValueError(f"trigger tokens must be non-empty and whitespace-free: {self.phrase!r}")
        if self.order_insensitive and len(self.phrase) < 2:
            raise ValueError("order_insensitive requires a multi-token phrase")
        if self.category is TriggerCategory.NEGATION_SUFFIX and len(self.phrase) != 1:
            raise ValueError("NegationSuffix triggers must be single tokens")
        if not self.raw:
            object.__setattr__(self, "raw", self.phrase_text)

    @property
    def phrase_text(self) -> str:
        return " ".join(self.phrase)


@dataclass(frozen=True)
class TriggerSet:
    language: str
    policy: NormalizationPolicy
    triggers: tuple[Trigger, ...]
    version: str = "unversioned"
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        seen = set()
        for trigger in self.triggers:
            key = (trigger.phrase, trigger.category)
            if key in seen:
                raise ValueError(f"duplicate trigger {trigger.phrase_text!r} [{trigger.category.value}]")
            seen.add(key)


_CATEGORY_BY_NAME = {category.value: category for category in TriggerCategory}


def load_trigger_set(
    lines: Iterable[str],
    language: str,
    policy: NormalizationPolicy,
) -> TriggerSet:
    """Parse a trigger TSV stream.

    Phrases are normalized under `policy`.  Exact duplicates (same phrase
    and category) collapse to one trigger with a warning recorded on the
    returned set.
    """
    triggers: list[Trigger] = []
    warnings: list[str] = []
    version = "unversioned"
    seen: dict[tuple[tuple[str, ...], TriggerCategory], int] = {}

    for number, line in enumerate(lines, start=1):
        stripped = line.rstrip("\n")
        if not stripped.strip():
            continue
        if stripped.lstrip().startswith("#"):
            comment = stripped.lstrip().lstrip("#").strip()
            if comment.startswith("version:") and version == "unversioned":
                version = comment[len("version:") :].strip()
            continue
        columns = stripped.split("\t")
        if len(columns) < 2 or len(columns) > 3:
            raise TriggerFormatError(number, f"expected 2 or 3 tab-separated columns, got {len(columns)}")
        raw_phrase = columns[0].strip()
        if not raw_phrase:
            raise TriggerFormatError(number, "empty phrase")
        category_name = columns[1].strip()
        category = _CATEGORY_BY_NAME.get(category_name)
        if category is None:
            raise TriggerFormatError(number, f"unknown category {category_name!r}")
        order_insensitive = False
        if len(columns) == 3 and columns[2].strip():
            flag = columns[2].strip()
            if flag != "order_insensitive":
                raise TriggerFormatError(number, f"unknown flag {flag!r}")
            order_insensitive = True

        phrase = tuple(normalize(raw_phrase, policy).text.split())
        if not phrase:
            raise TriggerFormatError(number, "phrase is empty after normalization")
        try:
            trigger = Trigger(
                phrase=phrase,
                category=category,
                language=language,
                order_insensitive=order_insensitive,
                raw=raw_phrase,
            )
        except ValueError as exc:
            raise TriggerFormatError(number, str(exc)) from exc

        key = (phrase, category)
        if key in seen:
            warnings.append(
                f"line {number}: duplicate trigger {trigger.phrase_text!r} "
                f"[{category.value}] collapsed (first seen on line {seen[key]})"
            )
            continue
        seen[key] = number
        triggers.append(trigger)

    return TriggerSet(
        language=language,
        policy=policy,
        triggers=tuple(triggers),
        version=version,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class Finding:
    kind: str  # encoding-inconsistency | category-conflict | dead-trigger
    phrase: str
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...]

    @property
    def encoding_inconsistencies(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.kind == "encoding-inconsistency")

    def to_text(self) -> str:
        if not self.findings:
            return "no findings\n"
        lines = [f"{f.kind}\t{f.phrase}\t{f.detail}" for f in self.findings]
        return "\n".join(lines) + "\n"


def validate_trigger_set(
    trigger_set: TriggerSet,
    sample_corpus: Optional[Sequence[AnnotatedSentence]] = None,
) -> ValidationReport:
    """Lint a trigger set.

    Reports phrases whose raw file form is not a fixed point of the set's
    normalization policy (encoding inconsistency), phrases listed under
    more than one category, and, given a sample corpus, triggers that never
    match it.
    """
    findings: list[Finding] = []

    for trigger in trigger_set.triggers:
        renormalized = normalize(trigger.raw, trigger_set.policy).text
        if renormalized != trigger.raw:
            findings.append(
                Finding(
                    "encoding-inconsistency",
                    trigger.raw,
                    f"file form differs from policy form {renormalized!r}",
                )
            )

    by_phrase: dict[tuple[str, ...], list[Trigger]] = {}
    for trigger in trigger_set.triggers:
        by_phrase.setdefault(trigger.phrase, []).append(trigger)
    for phrase, shared in sorted(by_phrase.items()):
        if len(shared) > 1:
            categories = ", ".join(sorted(t.category.value for t in shared))
            findings.append(
                Finding(
                    "category-conflict",
                    " ".join(phrase),
                    f"listed under multiple categories: {categories}",
                )
            )

    if sample_corpus is not None:
        matcher = compile_trigger_set(trigger_set)
        alive: set[tuple[tuple[str, ...], TriggerCategory]] = set()
        for sentence in sample_corpus:
            tokens = _simple_tokens(normalize(sentence.text, trigger_set.policy))
            for match in matcher.match(tokens):
                alive.add((match.trigger.phrase, match.trigger.category))
            for suffix in matcher.suffixes:
                if any(_has_suffix(token, suffix.phrase[0]) for token in tokens):
                    alive.add((suffix.phrase, suffix.category))
        for trigger in trigger_set.triggers:
            if (trigger.phrase, trigger.category) not in alive:
                findings.append(
                    Finding(
                        "dead-trigger",
                        trigger.phrase_text,
                        f"[{trigger.category.value}] never matches the sample corpus",
                    )
                )

    return ValidationReport(tuple(findings))


def _simple_tokens(normalized: NormalizedText) -> list[str]:
    # Validation-only tokenizer; the engine owns the real one.
    return normalized.text.split()


def _has_suffix(token: str, suffix: str, min_stem: int = 3) -> bool:
    return token.endswith(suffix) and len(token) - len(suffix) >= min_stem


@dataclass(frozen=True)
class PhraseMatch:
    """A trigger occurrence over a token sequence: [start, end) indices."""

    trigger: Trigger
    start: int
    end: int


class TriggerMatcher:
    """Immutable longest-match-first matcher over normalized tokens.

    Ties on extent go to PseudoNegation triggers, then to lexicographic
    phrase order; matches never overlap.  Built once per trigger set; safe
    for concurrent use.
    """

    def __init__(self, trigger_set: TriggerSet, permutation_slack: int = 1):
        self.language = trigger_set.language
        self.policy = trigger_set.policy
        self.trigger_set = trigger_set
        self.suffixes = tuple(
            t for t in trigger_set.triggers if t.category is TriggerCategory.NEGATION_SUFFIX
        )
        phrase_triggers = [
            t for t in trigger_set.triggers if t.category is not TriggerCategory.NEGATION_SUFFIX
        ]

        def sort_key(trigger: Trigger) -> tuple:
            return (
                0 if trigger.category is TriggerCategory.PSEUDO_NEGATION else 1,
                trigger.phrase_text,
                trigger.category.value,
            )

        rank_order = sorted(phrase_triggers, key=sort_key)
        rank_of = {id(t): i for i, t in enumerate(rank_order)}

        self._triggers = tuple(phrase_triggers)
        vocabulary: dict[str, int] = {}
        flat: list[int] = []
        offsets = [0]
        unordered: list[int] = []
        windows: list[int] = []
        ranks: list[int] = []
        for trigger in self._triggers:
            for token in trigger.phrase:
                flat.append(vocabulary.setdefault(token, len(vocabulary)))
            offsets.append(len(flat))
            unordered.append(1 if trigger.order_insensitive else 0)
            length = len(trigger.phrase)
            windows.append(length + permutation_slack if trigger.order_insensitive else length)
            ranks.append(rank_of[id(trigger)])

        self._vocabulary = vocabulary
        self._flat = array("i", flat)
        self._offsets = array("i", offsets)
        self._unordered = array("i", unordered)
        self._windows = array("i", windows)
        self._ranks = array("i", ranks)

    def match(self, tokens: Sequence[str]) -> list[PhraseMatch]:
        """All maximal non-overlapping matches, scanned left to right."""
        if not self._triggers or not tokens:
            return []
        vocabulary = self._vocabulary
        ids = array("i", (vocabulary.get(token, -1) for token in tokens))
        raw = matching.find_matches(
            ids, self._offsets, self._flat, self._unordered, self._windows, self._ranks
        )
        return [PhraseMatch(self._triggers[t], start, end) for t, start, end in raw]


def compile_trigger_set(trigger_set: TriggerSet, permutation_slack: int = 1) -> TriggerMatcher:
    """Compile a trigger set into an immutable matcher.

    `permutation_slack` widens the window an order-insensitive phrase may
    spread over (window = phrase length + slack), covering verb-final
    reordering with one intervening token by default.
    """
    return TriggerMatcher(trigger_set, permutation_slack=permutation_slack)


# Bundled sets: (language, mode) -> (data file, normalization policy).
# The baseline German policy deliberately does not fold umlauts; that is
# the mismatch the baseline set reproduces.
BUNDLED_SETS: dict[tuple[str, str], tuple[str, NormalizationPolicy]] = {
    ("en", "baseline"): (
        "en_core.tsv",
        NormalizationPolicy(fold_case=True, fold_umlauts=False, unicode_compose=True),
    ),
    ("en", "fixed"): (
        "en_core.tsv",
        NormalizationPolicy(fold_case=True, fold_umlauts=False, unicode_compose=True),
    ),
    ("de", "baseline"): (
        "de_baseline.tsv",
        NormalizationPolicy(fold_case=True, fold_umlauts=False, unicode_compose=True),
    ),
    ("de", "fixed"): (
        "de_fixed.tsv",
        NormalizationPolicy(fold_case=True, fold_umlauts=True, unicode_compose=True),
    ),
}


def load_bundled(language: str, mode: str = "fixed") -> TriggerSet:
    """Load one of the trigger sets shipped with the package."""
    try:
        filename, policy = BUNDLED_SETS[(language, mode)]
    except KeyError:
        known = ", ".join(sorted(f"{lang}/{m}" for lang, m in BUNDLED_SETS))
        raise ValueError(
            f"no bundled trigger set for language={language!r} mode={mode!r} (have: {known})"
        ) from None
    text = resources.files("negfact.data").joinpath(filename).read_text(encoding="utf-8")
    return load_trigger_set(text.splitlines(), language, policy)
