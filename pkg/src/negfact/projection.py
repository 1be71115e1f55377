"""Markup-preserving translation projection.

Sentences travel through the pipeline as tagged strings ("… <E>entity</E> …"),
so a markup-aware MT backend carries the entity span, and the gold label,
into the target language for free.  MT output is messy in three documented
ways, checked in this fixed order:

  1. EmptyOutput — the backend produced nothing (or only whitespace);
  2. Corrupt     — degenerate repetition or a blown-up length ratio;
  3. MarkupLost  — the entity tags did not survive translation.

Records failing any check are discarded and counted per status; everything
else is re-parsed into a target-language sentence that inherits the source
gold label unchanged.  Corruption thresholds are heuristics exposed on
CorruptionConfig and echoed into the discard report so runs are
self-describing.
"""

from __future__ import annotations

import enum
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Protocol

from .core import (
    ENTITY_CLOSE,
    ENTITY_OPEN,
    AnnotatedSentence,
    MarkupError,
    SpanError,
    parse_tagged,
    render_tagged,
)


class BackendErrorKind(enum.Enum):
    TIMEOUT = "timeout"
    TRANSPORT = "transport"
    NON_UTF8 = "non-utf8"


class BackendError(RuntimeError):
    def __init__(self, kind: BackendErrorKind, detail: str = ""):
        super().__init__(f"{kind.value}: {detail}" if detail else kind.value)
        self.kind = kind
        self.detail = detail


class MtBackend(Protocol):
    """Translate one tagged string; must be side-effect-free per call.

    Implementations never see untagged text: callers tag the entity before
    translating.  Failures surface as BackendError.
    """

    def translate(self, tagged: str, source_lang: str, target_lang: str) -> str: ...


class ProjectionStatus(enum.Enum):
    OK = "ok"
    EMPTY_OUTPUT = "empty"
    CORRUPT = "corrupt"
    MARKUP_LOST = "markup_lost"
    BACKEND_ERROR = "backend_error"


@dataclass(frozen=True)
class CorruptionConfig:
    """Thresholds for the corrupt-output check.

    A target counts as corrupt when any n-gram of up to `repeat_ngram`
    whitespace tokens repeats at least `repeat_count` times back to back,
    or when the target/source code-point ratio (both sides tagged) exceeds
    `max_length_ratio`.
    """

    max_length_ratio: float = 2.5
    repeat_ngram: int = 3
    repeat_count: int = 3

    def __post_init__(self) -> None:
        if self.max_length_ratio <= 0 or self.repeat_ngram <= 0 or self.repeat_count <= 0:
            raise ValueError("corruption thresholds must be positive")


@dataclass(frozen=True)
class ProjectionRecord:
    """One sentence's journey: tagging -> translation -> validation."""

    source: AnnotatedSentence
    tagged_source: str
    raw_target: Optional[str]
    status: ProjectionStatus
    detail: str = ""
    target: Optional[AnnotatedSentence] = None


def translate_record(
    sentence: AnnotatedSentence,
    backend: MtBackend,
    target_lang: str,
) -> str:
    """Tag the sentence and return the backend's output verbatim.

    Validation is a separate step; BackendError propagates to the caller.
    """
    return backend.translate(render_tagged(sentence), sentence.language, target_lang)


def _has_consecutive_repeat(tokens: list[str], max_ngram: int, count: int) -> bool:
    n = len(tokens)
    for size in range(1, max_ngram + 1):
        if size * count > n:
            break
        for start in range(n - size * count + 1):
            gram = tokens[start : start + size]
            if all(
                tokens[start + rep * size : start + (rep + 1) * size] == gram
                for rep in range(1, count)
            ):
                return True
    return False


def validate_translation(
    source: AnnotatedSentence,
    raw_target: str,
    config: CorruptionConfig = CorruptionConfig(),
    target_lang: str = "und",
) -> tuple[ProjectionStatus, Optional[AnnotatedSentence]]:
    """Classify a raw translation; Ok results carry the parsed target.

    Checks run in a fixed order (empty, corrupt, markup) so corruption
    statistics are not masked by incidental tag loss in garbage output.
    The target inherits the source's id, gold label, and provenance.
    """
    if not raw_target.strip():
        return (ProjectionStatus.EMPTY_OUTPUT, None)

    tagged_source = render_tagged(source)
    # repetition is about content, so markup does not glue onto tokens
    content = raw_target.replace(ENTITY_OPEN, " ").replace(ENTITY_CLOSE, " ")
    tokens = content.split()
    ratio = len(raw_target) / max(len(tagged_source), 1)
    if ratio > config.max_length_ratio or _has_consecutive_repeat(
        tokens, config.repeat_ngram, config.repeat_count
    ):
        return (ProjectionStatus.CORRUPT, None)

    try:
        text, entity = parse_tagged(raw_target)
    except MarkupError:
        return (ProjectionStatus.MARKUP_LOST, None)
    try:
        target = AnnotatedSentence(
            id=source.id,
            text=text,
            entity=entity,
            language=target_lang,
            gold=source.gold,
            source=source.source,
        )
    except SpanError:
        return (ProjectionStatus.MARKUP_LOST, None)
    return (ProjectionStatus.OK, target)


@dataclass
class DiscardReport:
    """Bookkeeping for one projection run; retained + discards = input."""

    input: int = 0
    retained: int = 0
    discarded: dict = field(
        default_factory=lambda: {
            "empty": 0,
            "corrupt": 0,
            "markup_lost": 0,
            "backend_error": 0,
        }
    )
    config: CorruptionConfig = field(default_factory=CorruptionConfig)

    @property
    def total_discarded(self) -> int:
        return sum(self.discarded.values())

    def to_json(self) -> str:
        payload = {
            "input": self.input,
            "retained": self.retained,
            "discarded": dict(self.discarded),
            "config": {
                "max_length_ratio": self.config.max_length_ratio,
                "repeat_ngram": self.config.repeat_ngram,
                "repeat_count": self.config.repeat_count,
            },
        }
        return json.dumps(payload, ensure_ascii=False)

    def to_text(self) -> str:
        lines = [
            "projection report "
            f"(max_length_ratio={self.config.max_length_ratio}, "
            f"repeat_ngram={self.config.repeat_ngram}, "
            f"repeat_count={self.config.repeat_count})",
            f"input     {self.input}",
            f"retained  {self.retained}",
            f"discarded {self.total_discarded}",
        ]
        total = self.total_discarded
        for status, count in self.discarded.items():
            share = (100.0 * count / total) if total else 0.0
            lines.append(f"  {status:<14}{count:>6}  {share:5.1f}% of discards")
        return "\n".join(lines) + "\n"


def project_records(
    corpus: Iterable[AnnotatedSentence],
    backend: MtBackend,
    target_lang: str,
    config: CorruptionConfig = CorruptionConfig(),
    jobs: int = 4,
) -> list[ProjectionRecord]:
    """Translate and validate every sentence, preserving input order.

    Translation calls fan out over at most `jobs` worker threads;
    BackendError is caught per record and becomes a discard status.
    """
    sentences = list(corpus)

    def call(sentence: AnnotatedSentence) -> tuple[Optional[str], str]:
        try:
            return translate_record(sentence, backend, target_lang), ""
        except BackendError as exc:
            return None, str(exc)

    if jobs > 1 and len(sentences) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(call, sentences))
    else:
        outputs = [call(sentence) for sentence in sentences]

    records: list[ProjectionRecord] = []
    for sentence, (raw_target, error_detail) in zip(sentences, outputs):
        tagged = render_tagged(sentence)
        if raw_target is None:
            records.append(
                ProjectionRecord(
                    source=sentence,
                    tagged_source=tagged,
                    raw_target=None,
                    status=ProjectionStatus.BACKEND_ERROR,
                    detail=error_detail,
                )
            )
            continue
        status, target = validate_translation(sentence, raw_target, config, target_lang)
        records.append(
            ProjectionRecord(
                source=sentence,
                tagged_source=tagged,
                raw_target=raw_target,
                status=status,
                target=target,
            )
        )
    return records


def project_corpus(
    corpus: Iterable[AnnotatedSentence],
    backend: MtBackend,
    target_lang: str,
    config: CorruptionConfig = CorruptionConfig(),
    jobs: int = 4,
) -> tuple[list[AnnotatedSentence], DiscardReport]:
    """Project a corpus; returns (retained targets, discard report)."""
    records = project_records(corpus, backend, target_lang, config, jobs=jobs)
    report = DiscardReport(config=config)
    retained: list[AnnotatedSentence] = []
    for record in records:
        report.input += 1
        if record.status is ProjectionStatus.OK and record.target is not None:
            report.retained += 1
            retained.append(record.target)
        else:
            report.discarded[record.status.value] += 1
    return retained, report


class StubBackend:
    """Deterministic test double: an exact tagged-string lexicon.

    Unmapped inputs follow `default`: "echo" returns the input unchanged,
    "empty" returns "", "error" raises BackendError(transport).
    """

    def __init__(self, lexicon: dict[str, str], default: str = "echo"):
        if default not in ("echo", "empty", "error"):
            raise ValueError(f"unknown stub default {default!r}")
        self._lexicon = dict(lexicon)
        self._default = default

    def translate(self, tagged: str, source_lang: str, target_lang: str) -> str:
        hit = self._lexicon.get(tagged)
        if hit is not None:
            return hit
        if self._default == "echo":
            return tagged
        if self._default == "empty":
            return ""
        raise BackendError(BackendErrorKind.TRANSPORT, f"no translation for {tagged!r}")


def stub_backend(lexicon: dict[str, str], default: str = "echo") -> StubBackend:
    return StubBackend(lexicon, default=default)


class HttpBackend:
    """Minimal JSON-over-HTTP client for a locally running MT service.

    POSTs {"text": tagged, "src": source, "tgt": target} and expects
    {"text": tagged} back; anything else is a transport error.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint
        self.timeout = timeout

    def translate(self, tagged: str, source_lang: str, target_lang: str) -> str:
        import requests

        try:
            response = requests.post(
                self.endpoint,
                json={"text": tagged, "src": source_lang, "tgt": target_lang},
                timeout=self.timeout,
            )
        except requests.Timeout as exc:
            raise BackendError(BackendErrorKind.TIMEOUT, str(exc)) from exc
        except requests.RequestException as exc:
            raise BackendError(BackendErrorKind.TRANSPORT, str(exc)) from exc
        if response.status_code != 200:
            raise BackendError(
                BackendErrorKind.TRANSPORT, f"HTTP {response.status_code}"
            )
        try:
            body = response.content.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BackendError(BackendErrorKind.NON_UTF8, str(exc)) from exc
        try:
            payload = json.loads(body)
            return payload["text"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise BackendError(
                BackendErrorKind.TRANSPORT, f"malformed response body: {exc}"
            ) from exc


def http_backend(endpoint: str, timeout: float = 30.0) -> HttpBackend:
    return HttpBackend(endpoint, timeout=timeout)
