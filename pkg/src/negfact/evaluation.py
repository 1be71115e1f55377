"""Per-label scoring of factuality predictions against gold labels.

Pairing is always by explicit record id, never by stream position, so the
same harness scores the rule engine and any external classifier's
prediction file.  Zero denominators yield 0.0 rather than an error: tiny
"possible" support must not crash a run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

from .core import LABELS, FactualityLabel


class MissingPrediction(ValueError):
    def __init__(self, ids: list[str]):
        shown = ", ".join(ids[:10]) + (", ..." if len(ids) > 10 else "")
        super().__init__(f"{len(ids)} gold id(s) without prediction: {shown}")
        self.ids = ids


class DuplicateGold(ValueError):
    def __init__(self, id_: str):
        super().__init__(f"gold id {id_!r} appears more than once")
        self.id = id_


class DatasetMismatch(ValueError):
    pass


class PredictionFormatError(ValueError):
    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


@dataclass
class ConfusionMatrix:
    """3x3 counts indexed (gold, predicted) over the label order."""

    counts: list = field(default_factory=lambda: [[0] * len(LABELS) for _ in LABELS])
    extra_predictions: int = 0  # predictions without a gold id, ignored

    def add(self, gold: FactualityLabel, predicted: FactualityLabel, n: int = 1) -> None:
        self.counts[_INDEX[gold]][_INDEX[predicted]] += n

    def get(self, gold: FactualityLabel, predicted: FactualityLabel) -> int:
        return self.counts[_INDEX[gold]][_INDEX[predicted]]

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def gold_count(self, label: FactualityLabel) -> int:
        return sum(self.counts[_INDEX[label]])

    def predicted_count(self, label: FactualityLabel) -> int:
        column = _INDEX[label]
        return sum(row[column] for row in self.counts)

    def accuracy(self) -> float:
        total = self.total
        if total == 0:
            return 0.0
        return sum(self.counts[i][i] for i in range(len(LABELS))) / total

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        merged = ConfusionMatrix()
        for i in range(len(LABELS)):
            for j in range(len(LABELS)):
                merged.counts[i][j] = self.counts[i][j] + other.counts[i][j]
        merged.extra_predictions = self.extra_predictions + other.extra_predictions
        return merged


_INDEX = {label: i for i, label in enumerate(LABELS)}


def score(
    gold: Iterable[tuple[str, FactualityLabel]],
    predictions: Iterable[tuple[str, FactualityLabel]],
) -> ConfusionMatrix:
    """Pair gold and predicted labels by id into a confusion matrix.

    Every gold id must appear exactly once and have a prediction; extra
    predictions are ignored but counted on the matrix.
    """
    predicted_by_id: dict[str, FactualityLabel] = {}
    duplicates = 0
    for id_, label in predictions:
        if id_ in predicted_by_id:
            duplicates += 1
            continue
        predicted_by_id[id_] = label

    matrix = ConfusionMatrix()
    seen: set[str] = set()
    missing: list[str] = []
    for id_, gold_label in gold:
        if id_ in seen:
            raise DuplicateGold(id_)
        seen.add(id_)
        predicted = predicted_by_id.get(id_)
        if predicted is None:
            missing.append(id_)
            continue
        matrix.add(gold_label, predicted)
    if missing:
        raise MissingPrediction(missing)
    matrix.extra_predictions = len(predicted_by_id) - len(seen) + duplicates
    return matrix


@dataclass(frozen=True)
class EvalReport:
    """Per-label precision/recall/F1 with support, for one system."""

    system: str
    dataset: str
    precision: dict[FactualityLabel, float]
    recall: dict[FactualityLabel, float]
    f1: dict[FactualityLabel, float]
    support: dict[FactualityLabel, int]
    total: int

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "dataset": self.dataset,
            "total": self.total,
            "labels": {
                label.value: {
                    "precision": self.precision[label],
                    "recall": self.recall[label],
                    "f1": self.f1[label],
                    "support": self.support[label],
                }
                for label in LABELS
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    def to_text(self) -> str:
        lines = [
            f"system: {self.system}  dataset: {self.dataset}  n={self.total}",
            f"{'label':<10}{'prec':>6}{'rec':>6}{'f1':>6}{'support':>9}",
        ]
        for label in LABELS:
            lines.append(
                f"{label.value:<10}"
                f"{self.precision[label]:>6.2f}{self.recall[label]:>6.2f}"
                f"{self.f1[label]:>6.2f}{self.support[label]:>9}"
            )
        return "\n".join(lines) + "\n"


def metrics(
    matrix: ConfusionMatrix,
    system: str = "system",
    dataset: str = "dataset",
) -> EvalReport:
    """Precision, recall, F1 and support per label, zeros for empty classes."""
    precision: dict[FactualityLabel, float] = {}
    recall: dict[FactualityLabel, float] = {}
    f1: dict[FactualityLabel, float] = {}
    support: dict[FactualityLabel, int] = {}
    for label in LABELS:
        true_positive = matrix.get(label, label)
        predicted = matrix.predicted_count(label)
        gold = matrix.gold_count(label)
        p = true_positive / predicted if predicted else 0.0
        r = true_positive / gold if gold else 0.0
        precision[label] = p
        recall[label] = r
        f1[label] = (2 * p * r / (p + r)) if (p + r) else 0.0
        support[label] = gold
    return EvalReport(
        system=system,
        dataset=dataset,
        precision=precision,
        recall=recall,
        f1=f1,
        support=support,
        total=matrix.total,
    )


@dataclass(frozen=True)
class ComparisonTable:
    """Several systems' reports side by side, best F1 marked per label."""

    dataset: str
    reports: tuple[EvalReport, ...]
    best: dict[FactualityLabel, tuple[str, ...]]  # systems sharing the best F1

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "systems": [report.to_dict() for report in self.reports],
            "best_f1": {label.value: list(self.best[label]) for label in LABELS},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    def to_text(self) -> str:
        header = f"{'label':<10}"
        for report in self.reports:
            header += f"{report.system + ' P':>12}{'R':>6}{'F1':>7}"
        lines = [f"dataset: {self.dataset}", header]
        for label in LABELS:
            row = f"{label.value:<10}"
            for report in self.reports:
                marker = "*" if report.system in self.best[label] and len(self.reports) > 1 else " "
                row += (
                    f"{report.precision[label]:>12.2f}"
                    f"{report.recall[label]:>6.2f}"
                    f"{report.f1[label]:>6.2f}{marker}"
                )
            lines.append(row)
        if len(self.reports) > 1:
            lines.append("* best F1 per label (ties share the marker)")
        return "\n".join(lines) + "\n"


def compare(reports: list[EvalReport]) -> ComparisonTable:
    """Build the side-by-side table; all reports must share a dataset."""
    if not reports:
        raise ValueError("at least one report required")
    dataset = reports[0].dataset
    for report in reports[1:]:
        if report.dataset != dataset:
            raise DatasetMismatch(
                f"reports mix datasets {dataset!r} and {report.dataset!r}"
            )
    best: dict[FactualityLabel, tuple[str, ...]] = {}
    for label in LABELS:
        top = max(report.f1[label] for report in reports)
        best[label] = tuple(
            report.system for report in reports if report.f1[label] == top
        )
    return ComparisonTable(dataset=dataset, reports=tuple(reports), best=best)


def load_predictions(lines: Iterable[str]) -> list[tuple[str, FactualityLabel]]:
    """Parse prediction JSONL: {"id": ..., "label": ...} per line."""
    pairs: list[tuple[str, FactualityLabel]] = []
    for number, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise PredictionFormatError(number, f"invalid JSON: {exc}") from exc
        try:
            id_ = str(record["id"])
            label = FactualityLabel.from_string(record["label"])
        except (KeyError, TypeError, AttributeError) as exc:
            raise PredictionFormatError(number, f"missing id/label: {exc}") from exc
        except ValueError as exc:
            raise PredictionFormatError(number, str(exc)) from exc
        pairs.append((id_, label))
    return pairs
