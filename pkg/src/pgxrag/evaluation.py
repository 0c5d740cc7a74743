"""Evaluation harness: datasets, annotations, metrics, quiz scoring, reports.

Human annotations score each response on four 5-point rubric dimensions
(accuracy, relevance, completeness, clarity) and count retrieval outcomes
(true/false positives, false negatives).  This module turns piles of those
records into per-group aggregates, paired significance tests, and a
comparison report the CLI and the HTTP service both serve.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import (
    EmptyGroup,
    MalformedRecord,
    MissingFile,
    UndefinedMetric,
    UnknownGroup,
    UnknownItem,
    DuplicateAnswer,
)
from .lexicon import GuidelineLexicon
from .stats import ALTERNATIVE_GREATER, WilcoxonResult, wilcoxon_signed_rank

LIKERT_METRICS = ("accuracy", "relevance", "completeness", "clarity")
RATIO_METRICS = ("recall", "precision", "f1")

EXPECTED_QUERIES_PER_GUIDELINE = 10


class Audience(str, Enum):
    PROVIDER = "provider"
    ADULT = "adult"
    PEDIATRIC = "pediatric"


# --- dataset ---------------------------------------------------------------

@dataclass(frozen=True)
class QueryRecord:
    query_id: str
    guideline_key: str
    audience: Audience
    text: str

    @classmethod
    def from_obj(cls, obj: object, line_number: int = 0) -> "QueryRecord":
        if not isinstance(obj, dict):
            raise MalformedRecord(line_number, "record must be a JSON object")
        for key in ("query_id", "guideline_key", "audience", "text"):
            if not isinstance(obj.get(key), str) or not obj[key].strip():
                raise MalformedRecord(line_number, f"field {key!r} must be a nonempty string")
        try:
            audience = Audience(obj["audience"])
        except ValueError:
            allowed = ", ".join(a.value for a in Audience)
            raise MalformedRecord(
                line_number, f"audience {obj['audience']!r} not one of: {allowed}"
            ) from None
        return cls(
            query_id=obj["query_id"],
            guideline_key=obj["guideline_key"],
            audience=audience,
            text=obj["text"],
        )

    def to_obj(self) -> dict:
        return {
            "query_id": self.query_id,
            "guideline_key": self.guideline_key,
            "audience": self.audience.value,
            "text": self.text,
        }


def _read_jsonl(path: Path | str, kind: str) -> Iterable[tuple[int, object]]:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"{kind} file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield line_number, json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line_number, f"invalid JSON ({exc.msg})") from exc


def load_dataset(path: Path | str) -> list[QueryRecord]:
    records: list[QueryRecord] = []
    seen: set[str] = set()
    for line_number, obj in _read_jsonl(path, "dataset"):
        record = QueryRecord.from_obj(obj, line_number)
        if record.query_id in seen:
            raise MalformedRecord(line_number, f"duplicate query_id {record.query_id!r}")
        seen.add(record.query_id)
        records.append(record)
    return records


@dataclass(frozen=True)
class DatasetReport:
    total: int
    per_guideline: Mapping[str, int]
    unknown_keys: tuple[str, ...]
    conformant: bool
    violations: tuple[str, ...]


def validate_dataset(records: Sequence[QueryRecord], lexicon: GuidelineLexicon) -> DatasetReport:
    """Check the benchmark shape: every lexicon guideline exactly 10 queries.

    Non-conformant datasets are still usable (the report just says so); the
    flag exists so published aggregate numbers can assert the shape they
    assume.
    """
    counts: dict[str, int] = {key: 0 for key in lexicon.by_key}
    unknown: list[str] = []
    for record in records:
        if record.guideline_key in counts:
            counts[record.guideline_key] += 1
        elif record.guideline_key not in unknown:
            unknown.append(record.guideline_key)
    violations: list[str] = []
    for key, count in counts.items():
        if count != EXPECTED_QUERIES_PER_GUIDELINE:
            violations.append(f"{key}: {count} queries, expected {EXPECTED_QUERIES_PER_GUIDELINE}")
    for key in unknown:
        violations.append(f"{key}: not a lexicon guideline")
    expected_total = EXPECTED_QUERIES_PER_GUIDELINE * len(lexicon)
    if len(records) != expected_total:
        violations.append(f"total: {len(records)} queries, expected {expected_total}")
    return DatasetReport(
        total=len(records),
        per_guideline=counts,
        unknown_keys=tuple(unknown),
        conformant=not violations,
        violations=tuple(violations),
    )


# --- annotations -----------------------------------------------------------

def _likert(obj: Mapping, key: str, line_number: int) -> int:
    value = obj.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 5:
        raise MalformedRecord(line_number, f"field {key!r} must be an integer in 1..5")
    return value


def _count(obj: Mapping, key: str, line_number: int) -> int | None:
    value = obj.get(key)
    if value is None:
        return None
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise MalformedRecord(line_number, f"field {key!r} must be a non-negative integer")
    return value


@dataclass(frozen=True)
class AnnotationRecord:
    """One annotator's judgment of one response (a query_id/group pair)."""

    query_id: str
    group: str
    accuracy: int
    relevance: int
    completeness: int
    clarity: int
    annotator_id: str
    tp: int | None = None
    fp: int | None = None
    fn: int | None = None
    timestamp: str = ""
    submission_token: str | None = None

    @property
    def response_ref(self) -> tuple[str, str]:
        return (self.query_id, self.group)

    def recall_value(self) -> float | None:
        if self.tp is None or self.fn is None or self.tp + self.fn == 0:
            return None
        return self.tp / (self.tp + self.fn)

    def precision_value(self) -> float | None:
        if self.tp is None or self.fp is None or self.tp + self.fp == 0:
            return None
        return self.tp / (self.tp + self.fp)

    def f1_value(self) -> float | None:
        p = self.precision_value()
        r = self.recall_value()
        if p is None or r is None or p + r == 0:
            return None
        return 2 * p * r / (p + r)

    @classmethod
    def from_obj(cls, obj: object, line_number: int = 0) -> "AnnotationRecord":
        if not isinstance(obj, dict):
            raise MalformedRecord(line_number, "record must be a JSON object")
        for key in ("query_id", "group", "annotator_id"):
            if not isinstance(obj.get(key), str) or not obj[key].strip():
                raise MalformedRecord(line_number, f"field {key!r} must be a nonempty string")
        token = obj.get("submission_token")
        if token is not None and not isinstance(token, str):
            raise MalformedRecord(line_number, "field 'submission_token' must be a string")
        timestamp = obj.get("timestamp", "")
        if not isinstance(timestamp, str):
            raise MalformedRecord(line_number, "field 'timestamp' must be a string")
        return cls(
            query_id=obj["query_id"],
            group=obj["group"],
            accuracy=_likert(obj, "accuracy", line_number),
            relevance=_likert(obj, "relevance", line_number),
            completeness=_likert(obj, "completeness", line_number),
            clarity=_likert(obj, "clarity", line_number),
            annotator_id=obj["annotator_id"],
            tp=_count(obj, "tp", line_number),
            fp=_count(obj, "fp", line_number),
            fn=_count(obj, "fn", line_number),
            timestamp=timestamp,
            submission_token=token,
        )

    def to_obj(self) -> dict:
        out: dict = {
            "query_id": self.query_id,
            "group": self.group,
            "accuracy": self.accuracy,
            "relevance": self.relevance,
            "completeness": self.completeness,
            "clarity": self.clarity,
            "annotator_id": self.annotator_id,
        }
        if self.tp is not None:
            out["tp"] = self.tp
        if self.fp is not None:
            out["fp"] = self.fp
        if self.fn is not None:
            out["fn"] = self.fn
        if self.timestamp:
            out["timestamp"] = self.timestamp
        if self.submission_token is not None:
            out["submission_token"] = self.submission_token
        return out


def load_annotations(path: Path | str) -> list[AnnotationRecord]:
    """Strict JSONL loader for annotation fixtures and exports."""
    return [AnnotationRecord.from_obj(obj, n) for n, obj in _read_jsonl(path, "annotations")]


# --- scalar metrics --------------------------------------------------------

def compute_recall(tp: int, fn: int) -> float:
    if tp < 0 or fn < 0:
        raise ValueError("counts must be non-negative")
    if tp + fn == 0:
        raise UndefinedMetric("recall is undefined when tp + fn == 0")
    return tp / (tp + fn)


def compute_precision(tp: int, fp: int) -> float:
    if tp < 0 or fp < 0:
        raise ValueError("counts must be non-negative")
    if tp + fp == 0:
        raise UndefinedMetric("precision is undefined when tp + fp == 0")
    return tp / (tp + fp)


def compute_f1(precision: float, recall: float) -> float:
    if not 0 <= precision <= 1 or not 0 <= recall <= 1:
        raise ValueError("precision and recall must be in [0, 1]")
    if precision + recall == 0:
        raise UndefinedMetric("f1 is undefined when precision + recall == 0")
    return 2 * precision * recall / (precision + recall)


# --- aggregation -----------------------------------------------------------

@dataclass(frozen=True)
class GroupAggregate:
    group: str
    n: int
    mean_accuracy: float
    mean_relevance: float
    mean_completeness: float
    mean_clarity: float
    mean_recall: float | None
    mean_precision: float | None
    mean_f1: float | None
    excluded: Mapping[str, int] = field(default_factory=dict)
    """Per ratio metric, how many records lacked the counts to compute it."""

    def likert_mean(self, metric: str) -> float:
        if metric not in LIKERT_METRICS:
            raise UndefinedMetric(f"{metric!r} is not a rubric dimension")
        return getattr(self, f"mean_{metric}")

    def to_obj(self) -> dict:
        return {
            "group": self.group,
            "n": self.n,
            "mean_accuracy": self.mean_accuracy,
            "mean_relevance": self.mean_relevance,
            "mean_completeness": self.mean_completeness,
            "mean_clarity": self.mean_clarity,
            "mean_recall": self.mean_recall,
            "mean_precision": self.mean_precision,
            "mean_f1": self.mean_f1,
            "excluded": dict(self.excluded),
        }


def aggregate_group(records: Sequence[AnnotationRecord], group: str) -> GroupAggregate:
    """Mean rubric scores and ratio metrics for one group's annotations.

    Ratio metrics average per-record values over the records where they are
    defined; records without usable counts are excluded and counted, never
    treated as zero.
    """
    if not records:
        raise EmptyGroup(f"group {group!r} has no annotations")
    mismatched = [r.group for r in records if r.group != group]
    if mismatched:
        raise ValueError(f"records for group {mismatched[0]!r} passed to aggregate of {group!r}")

    def ratio_mean(values: list[float | None]) -> tuple[float | None, int]:
        defined = [v for v in values if v is not None]
        if not defined:
            return None, len(values)
        return sum(defined) / len(defined), len(values) - len(defined)

    recall_mean, recall_excluded = ratio_mean([r.recall_value() for r in records])
    precision_mean, precision_excluded = ratio_mean([r.precision_value() for r in records])
    f1_mean, f1_excluded = ratio_mean([r.f1_value() for r in records])
    n = len(records)
    return GroupAggregate(
        group=group,
        n=n,
        mean_accuracy=sum(r.accuracy for r in records) / n,
        mean_relevance=sum(r.relevance for r in records) / n,
        mean_completeness=sum(r.completeness for r in records) / n,
        mean_clarity=sum(r.clarity for r in records) / n,
        mean_recall=recall_mean,
        mean_precision=precision_mean,
        mean_f1=f1_mean,
        excluded={
            "recall": recall_excluded,
            "precision": precision_excluded,
            "f1": f1_excluded,
        },
    )


# --- quiz ------------------------------------------------------------------

@dataclass(frozen=True)
class QuizItem:
    item_id: str
    stem: str
    choices: tuple[str, ...]
    correct: frozenset[int]

    def __post_init__(self):
        if len(self.choices) != 5:
            raise ValueError(f"quiz item {self.item_id!r} must have 5 choices")
        if not self.correct or any(not 0 <= c < 5 for c in self.correct):
            raise ValueError(f"quiz item {self.item_id!r} has an invalid correct set")


def load_quiz(path: Path | str) -> list[QuizItem]:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"quiz file not found: {path}")
    try:
        obj = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedRecord(0, f"invalid JSON ({exc.msg})") from exc
    if not isinstance(obj, dict) or not isinstance(obj.get("items"), list):
        raise MalformedRecord(0, "quiz must be an object with an 'items' list")
    items: list[QuizItem] = []
    seen: set[str] = set()
    for i, raw in enumerate(obj["items"], start=1):
        if not isinstance(raw, dict):
            raise MalformedRecord(i, "quiz item must be an object")
        try:
            item = QuizItem(
                item_id=str(raw["item_id"]),
                stem=str(raw["stem"]),
                choices=tuple(str(c) for c in raw["choices"]),
                correct=frozenset(int(c) for c in raw["correct"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(i, f"invalid quiz item: {exc}") from exc
        if item.item_id in seen:
            raise MalformedRecord(i, f"duplicate quiz item_id {item.item_id!r}")
        seen.add(item.item_id)
        items.append(item)
    return items


@dataclass(frozen=True)
class QuizResult:
    n_items: int
    n_correct: int
    accuracy: float
    per_item: Mapping[str, bool]

    def to_obj(self) -> dict:
        return {
            "n_items": self.n_items,
            "n_correct": self.n_correct,
            "accuracy": self.accuracy,
            "per_item": dict(self.per_item),
        }


def score_quiz(
    answers: Mapping[str, int] | Iterable[tuple[str, int]],
    items: Sequence[QuizItem],
) -> QuizResult:
    """Grade selected choices against the key.

    An item with several keyed choices is correct for any one of them.
    Unanswered items count as incorrect; answers to unknown items and
    repeated answers to one item are errors, not silently dropped.
    """
    pairs = list(answers.items()) if isinstance(answers, Mapping) else list(answers)
    by_id = {item.item_id: item for item in items}
    selected: dict[str, int] = {}
    for item_id, choice in pairs:
        if item_id not in by_id:
            raise UnknownItem(item_id)
        if item_id in selected:
            raise DuplicateAnswer(item_id)
        if not isinstance(choice, int) or isinstance(choice, bool) or not 0 <= choice < 5:
            raise ValueError(f"choice for {item_id!r} must be an integer in 0..4")
        selected[item_id] = choice
    per_item = {
        item.item_id: (item.item_id in selected and selected[item.item_id] in item.correct)
        for item in items
    }
    n_correct = sum(per_item.values())
    return QuizResult(
        n_items=len(items),
        n_correct=n_correct,
        accuracy=n_correct / len(items) if items else 0.0,
        per_item=per_item,
    )


# --- comparison report -----------------------------------------------------

@dataclass(frozen=True)
class WilcoxonSpec:
    group_a: str
    group_b: str
    metric: str
    alternative: str = ALTERNATIVE_GREATER


def _metric_value(record: AnnotationRecord, metric: str) -> float | None:
    if metric in LIKERT_METRICS:
        return float(getattr(record, metric))
    if metric == "recall":
        return record.recall_value()
    if metric == "precision":
        return record.precision_value()
    if metric == "f1":
        return record.f1_value()
    raise UndefinedMetric(f"unknown metric {metric!r}")


def paired_metric_values(
    annotations: Mapping[str, Sequence[AnnotationRecord]],
    group_a: str,
    group_b: str,
    metric: str,
) -> list[tuple[float, float]]:
    """Per-query (a, b) values for two groups, paired by query_id, id-sorted.

    Multiple annotators on one response average into a single value before
    pairing; queries missing a defined value on either side drop out.
    """

    def per_query(group: str) -> dict[str, float]:
        if group not in annotations:
            raise UnknownGroup(group)
        values: dict[str, list[float]] = {}
        for record in annotations[group]:
            v = _metric_value(record, metric)
            if v is not None:
                values.setdefault(record.query_id, []).append(v)
        return {qid: sum(vs) / len(vs) for qid, vs in values.items()}

    a_vals = per_query(group_a)
    b_vals = per_query(group_b)
    shared = sorted(set(a_vals) & set(b_vals))
    if not shared:
        raise EmptyGroup(f"groups {group_a!r} and {group_b!r} share no scored queries for {metric!r}")
    return [(a_vals[q], b_vals[q]) for q in shared]


@dataclass(frozen=True)
class ComparisonTest:
    spec: WilcoxonSpec
    result: WilcoxonResult
    alpha: float
    significant: bool

    def to_obj(self) -> dict:
        return {
            "group_a": self.spec.group_a,
            "group_b": self.spec.group_b,
            "metric": self.spec.metric,
            "alternative": self.spec.alternative,
            "alpha": self.alpha,
            "significant": self.significant,
            "result": self.result.to_obj(),
        }


@dataclass(frozen=True)
class ComparisonReport:
    aggregates: tuple[GroupAggregate, ...]
    tests: tuple[ComparisonTest, ...] = ()
    quiz: Mapping[str, QuizResult] = field(default_factory=dict)

    def to_obj(self) -> dict:
        return {
            "aggregates": [a.to_obj() for a in self.aggregates],
            "tests": [t.to_obj() for t in self.tests],
            "quiz": {group: r.to_obj() for group, r in self.quiz.items()},
        }

    def render_text(self) -> str:
        """Fixed-width text tables; '-' marks a metric with no defined values."""

        def fmt(value: float | None) -> str:
            return "-" if value is None else f"{value:.2f}"

        lines: list[str] = []
        header = (
            f"{'group':<14}{'n':>5}  {'accuracy':>8}  {'relevance':>9}  "
            f"{'completeness':>12}  {'clarity':>7}  {'recall':>6}  {'precision':>9}  {'f1':>6}"
        )
        lines.append(header)
        lines.append("-" * len(header))
        for agg in self.aggregates:
            lines.append(
                f"{agg.group:<14}{agg.n:>5}  {agg.mean_accuracy:>8.2f}  {agg.mean_relevance:>9.2f}  "
                f"{agg.mean_completeness:>12.2f}  {agg.mean_clarity:>7.2f}  {fmt(agg.mean_recall):>6}  "
                f"{fmt(agg.mean_precision):>9}  {fmt(agg.mean_f1):>6}"
            )
        if self.tests:
            lines.append("")
            lines.append("paired wilcoxon signed-rank tests")
            for test in self.tests:
                r = test.result
                lines.append(
                    f"  {test.spec.group_a} vs {test.spec.group_b}  metric={test.spec.metric}  "
                    f"alternative={test.spec.alternative}  W={r.w_statistic:g}  n={r.n_input}  "
                    f"n_eff={r.n_effective}  p={r.p_value:.6g}  method={r.method}  "
                    f"significant@{test.alpha:g}={'yes' if test.significant else 'no'}"
                )
        if self.quiz:
            lines.append("")
            lines.append("quiz accuracy")
            for group in sorted(self.quiz):
                r = self.quiz[group]
                lines.append(f"  {group}: {r.accuracy:.0%} ({r.n_correct}/{r.n_items})")
        return "\n".join(lines)


def build_comparison(
    groups: Sequence[str],
    annotations: Mapping[str, Sequence[AnnotationRecord]],
    tests: Sequence[WilcoxonSpec] = (),
    quiz: Mapping[str, QuizResult] | None = None,
    alpha: float = 0.05,
) -> ComparisonReport:
    if not groups:
        raise ValueError("need at least one group to compare")
    aggregates = []
    for group in groups:
        if group not in annotations:
            raise UnknownGroup(group)
        aggregates.append(aggregate_group(list(annotations[group]), group))
    ran_tests = []
    for spec in tests:
        pairs = paired_metric_values(annotations, spec.group_a, spec.group_b, spec.metric)
        result = wilcoxon_signed_rank(pairs, alternative=spec.alternative)
        ran_tests.append(
            ComparisonTest(
                spec=spec, result=result, alpha=alpha, significant=result.p_value < alpha
            )
        )
    return ComparisonReport(
        aggregates=tuple(aggregates),
        tests=tuple(ran_tests),
        quiz=dict(quiz) if quiz else {},
    )
