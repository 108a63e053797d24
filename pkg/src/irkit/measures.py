"""Effectiveness measures: P@k, R@k, AP@k, nDCG@k, RR, and the
crawled-for ratio C@k, plus the (system x topic x measure) evaluation
matrix with mean/sd summaries.

Conventions shared by every measure:

* the ranked list comes from one run and one topic (``Run.ranking``);
* judgments are looked up in a Qrels (normally binary, post-conflation) —
  any grade > 0 counts as relevant, and unjudged documents count as
  nonrelevant;
* @k measures divide by k even when fewer than k documents were retrieved;
* topics with no relevant documents score 0 on the R-normalized measures
  and are flagged rather than dropped.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import ValidationError
from .model import CrawlManifest, Qrels, Run

MEASURE_NAMES = ("ndcg", "ap", "p", "r", "rr", "c")

ZERO_RELEVANT = "zero-relevant"
MISSING_TOPIC = "missing-topic"


@dataclass(frozen=True)
class MeasureSpec:
    """A measure name plus its cutoff; ``k`` is None only for rr."""

    name: str
    k: int | None = None

    def __post_init__(self) -> None:
        if self.name not in MEASURE_NAMES:
            raise ValidationError(
                f"unknown measure {self.name!r} (expected one of {', '.join(MEASURE_NAMES)})"
            )
        if self.name == "rr":
            if self.k is not None:
                raise ValidationError("rr takes no cutoff")
        else:
            if self.k is None or self.k < 1:
                raise ValidationError(f"measure {self.name!r} needs a positive cutoff")

    @property
    def label(self) -> str:
        return self.name if self.k is None else f"{self.name}@{self.k}"


@dataclass(frozen=True)
class EvalResult:
    system_id: str
    topic_id: str
    measure: str
    k: int | None
    value: float
    flag: str = ""


@dataclass(frozen=True)
class SystemSummary:
    system_id: str
    means: Mapping[str, float]
    sds: Mapping[str, float]


def _is_relevant(qrels: Qrels, topic_id: str, doc_id: str) -> bool:
    grade = qrels.grade(topic_id, doc_id)
    return grade is not None and grade > 0


def precision_at(ranking: Sequence[str], qrels: Qrels, topic_id: str, k: int) -> float:
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")
    hits = sum(1 for d in ranking[:k] if _is_relevant(qrels, topic_id, d))
    return hits / k


def recall_at(ranking: Sequence[str], qrels: Qrels, topic_id: str, k: int) -> float:
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")
    total = qrels.relevant_count(topic_id)
    if total == 0:
        return 0.0
    hits = sum(1 for d in ranking[:k] if _is_relevant(qrels, topic_id, d))
    return hits / total


def average_precision_at(
    ranking: Sequence[str], qrels: Qrels, topic_id: str, k: int
) -> float:
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")
    total = qrels.relevant_count(topic_id)
    if total == 0:
        return 0.0
    hits = 0
    acc = 0.0
    for i, doc_id in enumerate(ranking[:k], start=1):
        if _is_relevant(qrels, topic_id, doc_id):
            hits += 1
            acc += hits / i
    return acc / total


def ndcg_at(
    ranking: Sequence[str], qrels: Qrels, topic_id: str, k: int, *, graded: bool = False
) -> float:
    """DCG@k / IDCG@k with the 1/log2(i+1) discount from rank 1.

    Gains are binary (relevant = 1) by default; with ``graded=True`` the
    gain is the grade itself (negative grades gain 0).
    """
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")

    def gain(doc_id: str) -> float:
        grade = qrels.grade(topic_id, doc_id)
        if grade is None or grade <= 0:
            return 0.0
        return float(grade) if graded else 1.0

    ideal = sorted(
        (
            float(g) if graded else 1.0
            for d in qrels.judged_docs(topic_id)
            if (g := qrels.grade(topic_id, d)) is not None and g > 0
        ),
        reverse=True,
    )
    if not ideal:
        return 0.0
    dcg = sum(gain(d) / math.log2(i + 1) for i, d in enumerate(ranking[:k], start=1))
    idcg = sum(g / math.log2(i + 1) for i, g in enumerate(ideal[:k], start=1))
    return dcg / idcg


def reciprocal_rank(ranking: Sequence[str], qrels: Qrels, topic_id: str) -> float:
    for i, doc_id in enumerate(ranking, start=1):
        if _is_relevant(qrels, topic_id, doc_id):
            return 1.0 / i
    return 0.0


def crawl_ratio_at(
    ranking: Sequence[str], manifest: CrawlManifest, topic_id: str, k: int
) -> float:
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")
    hits = sum(1 for d in ranking[:k] if manifest.crawled_for_topic(d, topic_id))
    return hits / k


def _evaluate_one(
    ranking: Sequence[str],
    qrels: Qrels,
    manifest: CrawlManifest | None,
    topic_id: str,
    spec: MeasureSpec,
) -> tuple[float, str]:
    zero_relevant = qrels.relevant_count(topic_id) == 0
    if spec.name == "p":
        return precision_at(ranking, qrels, topic_id, spec.k), ""
    if spec.name == "r":
        return recall_at(ranking, qrels, topic_id, spec.k), ZERO_RELEVANT if zero_relevant else ""
    if spec.name == "ap":
        value = average_precision_at(ranking, qrels, topic_id, spec.k)
        return value, ZERO_RELEVANT if zero_relevant else ""
    if spec.name == "ndcg":
        value = ndcg_at(ranking, qrels, topic_id, spec.k)
        return value, ZERO_RELEVANT if zero_relevant else ""
    if spec.name == "rr":
        return reciprocal_rank(ranking, qrels, topic_id), ""
    if spec.name == "c":
        assert manifest is not None
        return crawl_ratio_at(ranking, manifest, topic_id, spec.k), ""
    raise AssertionError(spec.name)


def evaluate_matrix(
    runs: Sequence[Run],
    qrels: Qrels,
    manifest: CrawlManifest | None,
    specs: Sequence[MeasureSpec],
) -> tuple[list[EvalResult], list[SystemSummary]]:
    """Evaluate every run on every qrels topic under every measure spec.

    A system missing a topic scores 0 on all measures there, flagged.
    Summaries hold per-measure mean and sample standard deviation over the
    topic set and are ordered by mean of the first ndcg spec (first spec if
    no ndcg was requested), descending, ties broken by system_id.
    """
    if not runs:
        raise ValidationError("no runs provided")
    if not specs:
        raise ValidationError("no measures requested")
    labels = [s.label for s in specs]
    if len(set(labels)) != len(labels):
        raise ValidationError("duplicate measure specs")
    if any(s.name == "c" for s in specs) and manifest is None:
        raise ValidationError("the c measure needs a crawl manifest")
    system_ids = [r.system_id for r in runs]
    if len(set(system_ids)) != len(system_ids):
        raise ValidationError("duplicate system ids in the run set")

    topic_ids = qrels.topics()
    if not topic_ids:
        raise ValidationError("qrels are empty")
    if all(not set(r.topics()) & set(topic_ids) for r in runs):
        raise ValidationError("qrels topics are disjoint from every run's topics")

    results: list[EvalResult] = []
    scores: dict[str, dict[str, list[float]]] = {
        r.system_id: {label: [] for label in labels} for r in runs
    }
    for run in sorted(runs, key=lambda r: r.system_id):
        for topic_id in topic_ids:
            missing = topic_id not in run.entries
            ranking = [] if missing else run.ranking(topic_id)
            for spec in specs:
                if missing:
                    value, flag = 0.0, MISSING_TOPIC
                else:
                    value, flag = _evaluate_one(ranking, qrels, manifest, topic_id, spec)
                results.append(
                    EvalResult(run.system_id, topic_id, spec.label, spec.k, value, flag)
                )
                scores[run.system_id][spec.label].append(value)

    summaries = [
        SystemSummary(
            system_id=sys_id,
            means={label: statistics.fmean(vals) for label, vals in per.items()},
            sds={
                label: (statistics.stdev(vals) if len(vals) > 1 else 0.0)
                for label, vals in per.items()
            },
        )
        for sys_id, per in scores.items()
    ]
    order_label = next((s.label for s in specs if s.name == "ndcg"), specs[0].label)
    summaries.sort(key=lambda s: (-s.means[order_label], s.system_id))
    return results, summaries
