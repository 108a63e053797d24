"""Core domain types for test collections: topics, runs, qrels, crawl
manifests and judging pools.

All types are immutable after construction and validate their invariants
eagerly, so a successfully constructed object is always safe to share.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import ValidationError

GRADE_SCALE = (0, 1, 2)
UNJUDGEABLE = -1
VALID_GRADES = frozenset({-1, 0, 1, 2})


class Scale(str, enum.Enum):
    GRADED3 = "graded3"
    BINARY = "binary"


class Provenance(str, enum.Enum):
    """How a document entered a judging pool."""

    POOLED = "pooled"
    GOOGLE = "google"
    NOISE = "noise"
    BOTH = "both"  # pooled and google


@dataclass(frozen=True)
class Topic:
    """An information need: id, title (used verbatim as the query) and
    per-grade relevance descriptions. Noise topics carry no descriptions."""

    id: str
    title: str
    levels: tuple[tuple[int, str], ...] = ()
    is_noise: bool = False

    def __post_init__(self):
        if not self.id:
            raise ValidationError("topic id must be non-empty")
        levels = tuple(sorted(self.levels, key=lambda lv: -lv[0]))
        object.__setattr__(self, "levels", levels)
        if self.is_noise and levels:
            raise ValidationError(f"noise topic {self.id!r} must not declare relevance levels")
        grades = [g for g, _ in levels]
        if len(set(grades)) != len(grades):
            raise ValidationError(f"topic {self.id!r} declares duplicate relevance grades")
        for g in grades:
            if g not in GRADE_SCALE:
                raise ValidationError(
                    f"topic {self.id!r} declares grade {g}, outside the scale {GRADE_SCALE}"
                )

    @property
    def level_map(self) -> dict[int, str]:
        return dict(self.levels)


@dataclass(frozen=True)
class RunEntry:
    doc_id: str
    rank: int
    score: float


@dataclass(frozen=True)
class Run:
    """A system's ranked retrieval output, grouped per topic.

    Within a topic, ranks are contiguous 1..n in list order and scores are
    non-increasing; the list order is authoritative.
    """

    system_id: str
    entries: Mapping[str, tuple[RunEntry, ...]]

    def __post_init__(self):
        if not self.system_id:
            raise ValidationError("run system_id must be non-empty")
        for topic_id, items in self.entries.items():
            seen: set[str] = set()
            prev_score = math.inf
            for i, e in enumerate(items, start=1):
                if e.rank != i:
                    raise ValidationError(
                        f"run {self.system_id!r}, topic {topic_id!r}: ranks are not "
                        f"contiguous (expected {i}, found {e.rank})"
                    )
                if e.doc_id in seen:
                    raise ValidationError(
                        f"run {self.system_id!r}, topic {topic_id!r}: duplicate document "
                        f"{e.doc_id!r}"
                    )
                seen.add(e.doc_id)
                if not math.isfinite(e.score):
                    raise ValidationError(
                        f"run {self.system_id!r}, topic {topic_id!r}: non-finite score at "
                        f"rank {e.rank}"
                    )
                if e.score > prev_score:
                    raise ValidationError(
                        f"run {self.system_id!r}, topic {topic_id!r}: score increases at "
                        f"rank {e.rank}"
                    )
                prev_score = e.score

    def topics(self) -> list[str]:
        return sorted(self.entries)

    def ranking(self, topic_id: str) -> list[str]:
        """Document ids for a topic in rank order; empty if absent."""
        return [e.doc_id for e in self.entries.get(topic_id, ())]


@dataclass(frozen=True)
class Qrels:
    """Relevance judgments keyed by (topic, document)."""

    judgments: Mapping[tuple[str, str], int]
    scale: Scale = Scale.GRADED3

    def __post_init__(self):
        allowed = VALID_GRADES if self.scale is Scale.GRADED3 else frozenset({-1, 0, 1})
        for (topic_id, doc_id), grade in self.judgments.items():
            if grade not in allowed:
                raise ValidationError(
                    f"grade {grade} for ({topic_id!r}, {doc_id!r}) outside the "
                    f"{self.scale.value} scale"
                )

    def topics(self) -> list[str]:
        return sorted({t for t, _ in self.judgments})

    def grade(self, topic_id: str, doc_id: str) -> int | None:
        return self.judgments.get((topic_id, doc_id))

    def judged_docs(self, topic_id: str) -> set[str]:
        return {d for t, d in self.judgments if t == topic_id}

    def relevant_docs(self, topic_id: str) -> set[str]:
        """Documents judged relevant (grade > 0) for a topic."""
        return {d for (t, d), g in self.judgments.items() if t == topic_id and g > 0}

    def relevant_count(self, topic_id: str) -> int:
        return len(self.relevant_docs(topic_id))

    def restricted_to(self, members: Mapping[str, Iterable[str]]) -> "Qrels":
        """Keep only judgments whose topic appears in `members` and whose
        document is listed for that topic. Documents outside become
        unjudged (hence nonrelevant to every measure)."""
        sets = {t: set(docs) for t, docs in members.items()}
        kept = {
            (t, d): g
            for (t, d), g in self.judgments.items()
            if t in sets and d in sets[t]
        }
        return Qrels(judgments=kept, scale=self.scale)


def conflate(qrels: Qrels) -> Qrels:
    """Collapse the 3-point scale to binary: somewhat and highly relevant
    both become relevant; unjudgeable (-1) becomes nonrelevant.

    The judged (topic, document) key set is preserved.
    """
    if qrels.scale is not Scale.GRADED3:
        raise ValidationError("conflate expects graded3 qrels")
    mapped = {key: (1 if g > 0 else 0) for key, g in qrels.judgments.items()}
    return Qrels(judgments=mapped, scale=Scale.BINARY)


@dataclass(frozen=True)
class CrawlManifest:
    """Which topics each document was crawled for, plus the noise-topic ids."""

    crawled_for: Mapping[str, frozenset[str]]
    noise_topics: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(
            self,
            "crawled_for",
            {d: frozenset(ts) for d, ts in self.crawled_for.items()},
        )
        object.__setattr__(self, "noise_topics", frozenset(self.noise_topics))
        universe: set[str] = set()
        for doc_id, topics in self.crawled_for.items():
            if not topics:
                raise ValidationError(f"document {doc_id!r} maps to no topic")
            universe |= topics
        missing = self.noise_topics - universe
        if missing:
            raise ValidationError(
                "noise topics absent from the manifest's topic universe: "
                + ", ".join(sorted(missing))
            )

    def topic_universe(self) -> set[str]:
        out: set[str] = set()
        for topics in self.crawled_for.values():
            out |= topics
        return out

    def crawled_for_topic(self, doc_id: str, topic_id: str) -> bool:
        return topic_id in self.crawled_for.get(doc_id, frozenset())

    def noise_doc_ids(self) -> set[str]:
        """Documents crawled for at least one noise topic."""
        return {
            d for d, topics in self.crawled_for.items() if topics & self.noise_topics
        }


@dataclass(frozen=True)
class Pool:
    """Per-topic judging set with per-document provenance.

    `depth` is the per-system cutoff actually used to assemble the pool and
    `target_size` the minimum size requested; `underfull` marks pools whose
    source runs were exhausted before the target was met.
    """

    topic_id: str
    members: Mapping[str, Provenance]
    depth: int
    target_size: int
    underfull: bool = False

    def __post_init__(self):
        if self.depth < 0:
            raise ValidationError(f"pool {self.topic_id!r}: negative depth")
        if self.target_size < 0:
            raise ValidationError(f"pool {self.topic_id!r}: negative target size")

    @property
    def size(self) -> int:
        return len(self.members)

    def doc_ids(self) -> set[str]:
        return set(self.members)

    def by_provenance(self, *kinds: Provenance) -> set[str]:
        wanted = set(kinds)
        return {d for d, p in self.members.items() if p in wanted}


def validate_pool_noise(pool: Pool, manifest: CrawlManifest) -> None:
    """Check that every noise member belongs to a noise topic of the manifest."""
    noise_docs = manifest.noise_doc_ids()
    bad = sorted(pool.by_provenance(Provenance.NOISE) - noise_docs)
    if bad:
        raise ValidationError(
            f"pool {pool.topic_id!r}: noise members not crawled for any noise topic: "
            + ", ".join(bad)
        )
