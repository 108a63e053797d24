"""Pool construction: depth-k, size-k, and biased pools with forced
search-engine and noise documents, plus two-stage re-pooling and pool
statistics.

A *depth-k* pool is the union of the top k documents of every run. A
*size-k* pool scans depths d = 1, 2, ... and keeps the first depth whose
union reaches at least k documents. A *biased* pool seeds the member set
with k_N randomly sampled noise documents and the top k_G documents of a
designated reference engine run, then completes it size-k style over all
runs (the reference engine participating as an ordinary system).

All pooling is deterministic: noise documents are sampled per topic with a
seed derived from ``(noise_seed, topic_id)``, so adding or removing topics
never changes another topic's draw.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import ValidationError
from .model import Pool, Provenance, Run, Topic


class Strategy(str, Enum):
    DEPTH_K = "depth_k"
    SIZE_K = "size_k"
    BIASED = "biased"


@dataclass(frozen=True)
class PoolSpec:
    """Parameters of a pooling strategy.

    ``k`` is the per-system depth for :data:`Strategy.DEPTH_K` and the
    minimum total pool size otherwise. ``k_g``/``k_n`` and the remaining
    fields only apply to biased pools.
    """

    strategy: Strategy
    k: int
    k_g: int = 0
    k_n: int = 0
    google_system_id: str = ""
    noise_seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValidationError(f"k must be positive, got {self.k}")
        if self.k_g < 0 or self.k_n < 0:
            raise ValidationError("k_g and k_n must be non-negative")
        if self.strategy is Strategy.BIASED:
            if self.k < self.k_g + self.k_n:
                raise ValidationError(
                    f"biased pool needs k >= k_g + k_n ({self.k} < {self.k_g + self.k_n})"
                )
            if not self.google_system_id:
                raise ValidationError("biased pool needs a google_system_id")


def _rankings(runs: Sequence[Run], topic_id: str) -> list[list[str]]:
    return [run.ranking(topic_id) for run in runs]


def pool_depth_k(runs: Sequence[Run], topic: Topic, k: int) -> Pool:
    """Union of every run's top ``k`` documents for the topic."""
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")
    if not runs:
        raise ValidationError("no runs provided")
    members: dict[str, Provenance] = {}
    for ranking in _rankings(runs, topic.id):
        for doc_id in ranking[:k]:
            members[doc_id] = Provenance.POOLED
    if not members:
        raise ValidationError(f"topic {topic.id!r} absent from every run")
    return Pool(
        topic_id=topic.id,
        members=members,
        depth=k,
        target_size=len(members),
    )


def _size_completion(
    rankings: list[list[str]], members: set[str], k: int
) -> tuple[set[str], int, bool]:
    """Grow ``members`` with ranking prefixes at increasing depth until it
    holds at least ``k`` docs. Returns (pooled docs added or re-seen, depth
    used, underfull flag)."""
    pooled: set[str] = set()
    if len(members) >= k:
        return pooled, 0, False
    max_depth = max((len(r) for r in rankings), default=0)
    depth = 0
    while depth < max_depth:
        depth += 1
        for ranking in rankings:
            if depth <= len(ranking):
                doc_id = ranking[depth - 1]
                pooled.add(doc_id)
                members.add(doc_id)
        if len(members) >= k:
            return pooled, depth, False
    return pooled, depth, True


def pool_size_k(runs: Sequence[Run], topic: Topic, k: int) -> Pool:
    """Minimum-depth pool whose union holds at least ``k`` documents.

    If every run is exhausted first, the full union is returned flagged
    underfull rather than raising, so small fixtures still pool.
    """
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")
    if not runs:
        raise ValidationError("no runs provided")
    members: set[str] = set()
    _, depth, underfull = _size_completion(_rankings(runs, topic.id), members, k)
    return Pool(
        topic_id=topic.id,
        members={doc_id: Provenance.POOLED for doc_id in members},
        depth=depth,
        target_size=k,
        underfull=underfull,
    )


def sample_noise_docs(
    noise_docs: Iterable[str], topic_id: str, k_n: int, noise_seed: int
) -> list[str]:
    """Seeded uniform sample of ``k_n`` noise documents for one topic.

    The candidate set is deduplicated and sorted before sampling, so the
    draw depends only on its contents, the topic, and the seed.
    """
    candidates = sorted(set(noise_docs))
    if len(candidates) < k_n:
        raise ValidationError(
            f"topic {topic_id!r}: need {k_n} noise docs, only {len(candidates)} available"
        )
    rng = random.Random(f"{noise_seed}:noise:{topic_id}")
    return rng.sample(candidates, k_n)


def pool_biased(
    runs: Sequence[Run],
    google_run: Run,
    noise_docs: Iterable[str],
    topic: Topic,
    spec: PoolSpec,
) -> Pool:
    """Biased pool: forced noise + forced engine-top docs, completed
    size-k style over all runs (the engine run included)."""
    if spec.strategy is not Strategy.BIASED:
        raise ValidationError(f"pool_biased needs a biased spec, got {spec.strategy.value}")
    if google_run.system_id != spec.google_system_id:
        raise ValidationError(
            f"google run is {google_run.system_id!r}, spec names {spec.google_system_id!r}"
        )
    noise_sel = set(sample_noise_docs(noise_docs, topic.id, spec.k_n, spec.noise_seed))
    google_top = google_run.ranking(topic.id)[: spec.k_g]
    if len(google_top) < spec.k_g:
        raise ValidationError(
            f"topic {topic.id!r}: google run has only {len(google_top)} docs, need {spec.k_g}"
        )

    members = noise_sel | set(google_top)
    rankings = _rankings([*runs, google_run], topic.id)
    pooled, depth, underfull = _size_completion(rankings, members, spec.k)

    provenance: dict[str, Provenance] = {}
    for doc_id in members:
        if doc_id in noise_sel:
            provenance[doc_id] = Provenance.NOISE
        elif doc_id in google_top:
            provenance[doc_id] = Provenance.BOTH if doc_id in pooled else Provenance.GOOGLE
        else:
            provenance[doc_id] = Provenance.POOLED
    return Pool(
        topic_id=topic.id,
        members=provenance,
        depth=depth,
        target_size=spec.k,
        underfull=underfull,
    )


def two_stage_pools(
    complete_runs: Sequence[Run],
    pooled_runs: Sequence[Run],
    noise_docs: Iterable[str],
    topics: Sequence[Topic],
    spec_stage1: PoolSpec,
    spec_stage2: PoolSpec,
) -> dict[str, Pool]:
    """Stage 1: size-k pools over the complete-collection runs. Stage 2:
    biased pools over runs produced against the stage-1 union collection.

    Every document a non-engine stage-2 run cites must lie inside the
    stage-1 union for its topic; likewise every stage-2 member whose
    provenance is plain pooled. Forced noise and engine-top documents are
    exempt (they come from outside the re-indexed collection).
    """
    if spec_stage1.strategy is not Strategy.SIZE_K:
        raise ValidationError("stage 1 must use the size_k strategy")
    if spec_stage2.strategy is not Strategy.BIASED:
        raise ValidationError("stage 2 must use the biased strategy")
    google_runs = [r for r in pooled_runs if r.system_id == spec_stage2.google_system_id]
    if not google_runs:
        raise ValidationError(
            f"no stage-2 run named {spec_stage2.google_system_id!r}"
        )
    google_run = google_runs[0]
    others = [r for r in pooled_runs if r.system_id != spec_stage2.google_system_id]

    judged_topics = [t for t in topics if not t.is_noise]
    noise_list = list(noise_docs)
    result: dict[str, Pool] = {}
    for topic in judged_topics:
        stage1 = pool_size_k(complete_runs, topic, spec_stage1.k)
        union1 = stage1.doc_ids()
        for run in others:
            for doc_id in run.ranking(topic.id):
                if doc_id not in union1:
                    raise ValidationError(
                        f"stage-2 run {run.system_id!r} cites {doc_id!r} outside the "
                        f"stage-1 pool for topic {topic.id!r}"
                    )
        pool = pool_biased(others, google_run, noise_list, topic, spec_stage2)
        for doc_id, prov in pool.members.items():
            if prov is Provenance.POOLED and doc_id not in union1:
                raise ValidationError(
                    f"stage-2 pool member {doc_id!r} outside the stage-1 pool "
                    f"for topic {topic.id!r}"
                )
        result[topic.id] = pool
    return result


def overlap_histogram(pools: dict[str, Pool]) -> dict[int, int]:
    """How many distinct documents appear in exactly n topic pools."""
    if not pools:
        raise ValidationError("no pools provided")
    counts: dict[str, int] = {}
    for pool in pools.values():
        for doc_id in pool.members:
            counts[doc_id] = counts.get(doc_id, 0) + 1
    histogram: dict[int, int] = {}
    for n in counts.values():
        histogram[n] = histogram.get(n, 0) + 1
    return dict(sorted(histogram.items()))


@dataclass(frozen=True)
class PoolStatsRow:
    topic_id: str
    size: int
    depth: int


@dataclass(frozen=True)
class PoolStats:
    rows: tuple[PoolStatsRow, ...]
    mean_size: float
    mean_depth: float
    union_size: int
    total_size: int


def pool_stats(pools: dict[str, Pool]) -> PoolStats:
    """Per-topic (size, depth) rows plus averages, the distinct-document
    union size, and the summed size."""
    rows = tuple(
        PoolStatsRow(topic_id=t, size=pools[t].size, depth=pools[t].depth)
        for t in sorted(pools)
    )
    union: set[str] = set()
    for pool in pools.values():
        union.update(pool.members)
    n = len(rows)
    return PoolStats(
        rows=rows,
        mean_size=(sum(r.size for r in rows) / n) if n else 0.0,
        mean_depth=(sum(r.depth for r in rows) / n) if n else 0.0,
        union_size=len(union),
        total_size=sum(r.size for r in rows),
    )
