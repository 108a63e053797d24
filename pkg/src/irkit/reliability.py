"""Judging-reliability machinery: assessor assignment, judgment merging,
Cohen's kappa, noise-document quality checks, Kendall tau, and the
pool-size incompleteness sweep.

Everything here is deterministic under a seed. Randomness is always drawn
from ``random.Random(f"{seed}:{context}:{...}")`` so each topic (or
document) has an isolated stream: adding a topic never perturbs the draws
of another.
"""

from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass
from itertools import pairwise
from typing import Iterable, Mapping, Sequence

from .errors import ValidationError
from .measures import MeasureSpec, evaluate_matrix
from .model import (
    VALID_GRADES,
    CrawlManifest,
    Pool,
    Provenance,
    Qrels,
    Run,
    Scale,
    Topic,
    conflate,
    validate_pool_noise,
)
from .pooling import PoolSpec, Strategy, pool_biased

EXCLUSIVE = "exclusive"
SHARED = "shared"


@dataclass(frozen=True)
class Assignment:
    """One assessor's share of a topic pool.

    ``docs`` maps doc_id to a tag: exclusive docs belong to this assessor
    alone; shared docs (engine-top and noise members) go to every assessor.
    """

    topic_id: str
    assessor_id: str
    docs: Mapping[str, str]
    seed: int

    def __post_init__(self) -> None:
        bad = {t for t in self.docs.values() if t not in (EXCLUSIVE, SHARED)}
        if bad:
            raise ValidationError(f"unknown assignment tags: {sorted(bad)}")

    def exclusive_docs(self) -> set[str]:
        return {d for d, tag in self.docs.items() if tag == EXCLUSIVE}

    def shared_docs(self) -> set[str]:
        return {d for d, tag in self.docs.items() if tag == SHARED}


@dataclass(frozen=True)
class Judgment:
    """A single graded judgment as recorded by the judging backend."""

    assessor_id: str
    topic_id: str
    doc_id: str
    grade: int
    timestamp: float = 0.0
    revision: int = 1

    def __post_init__(self) -> None:
        if self.grade not in VALID_GRADES:
            raise ValidationError(
                f"grade {self.grade} out of range {sorted(VALID_GRADES)}"
            )
        if self.revision < 1:
            raise ValidationError("revision counters start at 1")


def latest_judgments(
    judgments: Iterable[Judgment],
) -> dict[tuple[str, str, str], Judgment]:
    """Collapse a judgment stream to the latest revision per
    (assessor, topic, doc); later entries win revision ties."""
    out: dict[tuple[str, str, str], Judgment] = {}
    for j in judgments:
        key = (j.assessor_id, j.topic_id, j.doc_id)
        prev = out.get(key)
        if prev is None or j.revision >= prev.revision:
            out[key] = j
    return out


def assign_judging(
    pool: Pool,
    manifest: CrawlManifest | None,
    n_assessors: int = 2,
    seed: int = 0,
    assessor_ids: Sequence[str] | None = None,
) -> list[Assignment]:
    """Split a pool between two assessors: a seeded random half of the
    plain pooled docs each, plus all engine-top and noise docs for both."""
    if n_assessors != 2:
        raise ValidationError(f"only 2 assessors are supported, got {n_assessors}")
    if assessor_ids is None:
        assessor_ids = ("assessor-1", "assessor-2")
    if len(assessor_ids) != n_assessors:
        raise ValidationError(
            f"{n_assessors} assessors but {len(assessor_ids)} assessor ids"
        )
    if len(set(assessor_ids)) != len(assessor_ids):
        raise ValidationError("assessor ids must be distinct")
    if manifest is not None:
        validate_pool_noise(pool, manifest)

    regular = sorted(pool.by_provenance(Provenance.POOLED))
    shared = sorted(
        pool.by_provenance(Provenance.GOOGLE, Provenance.NOISE, Provenance.BOTH)
    )
    rng = random.Random(f"{seed}:assign:{pool.topic_id}")
    shuffled = regular[:]
    rng.shuffle(shuffled)
    half = (len(shuffled) + 1) // 2
    splits = (shuffled[:half], shuffled[half:])

    assignments = []
    for assessor_id, exclusive in zip(assessor_ids, splits):
        docs = {d: EXCLUSIVE for d in exclusive}
        docs.update({d: SHARED for d in shared})
        assignments.append(
            Assignment(
                topic_id=pool.topic_id,
                assessor_id=assessor_id,
                docs=docs,
                seed=seed,
            )
        )
    return assignments


def _check_topic_assignments(topic_id: str, group: list[Assignment]) -> None:
    seen_assessors = [a.assessor_id for a in group]
    if len(set(seen_assessors)) != len(seen_assessors):
        raise ValidationError(
            f"topic {topic_id!r}: duplicate assessor in assignments"
        )
    shared_sets = [a.shared_docs() for a in group]
    if any(s != shared_sets[0] for s in shared_sets[1:]):
        raise ValidationError(f"topic {topic_id!r}: shared doc sets differ")
    exclusives = [a.exclusive_docs() for a in group]
    for i in range(len(exclusives)):
        for j in range(i + 1, len(exclusives)):
            overlap = exclusives[i] & exclusives[j]
            if overlap:
                raise ValidationError(
                    f"topic {topic_id!r}: exclusive docs overlap: {sorted(overlap)}"
                )


def merge_judgments(
    assignments: Sequence[Assignment],
    judgments: Sequence[Judgment],
    seed: int = 0,
    *,
    allow_incomplete: bool = False,
) -> Qrels:
    """Merge per-assessor judgments into one graded qrels.

    Exclusive docs take their sole judgment. Shared docs take one of the
    assessors' judgments, picked by a per-document seeded coin flip (so
    agreement is preserved and disagreement resolves reproducibly). With
    ``allow_incomplete`` unjudged docs are dropped and half-judged shared
    docs take the judgment that exists; otherwise they are an error.
    """
    latest = latest_judgments(judgments)
    assigned_keys = {
        (a.assessor_id, a.topic_id, d) for a in assignments for d in a.docs
    }
    unassigned = sorted(set(latest) - assigned_keys)
    if unassigned:
        a, t, d = unassigned[0]
        raise ValidationError(
            f"judgment for unassigned doc: assessor {a!r}, topic {t!r}, doc {d!r}"
            + (f" (and {len(unassigned) - 1} more)" if len(unassigned) > 1 else "")
        )
    missing = sorted(assigned_keys - set(latest))
    if missing and not allow_incomplete:
        shown = ", ".join(f"({a!r}, {t!r}, {d!r})" for a, t, d in missing[:10])
        more = f" (and {len(missing) - 10} more)" if len(missing) > 10 else ""
        raise ValidationError(f"unjudged assigned docs: {shown}{more}")

    by_topic: dict[str, list[Assignment]] = {}
    for a in assignments:
        by_topic.setdefault(a.topic_id, []).append(a)

    merged: dict[tuple[str, str], int] = {}
    for topic_id, group in sorted(by_topic.items()):
        _check_topic_assignments(topic_id, group)
        for a in group:
            for doc_id in a.exclusive_docs():
                j = latest.get((a.assessor_id, topic_id, doc_id))
                if j is not None:
                    merged[(topic_id, doc_id)] = j.grade
        shared = group[0].shared_docs() if group else set()
        assessor_order = sorted(a.assessor_id for a in group)
        for doc_id in sorted(shared):
            judged_by = [
                aid
                for aid in assessor_order
                if (aid, topic_id, doc_id) in latest
            ]
            if not judged_by:
                continue
            rng = random.Random(f"{seed}:merge:{topic_id}:{doc_id}")
            pick = rng.choice(judged_by)
            merged[(topic_id, doc_id)] = latest[(pick, topic_id, doc_id)].grade
    return Qrels(judgments=merged, scale=Scale.GRADED3)


# ---------------------------------------------------------------------------
# agreement


def cohen_kappa(
    j1: Mapping[str, int], j2: Mapping[str, int], *, weighted: bool = False
) -> float:
    """Chance-corrected agreement between two assessors over the same docs.

    Grades are nominal categories by default (every disagreement counts the
    same). ``weighted=True`` switches to linear weighting over the sorted
    category list, where near-miss disagreements cost less.
    """
    if not j1:
        raise ValidationError("empty judgment maps")
    if set(j1) != set(j2):
        raise ValidationError("judgment maps cover different docs")
    n = len(j1)
    categories = sorted(set(j1.values()) | set(j2.values()))
    freq1 = {c: 0 for c in categories}
    freq2 = {c: 0 for c in categories}
    for d in j1:
        freq1[j1[d]] += 1
        freq2[j2[d]] += 1

    if weighted:
        pos = {c: i for i, c in enumerate(categories)}
        span = max(len(categories) - 1, 1)

        def weight(a: int, b: int) -> float:
            return abs(pos[a] - pos[b]) / span

        observed = sum(weight(j1[d], j2[d]) for d in j1) / n
        expected = sum(
            weight(a, b) * freq1[a] * freq2[b]
            for a in categories
            for b in categories
        ) / (n * n)
        if expected == 0.0:
            if observed == 0.0:
                return 1.0
            raise ValidationError("kappa undefined: no expected disagreement")
        return 1.0 - observed / expected

    p_o = sum(1 for d in j1 if j1[d] == j2[d]) / n
    p_e = sum(freq1[c] * freq2[c] for c in categories) / (n * n)
    if p_e == 1.0:
        if p_o == 1.0:
            return 1.0
        raise ValidationError("kappa undefined: degenerate single-category marginals")
    return (p_o - p_e) / (1.0 - p_e)


# ---------------------------------------------------------------------------
# noise quality check


@dataclass(frozen=True)
class AssessorNoiseStats:
    assessor_id: str
    judged: int
    relevant: int
    fraction: float
    flagged: bool


@dataclass(frozen=True)
class NoiseReport:
    total_judged: int
    total_relevant: int
    fraction: float
    by_grade: Mapping[int, int]
    assessors: tuple[AssessorNoiseStats, ...]
    threshold: float


def noise_quality_check(
    judgments: Sequence[Judgment],
    noise_docs: Iterable[str],
    *,
    threshold: float = 0.05,
) -> NoiseReport:
    """How often noise documents were (wrongly) graded relevant.

    Counts the latest-revision judgments that landed on noise documents,
    overall and per assessor; an assessor whose relevant fraction exceeds
    the threshold is flagged.
    """
    noise = set(noise_docs)
    latest = latest_judgments(judgments)
    on_noise = [j for j in latest.values() if j.doc_id in noise]

    by_grade: dict[int, int] = {}
    per_assessor: dict[str, list[Judgment]] = {}
    for j in on_noise:
        by_grade[j.grade] = by_grade.get(j.grade, 0) + 1
        per_assessor.setdefault(j.assessor_id, []).append(j)

    total = len(on_noise)
    relevant = sum(1 for j in on_noise if j.grade >= 1)
    stats = []
    for assessor_id in sorted(per_assessor):
        js = per_assessor[assessor_id]
        rel = sum(1 for j in js if j.grade >= 1)
        frac = rel / len(js)
        stats.append(
            AssessorNoiseStats(
                assessor_id=assessor_id,
                judged=len(js),
                relevant=rel,
                fraction=frac,
                flagged=frac > threshold,
            )
        )
    return NoiseReport(
        total_judged=total,
        total_relevant=relevant,
        fraction=(relevant / total) if total else 0.0,
        by_grade=dict(sorted(by_grade.items())),
        assessors=tuple(stats),
        threshold=threshold,
    )


# ---------------------------------------------------------------------------
# rank correlation


def _sort_counting_inversions(seq: list[int]) -> tuple[list[int], int]:
    if len(seq) <= 1:
        return seq, 0
    mid = len(seq) // 2
    left, a = _sort_counting_inversions(seq[:mid])
    right, b = _sort_counting_inversions(seq[mid:])
    merged: list[int] = []
    inv = 0
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            inv += len(left) - i
            merged.append(right[j])
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, a + b + inv


def kendall_tau(ranking1: Sequence[str], ranking2: Sequence[str]) -> float:
    """tau = (concordant - discordant) / (n(n-1)/2) between two
    permutations of the same item set."""
    if len(set(ranking1)) != len(ranking1) or len(set(ranking2)) != len(ranking2):
        raise ValidationError("rankings must not repeat items")
    if set(ranking1) != set(ranking2):
        raise ValidationError("rankings cover different item sets")
    n = len(ranking1)
    if n < 2:
        raise ValidationError("need at least 2 items to correlate")
    position = {item: i for i, item in enumerate(ranking2)}
    _, discordant = _sort_counting_inversions([position[item] for item in ranking1])
    total = n * (n - 1) // 2
    return (total - 2 * discordant) / total


def ranking_from_means(means: Mapping[str, float]) -> tuple[list[str], int]:
    """Order systems by mean descending, ties broken by system id.

    Also returns the number of tied pairs (pairs of systems with exactly
    equal means), so reports can surface how much of the ranking was
    decided by the tiebreak.
    """
    ordered = sorted(means, key=lambda s: (-means[s], s))
    groups: dict[float, int] = {}
    for value in means.values():
        groups[value] = groups.get(value, 0) + 1
    ties = sum(math.comb(g, 2) for g in groups.values() if g > 1)
    return ordered, ties


# ---------------------------------------------------------------------------
# pool-size sweep

DEFAULT_SWEEP_SIZES = tuple(range(20, 161, 10))


@dataclass(frozen=True)
class SweepCell:
    mean_pct: float
    max_pct: float
    tau: float
    n_systems: int
    n_zero_baseline: int
    n_tied_pairs: int


@dataclass(frozen=True)
class SweepRow:
    size_from: int
    size_to: int
    cells: Mapping[str, SweepCell]


@dataclass(frozen=True)
class SweepReport:
    sizes: tuple[int, ...]
    measures: tuple[str, ...]
    rows: tuple[SweepRow, ...]


def pool_sweep(
    student_runs: Sequence[Run],
    pooling_runs: Sequence[Run],
    google_run: Run,
    noise_docs: Iterable[str],
    full_qrels: Qrels,
    sizes: Sequence[int] = DEFAULT_SWEEP_SIZES,
    specs: Sequence[MeasureSpec] = (MeasureSpec("ndcg", 100),),
    *,
    k_g: int = 10,
    k_n: int = 10,
    noise_seed: int = 0,
    manifest: CrawlManifest | None = None,
) -> SweepReport:
    """Rebuild biased pools at every size, evaluate the student runs
    against the qrels restricted to each pool, and report how scores and
    rankings move between consecutive sizes.

    Relative increments are 100*(s' - s)/s per system; systems scoring 0 at
    the smaller size are excluded from mean/max and counted separately.
    """
    sizes = tuple(sizes)
    if len(sizes) < 2:
        raise ValidationError("need at least two sizes to sweep")
    if any(b <= a for a, b in pairwise(sizes)):
        raise ValidationError("sizes must be strictly increasing")
    if sizes[0] < k_g + k_n:
        raise ValidationError(
            f"smallest size {sizes[0]} is below the {k_g + k_n} forced docs"
        )
    qrels = conflate(full_qrels) if full_qrels.scale is Scale.GRADED3 else full_qrels
    topic_ids = qrels.topics()
    if not topic_ids:
        raise ValidationError("qrels are empty")
    noise_list = sorted(set(noise_docs))

    pools_by_size: dict[int, dict[str, Pool]] = {}
    for s in sizes:
        spec = PoolSpec(
            strategy=Strategy.BIASED,
            k=s,
            k_g=k_g,
            k_n=k_n,
            google_system_id=google_run.system_id,
            noise_seed=noise_seed,
        )
        pools_by_size[s] = {
            t: pool_biased(pooling_runs, google_run, noise_list, Topic(id=t, title=t), spec)
            for t in topic_ids
        }

    for t, pool in pools_by_size[sizes[-1]].items():
        unjudged = pool.doc_ids() - qrels.judged_docs(t)
        if unjudged:
            shown = ", ".join(sorted(unjudged)[:5])
            raise ValidationError(
                f"full qrels do not cover the size-{sizes[-1]} pool for topic "
                f"{t!r} (unjudged: {shown})"
            )

    means_by_size: dict[int, dict[str, dict[str, float]]] = {}
    for s in sizes:
        restricted = qrels.restricted_to(
            {t: pools_by_size[s][t].doc_ids() for t in topic_ids}
        )
        _, summaries = evaluate_matrix(student_runs, restricted, manifest, specs)
        means_by_size[s] = {
            spec.label: {sm.system_id: sm.means[spec.label] for sm in summaries}
            for spec in specs
        }

    rows = []
    for s, s_next in pairwise(sizes):
        cells: dict[str, SweepCell] = {}
        for spec in specs:
            m1 = means_by_size[s][spec.label]
            m2 = means_by_size[s_next][spec.label]
            increments = []
            zero_baseline = 0
            for system_id in m1:
                if m1[system_id] == 0.0:
                    zero_baseline += 1
                else:
                    increments.append(
                        100.0 * (m2[system_id] - m1[system_id]) / m1[system_id]
                    )
            r1, ties1 = ranking_from_means(m1)
            r2, ties2 = ranking_from_means(m2)
            tau = kendall_tau(r1, r2) if len(r1) >= 2 else 1.0
            cells[spec.label] = SweepCell(
                mean_pct=statistics.fmean(increments) if increments else 0.0,
                max_pct=max(increments) if increments else 0.0,
                tau=tau,
                n_systems=len(increments),
                n_zero_baseline=zero_baseline,
                n_tied_pairs=ties1 + ties2,
            )
        rows.append(SweepRow(size_from=s, size_to=s_next, cells=cells))
    return SweepReport(
        sizes=sizes,
        measures=tuple(spec.label for spec in specs),
        rows=tuple(rows),
    )
