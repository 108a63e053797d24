"""Judging-campaign state: the on-disk campaign directory, the append-only
judgment log, progress tracking, and qrels export.

A campaign directory holds everything one judging round needs:

    topics.xml          topic set (title + level descriptions)
    pools.tsv           per-topic pools with provenance
    assignments.json    assessor tokens + per-assessor doc assignments
    docs/<doc_id>       raw documents, one file per pool member
    judgments.log       append-only JSON-lines judgment records
    export/             written by export: qrels, agreement, noise report

The log is the only mutable piece. Every line is one judgment revision;
replaying the log reconstructs the exact same state after a crash.
Assessors authenticate with opaque tokens from assignments.json and never
see provenance: outbound payloads are built exclusively from fields listed
here, none of which carry provenance or tags.
"""

from __future__ import annotations

import hashlib
import json
import random
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ValidationError
from .formats import parse_pools, parse_topics, write_qrels
from .model import VALID_GRADES, Pool, Provenance, Qrels, Topic
from .reliability import (
    Assignment,
    Judgment,
    NoiseReport,
    cohen_kappa,
    merge_judgments,
    noise_quality_check,
)

_DOC_ID_BAD = ("/", "\\", "..")


def _check_doc_id(doc_id: str) -> None:
    if not doc_id or doc_id.startswith(".") or any(b in doc_id for b in _DOC_ID_BAD):
        raise ValidationError(f"unusable doc id for file storage: {doc_id!r}")


def make_token(seed: int, name: str) -> str:
    """Deterministic opaque token for an assessor (or 'admin')."""
    return f"{random.Random(f'{seed}:token:{name}').getrandbits(128):032x}"


def assignments_to_json(
    assignments: Iterable[Assignment], seed: int
) -> dict:
    """Serializable structure for assignments.json, tokens included."""
    assessor_ids = sorted({a.assessor_id for a in assignments})
    return {
        "seed": seed,
        "admin_token": make_token(seed, "admin"),
        "assessors": {aid: {"token": make_token(seed, aid)} for aid in assessor_ids},
        "assignments": [
            {
                "topic_id": a.topic_id,
                "assessor_id": a.assessor_id,
                "docs": [
                    {"doc_id": d, "tag": a.docs[d]} for d in sorted(a.docs)
                ],
            }
            for a in sorted(assignments, key=lambda a: (a.topic_id, a.assessor_id))
        ],
    }


def assignments_from_json(payload: Mapping) -> tuple[list[Assignment], int, str, dict[str, str]]:
    """Inverse of assignments_to_json: (assignments, seed, admin token,
    assessor token map)."""
    try:
        seed = int(payload["seed"])
        admin_token = str(payload["admin_token"])
        tokens = {
            aid: str(info["token"]) for aid, info in payload["assessors"].items()
        }
        assignments = [
            Assignment(
                topic_id=str(entry["topic_id"]),
                assessor_id=str(entry["assessor_id"]),
                docs={str(d["doc_id"]): str(d["tag"]) for d in entry["docs"]},
                seed=seed,
            )
            for entry in payload["assignments"]
        ]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed assignments file: {exc}") from exc
    for a in assignments:
        if a.assessor_id not in tokens:
            raise ValidationError(
                f"assignment for unknown assessor {a.assessor_id!r}"
            )
    return assignments, seed, admin_token, tokens


@dataclass(frozen=True)
class ExportResult:
    qrels: Qrels
    kappa_by_topic: Mapping[str, float | None]
    noise: NoiseReport
    checksum: str
    out_dir: Path


class CampaignState:
    """In-memory view of a campaign directory plus its live judgment log.

    Reads are lock-free snapshots of plain dicts; the only mutation is
    ``submit``, which serializes on a lock around the log append.
    """

    def __init__(
        self,
        root: Path,
        topics: dict[str, Topic],
        pools: dict[str, Pool],
        assignments: list[Assignment],
        seed: int,
        admin_token: str,
        assessor_tokens: dict[str, str],
    ) -> None:
        self.root = root
        self.topics = topics
        self.pools = pools
        self.assignments = assignments
        self.seed = seed
        self.admin_token = admin_token
        self.assessor_tokens = assessor_tokens
        self.log_path = root / "judgments.log"
        self._lock = threading.Lock()
        self._latest: dict[tuple[str, str, str], Judgment] = {}
        self._by_assessor: dict[str, list[Assignment]] = {}
        for a in assignments:
            self._by_assessor.setdefault(a.assessor_id, []).append(a)
        if self.log_path.exists():
            self._replay_log()

    # -- loading ------------------------------------------------------------

    @classmethod
    def load(cls, root: Path | str) -> "CampaignState":
        root = Path(root)
        if not root.is_dir():
            raise ValidationError(f"campaign directory not found: {root}")
        topics_path = root / "topics.xml"
        pools_path = root / "pools.tsv"
        assignments_path = root / "assignments.json"
        for p in (topics_path, pools_path, assignments_path):
            if not p.is_file():
                raise ValidationError(f"campaign is missing {p.name}", path=str(root))
        topics = {
            t.id: t
            for t in parse_topics(topics_path.read_text("utf-8"), path=str(topics_path))
        }
        pools = parse_pools(pools_path.read_text("utf-8"), path=str(pools_path))
        try:
            payload = json.loads(assignments_path.read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(
                f"malformed assignments file: {exc}", path=str(assignments_path)
            ) from exc
        assignments, seed, admin_token, tokens = assignments_from_json(payload)

        docs_dir = root / "docs"
        missing: list[str] = []
        for a in assignments:
            if a.topic_id not in topics:
                raise ValidationError(
                    f"assignment references unknown topic {a.topic_id!r}"
                )
            for doc_id in a.docs:
                _check_doc_id(doc_id)
                if not (docs_dir / doc_id).is_file():
                    missing.append(doc_id)
        if missing:
            shown = ", ".join(sorted(set(missing))[:10])
            raise ValidationError(
                f"assigned documents missing from {docs_dir}: {shown}"
            )
        return cls(root, topics, pools, assignments, seed, admin_token, tokens)

    def _replay_log(self) -> None:
        for lineno, line in enumerate(
            self.log_path.read_text("utf-8").splitlines(), start=1
        ):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                judgment = Judgment(
                    assessor_id=str(rec["assessor_id"]),
                    topic_id=str(rec["topic_id"]),
                    doc_id=str(rec["doc_id"]),
                    grade=int(rec["grade"]),
                    timestamp=float(rec.get("timestamp", 0.0)),
                    revision=int(rec["revision"]),
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValidationError(
                    f"corrupt judgment log: {exc}",
                    path=str(self.log_path),
                    line=lineno,
                ) from exc
            key = (judgment.assessor_id, judgment.topic_id, judgment.doc_id)
            self._latest[key] = judgment

    # -- queries ------------------------------------------------------------

    def authenticate(self, token: str) -> str | None:
        for assessor_id, t in self.assessor_tokens.items():
            if t == token:
                return assessor_id
        return None

    def is_admin(self, token: str) -> bool:
        return token == self.admin_token

    def assessor_assignments(self, assessor_id: str) -> list[Assignment]:
        if assessor_id not in self._by_assessor:
            raise ValidationError(f"unknown assessor {assessor_id!r}")
        return self._by_assessor[assessor_id]

    def assigned_pairs(self, assessor_id: str) -> list[tuple[str, str]]:
        """The assessor's (topic, doc) pairs in their stable judging order:
        a seeded shuffle that interleaves shared and exclusive docs so the
        order betrays nothing about provenance."""
        pairs = sorted(
            (a.topic_id, d)
            for a in self.assessor_assignments(assessor_id)
            for d in a.docs
        )
        rng = random.Random(f"{self.seed}:order:{assessor_id}")
        rng.shuffle(pairs)
        return pairs

    def is_assigned(self, assessor_id: str, topic_id: str, doc_id: str) -> bool:
        return any(
            a.topic_id == topic_id and doc_id in a.docs
            for a in self._by_assessor.get(assessor_id, [])
        )

    def grade_of(self, assessor_id: str, topic_id: str, doc_id: str) -> int | None:
        j = self._latest.get((assessor_id, topic_id, doc_id))
        return j.grade if j else None

    def progress(self, assessor_id: str) -> tuple[int, int]:
        """(judged, assigned) for one assessor."""
        pairs = [
            (a.topic_id, d)
            for a in self.assessor_assignments(assessor_id)
            for d in a.docs
        ]
        judged = sum(
            1 for t, d in pairs if (assessor_id, t, d) in self._latest
        )
        return judged, len(pairs)

    def all_complete(self) -> bool:
        return all(
            judged == assigned
            for judged, assigned in (
                self.progress(aid) for aid in sorted(self._by_assessor)
            )
        )

    def raw_document(self, doc_id: str) -> bytes:
        _check_doc_id(doc_id)
        path = self.root / "docs" / doc_id
        if not path.is_file():
            raise ValidationError(f"document file missing: {doc_id!r}")
        return path.read_bytes()

    # -- mutation -----------------------------------------------------------

    def submit(
        self, assessor_id: str, topic_id: str, doc_id: str, grade: int
    ) -> Judgment:
        if grade not in VALID_GRADES:
            raise ValidationError(
                f"grade {grade} out of range {sorted(VALID_GRADES)}"
            )
        if not self.is_assigned(assessor_id, topic_id, doc_id):
            raise PermissionError(
                f"doc {doc_id!r} of topic {topic_id!r} is not assigned to "
                f"{assessor_id!r}"
            )
        with self._lock:
            key = (assessor_id, topic_id, doc_id)
            prev = self._latest.get(key)
            judgment = Judgment(
                assessor_id=assessor_id,
                topic_id=topic_id,
                doc_id=doc_id,
                grade=grade,
                timestamp=time.time(),
                revision=(prev.revision + 1) if prev else 1,
            )
            line = json.dumps(
                {
                    "assessor_id": judgment.assessor_id,
                    "topic_id": judgment.topic_id,
                    "doc_id": judgment.doc_id,
                    "grade": judgment.grade,
                    "timestamp": judgment.timestamp,
                    "revision": judgment.revision,
                },
                sort_keys=True,
            )
            with self.log_path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
            self._latest[key] = judgment
        return judgment

    # -- export -------------------------------------------------------------

    def export(self, seed: int | None = None, *, force: bool = False) -> ExportResult:
        """Merge judgments into qrels, compute per-topic agreement on the
        shared docs and the noise-document report, and write everything
        under ``export/``. Refuses while assignments are incomplete unless
        forced."""
        if seed is None:
            seed = self.seed
        judgments = list(self._latest.values())
        qrels = merge_judgments(
            self.assignments, judgments, seed, allow_incomplete=force
        )

        by_topic: dict[str, list[Assignment]] = {}
        for a in self.assignments:
            by_topic.setdefault(a.topic_id, []).append(a)
        kappa_by_topic: dict[str, float | None] = {}
        for topic_id, group in sorted(by_topic.items()):
            if len(group) != 2:
                kappa_by_topic[topic_id] = None
                continue
            a1, a2 = sorted(group, key=lambda a: a.assessor_id)
            shared = a1.shared_docs() & a2.shared_docs()
            j1: dict[str, int] = {}
            j2: dict[str, int] = {}
            for d in shared:
                g1 = self.grade_of(a1.assessor_id, topic_id, d)
                g2 = self.grade_of(a2.assessor_id, topic_id, d)
                if g1 is not None and g2 is not None:
                    j1[d] = g1
                    j2[d] = g2
            if not j1:
                kappa_by_topic[topic_id] = None
                continue
            try:
                kappa_by_topic[topic_id] = cohen_kappa(j1, j2)
            except ValidationError:
                kappa_by_topic[topic_id] = None

        noise_docs = set()
        for pool in self.pools.values():
            noise_docs |= pool.by_provenance(Provenance.NOISE)
        noise = noise_quality_check(judgments, noise_docs)

        log_bytes = self.log_path.read_bytes() if self.log_path.exists() else b""
        checksum = hashlib.sha256(log_bytes).hexdigest()

        out_dir = self.root / "export"
        out_dir.mkdir(exist_ok=True)
        (out_dir / "qrels.txt").write_text(write_qrels(qrels), "utf-8")
        kappa_lines = ["topic_id\tkappa"]
        for topic_id, value in kappa_by_topic.items():
            kappa_lines.append(
                f"{topic_id}\t{'-' if value is None else format(value, '.4f')}"
            )
        (out_dir / "kappa.tsv").write_text("\n".join(kappa_lines) + "\n", "utf-8")
        noise_lines = [
            "scope\tjudged\trelevant\tfraction\tflagged",
            f"overall\t{noise.total_judged}\t{noise.total_relevant}"
            f"\t{noise.fraction:.2%}\t-",
        ]
        for a in noise.assessors:
            noise_lines.append(
                f"{a.assessor_id}\t{a.judged}\t{a.relevant}"
                f"\t{a.fraction:.2%}\t{'yes' if a.flagged else 'no'}"
            )
        (out_dir / "noise-report.tsv").write_text("\n".join(noise_lines) + "\n", "utf-8")
        (out_dir / "checksum.txt").write_text(checksum + "\n", "utf-8")
        return ExportResult(
            qrels=qrels,
            kappa_by_topic=kappa_by_topic,
            noise=noise,
            checksum=checksum,
            out_dir=out_dir,
        )
