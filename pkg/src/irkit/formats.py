"""Parsers and writers for the interchange file formats.

Formats (all UTF-8, LF line endings):

* topics — XML, a root element containing ``<topic id=...>`` elements with a
  ``<title>`` and an optional ``<relevance>`` holding ``<level value=N>``
  descriptions; a topic without ``<relevance>`` is a noise topic.
* runs — six whitespace-separated columns:
  ``topic_id Q0 doc_id rank score system_id``.
* qrels — four columns: ``topic_id 0 doc_id grade``.
* crawl manifest — a ``noise-topics [id ...]`` header line, then one line per
  document: ``doc_id topic_id [topic_id ...]``.
* pools — one ``# pool <topic> target=<k> underfull=<0|1>`` comment per
  topic followed by ``topic_id doc_id provenance depth`` lines.

Writers emit a canonical form (topics sorted lexicographically, run entries
by rank, floats in their shortest round-trip representation), so
``write(parse(text))`` canonicalizes and ``parse(write(x))`` is the identity.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from xml.sax.saxutils import escape, quoteattr

from .errors import ParseError, ValidationError
from .model import (
    VALID_GRADES,
    CrawlManifest,
    Pool,
    Provenance,
    Qrels,
    Run,
    RunEntry,
    Scale,
    Topic,
)

# ---------------------------------------------------------------------------
# topics (XML)


def parse_topics(text: str, *, path: str | None = None) -> list[Topic]:
    """Parse a topic file. A bare ``<topic>`` root is accepted as a
    single-topic document."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line = exc.position[0] if exc.position else None
        raise ParseError(f"malformed topics XML: {exc.msg}", path=path, line=line) from exc

    elements = [root] if root.tag == "topic" else list(root.iter("topic"))
    topics: list[Topic] = []
    seen: set[str] = set()
    for el in elements:
        topic_id = el.get("id")
        if not topic_id:
            raise ValidationError("topic element without an id attribute", path=path)
        if topic_id in seen:
            raise ValidationError(f"duplicate topic id {topic_id!r}", path=path)
        seen.add(topic_id)
        title_el = el.find("title")
        if title_el is None:
            raise ValidationError(f"topic {topic_id!r} has no <title>", path=path)
        title = "".join(title_el.itertext())
        relevance = el.find("relevance")
        if relevance is None:
            topics.append(Topic(id=topic_id, title=title, is_noise=True))
            continue
        levels: list[tuple[int, str]] = []
        for level in relevance.findall("level"):
            value = level.get("value")
            if value is None:
                raise ValidationError(
                    f"topic {topic_id!r}: <level> without a value attribute", path=path
                )
            try:
                grade = int(value)
            except ValueError:
                raise ValidationError(
                    f"topic {topic_id!r}: non-integer level value {value!r}", path=path
                ) from None
            levels.append((grade, "".join(level.itertext())))
        topics.append(Topic(id=topic_id, title=title, levels=tuple(levels)))
    return topics


def write_topics(topics: list[Topic]) -> str:
    lines = ["<topics>"]
    for topic in sorted(topics, key=lambda t: t.id):
        lines.append(f"  <topic id={quoteattr(topic.id)}>")
        lines.append(f"    <title>{escape(topic.title)}</title>")
        if not topic.is_noise:
            lines.append("    <relevance>")
            for grade, description in topic.levels:
                lines.append(
                    f"      <level value={quoteattr(str(grade))}>{escape(description)}</level>"
                )
            lines.append("    </relevance>")
        lines.append("  </topic>")
    lines.append("</topics>")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# runs (6-column)


def _split_line(line: str, n: int, lineno: int, path: str | None) -> list[str]:
    fields = line.split()
    if len(fields) != n:
        raise ParseError(
            f"expected {n} whitespace-separated columns, found {len(fields)}",
            path=path,
            line=lineno,
        )
    return fields


def parse_run(text: str, *, path: str | None = None) -> Run:
    system_id: str | None = None
    grouped: dict[str, list[RunEntry]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        topic_id, q0, doc_id, rank_s, score_s, sysid = _split_line(line, 6, lineno, path)
        if q0 != "Q0":
            raise ParseError(f"second column must be the literal Q0, found {q0!r}",
                             path=path, line=lineno)
        try:
            rank = int(rank_s)
        except ValueError:
            raise ParseError(f"rank {rank_s!r} is not an integer", path=path, line=lineno) from None
        try:
            score = float(score_s)
        except ValueError:
            raise ParseError(f"score {score_s!r} is not a number", path=path, line=lineno) from None
        if system_id is None:
            system_id = sysid
        elif sysid != system_id:
            raise ValidationError(
                f"inconsistent system id: {sysid!r} after {system_id!r}",
                path=path,
                line=lineno,
            )
        grouped.setdefault(topic_id, []).append(RunEntry(doc_id, rank, score))
    if system_id is None:
        raise ValidationError("run file contains no entries", path=path)
    try:
        return Run(system_id=system_id, entries={t: tuple(es) for t, es in grouped.items()})
    except ValidationError as exc:
        raise ValidationError(str(exc), path=path) from None


def format_score(score: float) -> str:
    """Shortest decimal representation that round-trips through float()."""
    return repr(float(score))


def write_run(run: Run) -> str:
    lines = []
    for topic_id in run.topics():
        for e in run.entries[topic_id]:
            lines.append(
                f"{topic_id} Q0 {e.doc_id} {e.rank} {format_score(e.score)} {run.system_id}"
            )
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# qrels (4-column)


def parse_qrels(text: str, *, scale: Scale = Scale.GRADED3, path: str | None = None) -> Qrels:
    judgments: dict[tuple[str, str], int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        topic_id, zero, doc_id, grade_s = _split_line(line, 4, lineno, path)
        if zero != "0":
            raise ParseError(f"second column must be the literal 0, found {zero!r}",
                             path=path, line=lineno)
        try:
            grade = int(grade_s)
        except ValueError:
            raise ParseError(f"grade {grade_s!r} is not an integer", path=path, line=lineno) from None
        if grade not in VALID_GRADES:
            raise ValidationError(
                f"grade {grade} out of range {sorted(VALID_GRADES)}", path=path, line=lineno
            )
        key = (topic_id, doc_id)
        if key in judgments:
            raise ValidationError(
                f"duplicate judgment for ({topic_id!r}, {doc_id!r})", path=path, line=lineno
            )
        judgments[key] = grade
    try:
        return Qrels(judgments=judgments, scale=scale)
    except ValidationError as exc:
        raise ValidationError(str(exc), path=path) from None


def write_qrels(qrels: Qrels) -> str:
    lines = [
        f"{topic_id} 0 {doc_id} {qrels.judgments[(topic_id, doc_id)]}"
        for topic_id, doc_id in sorted(qrels.judgments)
    ]
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# crawl manifest


def parse_manifest(text: str, *, path: str | None = None) -> CrawlManifest:
    lines = [(n, ln) for n, ln in enumerate(text.splitlines(), start=1) if ln.strip()]
    if not lines:
        raise ParseError("manifest is empty (missing noise-topics header)", path=path)
    header_no, header = lines[0]
    fields = header.split()
    if fields[0] != "noise-topics":
        raise ParseError(
            "manifest must start with a 'noise-topics [id ...]' header line",
            path=path,
            line=header_no,
        )
    noise_topics = frozenset(fields[1:])
    crawled: dict[str, frozenset[str]] = {}
    for lineno, line in lines[1:]:
        fields = line.split()
        if len(fields) < 2:
            raise ValidationError(
                f"document {fields[0]!r} maps to no topic", path=path, line=lineno
            )
        doc_id = fields[0]
        if doc_id in crawled:
            raise ValidationError(f"duplicate document line {doc_id!r}", path=path, line=lineno)
        crawled[doc_id] = frozenset(fields[1:])
    try:
        return CrawlManifest(crawled_for=crawled, noise_topics=noise_topics)
    except ValidationError as exc:
        raise ValidationError(str(exc), path=path) from None


def write_manifest(manifest: CrawlManifest) -> str:
    header = " ".join(["noise-topics", *sorted(manifest.noise_topics)]).rstrip()
    lines = [header]
    for doc_id in sorted(manifest.crawled_for):
        lines.append(" ".join([doc_id, *sorted(manifest.crawled_for[doc_id])]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# pools


def parse_pools(text: str, *, path: str | None = None) -> dict[str, Pool]:
    meta: dict[str, tuple[int, bool]] = {}
    members: dict[str, dict[str, Provenance]] = {}
    depths: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            fields = line[1:].split()
            if len(fields) == 4 and fields[0] == "pool":
                topic_id = fields[1]
                try:
                    target = int(fields[2].removeprefix("target="))
                    underfull = bool(int(fields[3].removeprefix("underfull=")))
                except ValueError:
                    raise ParseError("malformed pool header", path=path, line=lineno) from None
                meta[topic_id] = (target, underfull)
                members.setdefault(topic_id, {})
            continue
        topic_id, doc_id, prov_s, depth_s = _split_line(line, 4, lineno, path)
        try:
            prov = Provenance(prov_s)
        except ValueError:
            raise ValidationError(f"unknown provenance {prov_s!r}", path=path, line=lineno) from None
        try:
            depth = int(depth_s)
        except ValueError:
            raise ParseError(f"depth {depth_s!r} is not an integer", path=path, line=lineno) from None
        topic_members = members.setdefault(topic_id, {})
        if doc_id in topic_members:
            raise ValidationError(
                f"duplicate pool member ({topic_id!r}, {doc_id!r})", path=path, line=lineno
            )
        topic_members[doc_id] = prov
        if topic_id in depths and depths[topic_id] != depth:
            raise ValidationError(
                f"inconsistent depth for topic {topic_id!r}", path=path, line=lineno
            )
        depths[topic_id] = depth
    pools: dict[str, Pool] = {}
    for topic_id, topic_members in members.items():
        target, underfull = meta.get(topic_id, (len(topic_members), False))
        pools[topic_id] = Pool(
            topic_id=topic_id,
            members=topic_members,
            depth=depths.get(topic_id, 0),
            target_size=target,
            underfull=underfull,
        )
    return pools


def write_pools(pools: dict[str, Pool]) -> str:
    lines = []
    for topic_id in sorted(pools):
        pool = pools[topic_id]
        lines.append(
            f"# pool {topic_id} target={pool.target_size} underfull={int(pool.underfull)}"
        )
        for doc_id in sorted(pool.members):
            lines.append(f"{topic_id} {doc_id} {pool.members[doc_id].value} {pool.depth}")
    return "\n".join(lines) + ("\n" if lines else "")
