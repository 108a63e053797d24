"""Shared fixtures: synthetic run/qrels generators and a campaign-directory
builder, plus a terminal summary that prints one pass/fail line per
acceptance test."""

from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from irkit.campaign import assignments_to_json
from irkit.formats import write_pools, write_topics
from irkit.model import Pool, Provenance, Qrels, Run, RunEntry, Scale, Topic
from irkit.reliability import assign_judging

# ---------------------------------------------------------------------------
# generators


def make_run(
    rng: random.Random,
    system_id: str,
    topic_ids: list[str],
    universe: list[str],
    n: int,
) -> Run:
    """A run ranking a random sample of the universe per topic."""
    entries = {}
    for topic_id in topic_ids:
        docs = rng.sample(universe, min(n, len(universe)))
        entries[topic_id] = tuple(
            RunEntry(doc_id=d, rank=i + 1, score=float(len(docs) - i))
            for i, d in enumerate(docs)
        )
    return Run(system_id=system_id, entries=entries)


def make_qrels(
    rng: random.Random,
    topic_ids: list[str],
    universe: list[str],
    n_judged: int,
    p_relevant: float = 0.3,
    scale: Scale = Scale.BINARY,
) -> Qrels:
    judgments = {}
    for topic_id in topic_ids:
        for doc_id in rng.sample(universe, min(n_judged, len(universe))):
            if scale is Scale.BINARY:
                grade = 1 if rng.random() < p_relevant else 0
            else:
                grade = rng.choice([0, 0, 0, 1, 2])
            judgments[(topic_id, doc_id)] = grade
    return Qrels(judgments=judgments, scale=scale)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)


# ---------------------------------------------------------------------------
# campaign directory builder


DOC_TEMPLATE = """<html><head><title>{title}</title>
<script>tracker();</script></head>
<body onload="boot()"><h1>{title}</h1>
<p style="color:red">This page talks about {subject} at length.</p>
<form><input type="text"><button>Search</button></form>
<p>Some more text about {subject} and other things.</p></body></html>"""


def build_campaign(
    root: Path,
    *,
    n_regular: int = 8,
    n_google: int = 4,
    n_noise: int = 4,
    seed: int = 11,
    topic_id: str = "t-001",
) -> dict:
    """Write a complete single-topic campaign directory and return its
    pieces (paths, tokens, assignments)."""
    topic = Topic(
        id=topic_id,
        title="city parks and public gardens",
        levels=(
            (2, "The document is mainly about city parks."),
            (1, "The document mentions parks or gardens in passing."),
            (0, "The document is not about parks at all."),
        ),
    )
    members: dict[str, Provenance] = {}
    members.update({f"reg{i:03d}": Provenance.POOLED for i in range(n_regular)})
    members.update({f"eng{i:03d}": Provenance.GOOGLE for i in range(n_google)})
    members.update({f"nz{i:03d}": Provenance.NOISE for i in range(n_noise)})
    pool = Pool(
        topic_id=topic_id,
        members=members,
        depth=5,
        target_size=len(members),
    )

    root.mkdir(parents=True, exist_ok=True)
    (root / "topics.xml").write_text(write_topics([topic]), "utf-8")
    (root / "pools.tsv").write_text(write_pools({topic_id: pool}), "utf-8")
    docs_dir = root / "docs"
    docs_dir.mkdir(exist_ok=True)
    for doc_id in members:
        subject = "parks" if doc_id.startswith(("reg", "eng")) else "cooking"
        (docs_dir / doc_id).write_text(
            DOC_TEMPLATE.format(title=f"Doc {doc_id}", subject=subject), "utf-8"
        )

    assignments = assign_judging(pool, None, seed=seed)
    payload = assignments_to_json(assignments, seed)
    (root / "assignments.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", "utf-8"
    )
    return {
        "root": root,
        "topic": topic,
        "pool": pool,
        "assignments": assignments,
        "admin_token": payload["admin_token"],
        "tokens": {a: info["token"] for a, info in payload["assessors"].items()},
    }


@pytest.fixture
def campaign(tmp_path: Path) -> dict:
    return build_campaign(tmp_path / "campaign")


# ---------------------------------------------------------------------------
# acceptance report lines

_outcomes: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _outcomes[report.nodeid] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_outcomes):
        name = nodeid.split("::")[-1].removeprefix("test_").replace("_", " ")
        terminalreporter.write_line(f"{_outcomes[nodeid]}  {name}")
