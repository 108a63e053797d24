"""End-to-end checks for the guarantees the toolkit advertises.

Each test here is one externally visible promise: measure arithmetic,
pool construction, assessor bookkeeping, rank stability, sanitizer
safety, format round-trips, and whole-pipeline determinism. The summary
hook in conftest prints a PASS/FAIL line per test at the end of a run.
"""

import itertools
import json
import math
import random
import statistics
import time
from pathlib import Path

import pytest

import oracles
from conftest import make_run
from irkit.cli import main as cli_main
from irkit.formats import (
    parse_manifest,
    parse_pools,
    parse_qrels,
    parse_run,
    parse_topics,
    write_manifest,
    write_pools,
    write_qrels,
    write_run,
    write_topics,
)
from irkit.measures import (
    MeasureSpec,
    average_precision_at,
    crawl_ratio_at,
    evaluate_matrix,
    ndcg_at,
    precision_at,
    recall_at,
    reciprocal_rank,
)
from irkit.errors import ValidationError
from irkit.model import (
    CrawlManifest,
    Pool,
    Provenance,
    Qrels,
    Run,
    Scale,
    Topic,
)
from irkit.pooling import PoolSpec, Strategy, pool_biased, pool_size_k
from irkit.reliability import (
    Judgment,
    assign_judging,
    cohen_kappa,
    kendall_tau,
    merge_judgments,
    noise_quality_check,
    pool_sweep,
)
from irkit.sanitize import MAX_DOC_BYTES, sanitize_html, truncate_doc

DATA = Path(__file__).parent / "data"


def binary_qrels(topic_id, relevant, judged):
    judgments = {(topic_id, d): (1 if d in relevant else 0) for d in judged}
    return Qrels(judgments, scale=Scale.BINARY)


def test_measures_match_brute_force_oracle():
    rng = random.Random(101)
    started = time.perf_counter()
    for _ in range(1000):
        n_docs = rng.randint(1, 50)
        universe = [f"d{i}" for i in range(n_docs + 20)]
        ranking = rng.sample(universe, n_docs)
        relevant = set(rng.sample(universe, rng.randint(0, 10)))
        crawled = set(rng.sample(universe, rng.randint(1, len(universe))))
        k = rng.choice([1, 5, 10, 50])

        judged = set(ranking) | relevant
        qrels = binary_qrels("t", relevant, judged)
        manifest = CrawlManifest(
            crawled_for={d: {"t"} for d in crawled}, noise_topics=set()
        )

        checks = [
            (precision_at(ranking, qrels, "t", k), oracles.precision(ranking, relevant, k)),
            (recall_at(ranking, qrels, "t", k), oracles.recall(ranking, relevant, k)),
            (
                average_precision_at(ranking, qrels, "t", k),
                oracles.average_precision(ranking, relevant, k),
            ),
            (ndcg_at(ranking, qrels, "t", k), oracles.ndcg(ranking, relevant, k)),
            (
                reciprocal_rank(ranking, qrels, "t"),
                oracles.reciprocal_rank(ranking, relevant),
            ),
            (
                crawl_ratio_at(ranking, manifest, "t", k),
                oracles.crawl_ratio(ranking, crawled, k),
            ),
        ]
        for got, expected in checks:
            assert got == pytest.approx(expected, abs=1e-9)
    assert time.perf_counter() - started < 10.0


def test_size_k_pools_use_minimal_depth():
    rng = random.Random(202)
    topic = Topic(id="t", title="t", levels=((1, "rel"), (0, "not")))
    for _ in range(200):
        universe = [f"d{i}" for i in range(40)]
        runs = [
            make_run(rng, f"s{i}", ["t"], universe, rng.randint(5, 35))
            for i in range(rng.randint(1, 4))
        ]
        rankings = [list(r.ranking("t")) for r in runs]
        all_docs = {d for r in rankings for d in r}
        k = rng.randint(1, len(all_docs))

        pool = pool_size_k(runs, topic, k)
        depth, union, underfull = oracles.min_depth_for_size(rankings, k)

        assert not pool.underfull
        assert not underfull
        assert pool.depth == depth
        assert pool.doc_ids() == union
        assert len(oracles.union_at_depth(rankings, pool.depth - 1)) < k
        assert k <= len(oracles.union_at_depth(rankings, pool.depth))


def test_biased_pool_composition_and_size_band():
    rng = random.Random(303)
    universe = [f"d{i:03d}" for i in range(250)]
    noise = [f"nz{i:02d}" for i in range(10)]
    topic_ids = [f"t{i}" for i in range(5)]
    runs = [make_run(rng, f"s{i:02d}", topic_ids, universe, 180) for i in range(12)]
    google = make_run(rng, "google", topic_ids, universe, 60)
    spec = PoolSpec(
        strategy=Strategy.BIASED, k=160, k_g=10, k_n=10,
        google_system_id="google", noise_seed=7,
    )
    for topic_id in topic_ids:
        topic = Topic(id=topic_id, title=topic_id, levels=((1, "r"), (0, "n")))
        pool = pool_biased(runs, google, noise, topic, spec)
        assert not pool.underfull
        assert 160 <= pool.size <= 175
        noise_members = {d for d, p in pool.members.items() if p is Provenance.NOISE}
        assert noise_members == set(noise)
        google_top = list(google.ranking(topic_id))[:10]
        assert set(google_top) <= pool.doc_ids()


def _sweep_fixture(rng):
    universe = [f"d{i:03d}" for i in range(200)]
    noise = [f"nz{i:02d}" for i in range(12)]
    topic_ids = [f"t{i}" for i in range(4)]
    students = [make_run(rng, f"stu{i}", topic_ids, universe, 80) for i in range(5)]
    pooling = [make_run(rng, f"pl{i}", topic_ids, universe, 120) for i in range(6)]
    google = make_run(rng, "google", topic_ids, universe, 40)
    judgments = {}
    for t in topic_ids:
        for d in universe + noise:
            judgments[(t, d)] = 1 if rng.random() < 0.35 else 0
    qrels = Qrels(judgments, scale=Scale.BINARY)
    return students, pooling, google, noise, qrels, topic_ids


def test_sweep_flat_row_for_identical_pools():
    # every source ranking exhausts below the smallest size, so consecutive
    # pools are identical and the row must read 0.00% / 0.00% / 1.000
    rng = random.Random(404)
    students, pooling, google, noise, qrels, topic_ids = _sweep_fixture(rng)
    short_pooling = [
        Run(
            system_id=r.system_id,
            entries={t: r.entries[t][:2] for t in r.topics()},
        )
        for r in pooling[:2]
    ]
    short_google = Run(
        system_id="google",
        entries={t: google.entries[t][:10] for t in google.topics()},
    )
    report = pool_sweep(
        students, short_pooling, short_google, noise[:10], qrels,
        sizes=(25, 30, 35), noise_seed=3,
    )
    for row in report.rows:
        cell = row.cells["ndcg@100"]
        assert cell.mean_pct == 0.0
        assert cell.max_pct == 0.0
        assert cell.tau == 1.0
        assert f"{cell.mean_pct:.2f}%" == "0.00%"
        assert f"{cell.max_pct:.2f}%" == "0.00%"
        assert f"{cell.tau:.3f}" == "1.000"


def test_sweep_cells_match_independent_reevaluation():
    rng = random.Random(505)
    students, pooling, google, noise, qrels, topic_ids = _sweep_fixture(rng)
    sizes = (20, 30, 40, 50, 60)
    started = time.perf_counter()
    report = pool_sweep(
        students, pooling, google, noise, qrels, sizes=sizes, noise_seed=9,
    )

    # rebuild everything from scratch: pools per size, qrels restricted to
    # each pool, per-system ndcg@100 means via the brute-force evaluator
    def means_at(size):
        spec = PoolSpec(
            strategy=Strategy.BIASED, k=size, k_g=10, k_n=10,
            google_system_id="google", noise_seed=9,
        )
        relevant_at = {}
        for t in sorted(topic_ids):
            topic = Topic(id=t, title=t, levels=((1, "r"), (0, "n")))
            pool = pool_biased(pooling, google, noise, topic, spec)
            relevant_at[t] = {d for d in pool.doc_ids() if qrels.grade(t, d) == 1}
        means = {}
        for run in students:
            values = [
                oracles.ndcg(list(run.ranking(t)), relevant_at[t], 100)
                for t in sorted(topic_ids)
            ]
            means[run.system_id] = statistics.fmean(values)
        return means

    def tie_pairs(means):
        counts = {}
        for value in means.values():
            counts[value] = counts.get(value, 0) + 1
        return sum(c * (c - 1) // 2 for c in counts.values())

    for row in report.rows:
        m1 = means_at(row.size_from)
        m2 = means_at(row.size_to)
        increments = [
            100.0 * (m2[s] - m1[s]) / m1[s] for s in sorted(m1) if m1[s] != 0.0
        ]
        zero = sum(1 for s in m1 if m1[s] == 0.0)
        r1 = sorted(m1, key=lambda s: (-m1[s], s))
        r2 = sorted(m2, key=lambda s: (-m2[s], s))
        expected_mean = statistics.fmean(increments) if increments else 0.0
        expected_max = max(increments) if increments else 0.0

        cell = row.cells["ndcg@100"]
        assert cell.mean_pct == pytest.approx(expected_mean, rel=1e-9, abs=1e-9)
        assert cell.max_pct == pytest.approx(expected_max, rel=1e-9, abs=1e-9)
        assert cell.tau == pytest.approx(oracles.kendall_tau_pairs(r1, r2), abs=1e-12)
        assert cell.n_systems == len(increments)
        assert cell.n_zero_baseline == zero
        assert cell.n_tied_pairs == tie_pairs(m1) + tie_pairs(m2)
    assert time.perf_counter() - started < 5.0


def test_kendall_tau_matches_pair_counting():
    for n in range(2, 9):
        identity = list(range(n))
        for perm in itertools.permutations(identity):
            assert kendall_tau(identity, list(perm)) == oracles.kendall_tau_pairs(
                identity, list(perm)
            )
    for n in (2, 5, 10, 50):
        items = [f"x{i}" for i in range(n)]
        assert kendall_tau(items, items) == 1.0
        assert kendall_tau(items, list(reversed(items))) == -1.0


def test_cohen_kappa_hand_example_and_symmetry():
    docs = ["a", "b", "c", "d"]
    j1 = dict(zip(docs, (1, 1, 0, 0)))
    j2 = dict(zip(docs, (1, 0, 1, 0)))
    assert cohen_kappa(j1, j2) == pytest.approx(0.0, abs=1e-12)
    assert cohen_kappa(j1, j1) == 1.0

    rng = random.Random(606)
    for _ in range(50):
        n = rng.randint(2, 40)
        ds = [f"d{i}" for i in range(n)]
        a = {d: rng.choice([0, 1, 2]) for d in ds}
        b = {d: rng.choice([0, 1, 2]) for d in ds}
        try:
            forward = cohen_kappa(a, b)
        except ValidationError:
            continue  # degenerate expected-agreement cases
        assert forward == pytest.approx(cohen_kappa(b, a), abs=1e-12)
        assert forward == pytest.approx(oracles.cohen_kappa_direct(a, b), abs=1e-12)


def test_judging_split_sizes_and_merge_coverage():
    members = {f"reg{i:03d}": Provenance.POOLED for i in range(140)}
    members.update({f"eng{i:02d}": Provenance.GOOGLE for i in range(10)})
    members.update({f"nz{i:02d}": Provenance.NOISE for i in range(10)})
    pool = Pool(topic_id="t1", members=members, depth=9, target_size=160)

    assignments = assign_judging(pool, None, seed=7)
    assert len(assignments) == 2
    for a in assignments:
        assert len(a.docs) == 90
        assert len(a.exclusive_docs()) == 70
        assert len(a.shared_docs()) == 20

    judgments = [
        Judgment(assessor_id=a.assessor_id, topic_id="t1", doc_id=d, grade=1)
        for a in assignments
        for d in a.docs
    ]
    qrels = merge_judgments(assignments, judgments, seed=7)
    assert {d for _, d in qrels.judgments} == pool.doc_ids()
    assert len(qrels.judgments) == 160


def test_noise_fraction_formats_as_expected():
    noise_docs = [f"nz{i:03d}" for i in range(700)]
    judgments = [
        Judgment(
            assessor_id="assessor-1", topic_id="t", doc_id=d,
            grade=1 if i == 0 else 0,
        )
        for i, d in enumerate(noise_docs)
    ]
    report = noise_quality_check(judgments, noise_docs)
    assert report.total_judged == 700
    assert report.total_relevant == 1
    assert f"{report.fraction:.2%}" == "0.14%"


FRAGMENTS = [
    "<p>plain paragraph text</p>",
    "<div class=box><span>nested ",
    "</span></div>",
    "some bare text with &amp; entities &#233; here",
    "<script>var x = '<p>not text</p>';</script>",
    "<style>p { color: red }</style>",
    "<iframe src=\"http://x\">framed</iframe>",
    "<a href=\"javascript:steal()\">click</a>",
    "<a href=\"https://example.org\">fine link</a>",
    "<b><i>crossed</b></i>",
    "<ul><li>one<li>two</ul>",
    "<img src=pic.png alt=pic>",
    "<br><hr>",
    "<form action=/post><input name=q value=v><button>go</button></form>",
    "<DIV ONCLICK=\"evil()\">shouty</DIV>",
    "<!-- a comment -->",
    "<p style=\"x:y\" lang=en>styled</p>",
    "stray </section> closer",
    "<template><p>inert</p></template>",
    "<noscript>fallback</noscript>",
    "<table><tr><td>cell</table>",
    "unfinished <em>emphasis",
    "<p",
    "half an entity &am here",
    "<object data=x><param name=a><span>inside</span></object>",
]


def test_sanitizer_idempotence_and_truncation():
    rng = random.Random(707)
    for _ in range(100):
        raw = " ".join(rng.choice(FRAGMENTS) for _ in range(rng.randint(3, 40)))
        once = sanitize_html(raw)
        assert sanitize_html(once) == once
        before = " ".join(oracles.extract_visible_text(raw).split())
        after = " ".join(oracles.extract_visible_text(once).split())
        assert after == before

    blob = ("été 😀 naïve " * 20_000).encode("utf-8")
    assert len(blob) > 300 * 1024
    cut, truncated = truncate_doc(blob)
    assert truncated
    assert len(cut) <= MAX_DOC_BYTES
    cut.decode("utf-8")  # must still be valid at the cut point


def test_format_round_trips():
    rng = random.Random(808)
    topics = [
        Topic(
            id=f"2031-{i:03d}",
            title=f"generated topic {i}",
            levels=((2, f"fully about {i}"), (1, "partially"), (0, "not at all")),
        )
        for i in range(6)
    ] + [Topic(id="2031-900", title="noise topic", is_noise=True)]
    assert parse_topics(write_topics(topics)) == sorted(topics, key=lambda t: t.id)

    universe = [f"d{i}" for i in range(60)]
    run = make_run(rng, "sysA", ["2031-000", "2031-001"], universe, 30)
    assert parse_run(write_run(run)) == run

    judgments = {
        (f"2031-{i:03d}", d): rng.choice([-1, 0, 1, 2])
        for i in range(3)
        for d in rng.sample(universe, 20)
    }
    qrels = Qrels(judgments, scale=Scale.GRADED3)
    assert parse_qrels(write_qrels(qrels)) == qrels

    manifest = CrawlManifest(
        crawled_for={d: {rng.choice(["2031-000", "2031-001", "nz"])} for d in universe},
        noise_topics={"nz"},
    )
    assert parse_manifest(write_manifest(manifest)) == manifest

    members = {d: rng.choice(list(Provenance)) for d in universe[:25]}
    pools = {
        "2031-000": Pool(
            topic_id="2031-000", members=members, depth=4,
            target_size=30, underfull=True,
        )
    }
    assert parse_pools(write_pools(pools)) == pools

    # the checked-in topic file survives a parse -> write -> parse cycle
    fixture = (DATA / "sample-topic.xml").read_text("utf-8")
    parsed = parse_topics(fixture)
    assert [t.id for t in parsed] == ["2012-014"]
    assert parsed[0].title == "Social media in the Arab uprisings"
    assert [g for g, _ in parsed[0].levels] == [2, 1, 0]
    assert parse_topics(write_topics(parsed)) == parsed


def _pipeline(root, rng_seed=55):
    """pool -> assign -> merge -> eval -> sweep, all through the CLI."""
    rng = random.Random(rng_seed)
    inputs = root / "inputs"
    inputs.mkdir(parents=True)
    universe = [f"d{i:03d}" for i in range(60)]
    noise = [f"nz{i:02d}" for i in range(12)]
    topics = [
        Topic(id="t1", title="first topic", levels=((2, "hi"), (1, "mid"), (0, "no"))),
        Topic(id="t2", title="second topic", levels=((2, "hi"), (1, "mid"), (0, "no"))),
        Topic(id="nz-1", title="filler", is_noise=True),
    ]
    (inputs / "topics.xml").write_text(write_topics(topics), "utf-8")
    run_paths = []
    for i in range(3):
        run = make_run(rng, f"sys{i}", ["t1", "t2"], universe, 40)
        path = inputs / f"sys{i}.run"
        path.write_text(write_run(run), "utf-8")
        run_paths.append(str(path))
    google = make_run(rng, "google", ["t1", "t2"], universe, 25)
    (inputs / "google.run").write_text(write_run(google), "utf-8")
    judgments = {
        (t, d): rng.choice([0, 0, 1, 2])
        for t in ("t1", "t2")
        for d in universe + noise
    }
    (inputs / "qrels-full.txt").write_text(
        write_qrels(Qrels(judgments, scale=Scale.GRADED3)), "utf-8"
    )
    crawled = {d: {rng.choice(["t1", "t2"])} for d in universe}
    crawled.update({d: {"nz-1"} for d in noise})
    (inputs / "manifest.txt").write_text(
        write_manifest(CrawlManifest(crawled_for=crawled, noise_topics={"nz-1"})),
        "utf-8",
    )

    base = ["--seed", "13"]
    assert cli_main(
        ["pool", "--strategy", "biased", "--k", "30",
         "--runs", *run_paths, "--topics", str(inputs / "topics.xml"),
         "--google-run", str(inputs / "google.run"),
         "--manifest", str(inputs / "manifest.txt"),
         *base, "--out-dir", str(root / "pool")]
    ) == 0
    assert cli_main(
        ["assign", "--pools", str(root / "pool" / "pools.tsv"),
         *base, "--out-dir", str(root / "assigned")]
    ) == 0

    payload = json.loads((root / "assigned" / "assignments.json").read_text("utf-8"))
    log = root / "judgments.log"
    with log.open("w", encoding="utf-8") as fh:
        for entry in payload["assignments"]:
            for item in entry["docs"]:
                doc_id = item["doc_id"]
                fh.write(json.dumps({
                    "assessor_id": entry["assessor_id"],
                    "topic_id": entry["topic_id"],
                    "doc_id": doc_id,
                    "grade": sum(map(ord, doc_id)) % 3,
                    "revision": 1,
                }, sort_keys=True) + "\n")

    assert cli_main(
        ["merge", "--assignments", str(root / "assigned" / "assignments.json"),
         "--judgments", str(log), "--out-dir", str(root / "merged")]
    ) == 0
    assert cli_main(
        ["eval", "--runs", *run_paths,
         "--qrels", str(root / "merged" / "qrels.txt"),
         *base, "--out-dir", str(root / "evald")]
    ) == 0
    assert cli_main(
        ["sweep", "--student-runs", *run_paths, "--pooling-runs", *run_paths,
         "--google-run", str(inputs / "google.run"),
         "--qrels", str(inputs / "qrels-full.txt"),
         "--manifest", str(inputs / "manifest.txt"),
         "--sizes", "20,30,40",
         *base, "--out-dir", str(root / "sweep")]
    ) == 0

    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def test_cli_pipeline_is_deterministic(tmp_path):
    first = _pipeline(tmp_path / "a")
    second = _pipeline(tmp_path / "b")
    assert first.keys() == second.keys()
    for name in first:
        assert first[name] == second[name], f"{name} differs between runs"
