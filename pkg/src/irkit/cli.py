"""Command-line entry point.

One binary, subcommands for each pipeline stage::

    irkit pool        build pools (depth-k / size-k / biased / two-stage)
    irkit sanitize    truncate + clean a document directory
    irkit assign      split pools between two assessors
    irkit merge       merge judgment log into qrels
    irkit agree       per-topic inter-assessor kappa
    irkit noise-check noise-document quality report
    irkit eval        effectiveness measures + system summary
    irkit sweep       pool-size incompleteness sweep
    irkit serve       run the judging service

Every command honours --seed and --out-dir, writes TSV/JSON outputs, and
is deterministic: rerunning with identical inputs and seed reproduces
every output byte for byte. Exit codes: 0 success, 1 validation/usage
error, 2 I/O error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .campaign import CampaignState, assignments_from_json, assignments_to_json
from .errors import ValidationError
from .formats import (
    parse_manifest,
    parse_pools,
    parse_qrels,
    parse_run,
    parse_topics,
    write_pools,
    write_qrels,
)
from .measures import MeasureSpec, evaluate_matrix
from .model import CrawlManifest, Pool, Provenance, Qrels, Run, Scale, conflate
from .pooling import (
    PoolSpec,
    Strategy,
    overlap_histogram,
    pool_biased,
    pool_depth_k,
    pool_size_k,
    pool_stats,
    two_stage_pools,
)
from .reliability import (
    DEFAULT_SWEEP_SIZES,
    Judgment,
    assign_judging,
    cohen_kappa,
    latest_judgments,
    merge_judgments,
    noise_quality_check,
    pool_sweep,
)
from .sanitize import clean_document


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as validation errors so the
    process exits 1 (not argparse's default 2, reserved here for I/O)."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ValidationError(message)


def _read(path: str) -> str:
    return Path(path).read_text("utf-8")


def _load_runs(paths: list[str]) -> list[Run]:
    return [parse_run(_read(p), path=p) for p in paths]


def _load_manifest(path: str) -> CrawlManifest:
    return parse_manifest(_read(path), path=path)


def _load_judgment_log(path: str) -> list[Judgment]:
    judgments = []
    for lineno, line in enumerate(_read(path).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            judgments.append(
                Judgment(
                    assessor_id=str(rec["assessor_id"]),
                    topic_id=str(rec["topic_id"]),
                    doc_id=str(rec["doc_id"]),
                    grade=int(rec["grade"]),
                    timestamp=float(rec.get("timestamp", 0.0)),
                    revision=int(rec.get("revision", 1)),
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad judgment record: {exc}", path=path, line=lineno)
    return judgments


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(out: Path, name: str, text: str) -> None:
    (out / name).write_text(text, "utf-8")
    print(f"wrote {out / name}")


# ---------------------------------------------------------------------------
# pool


def _stats_tsv(pools: dict[str, Pool], manifest: CrawlManifest | None) -> str:
    stats = pool_stats(pools)
    downloaded: dict[str, int] = {}
    if manifest is not None:
        for topics in manifest.crawled_for.values():
            for t in topics:
                downloaded[t] = downloaded.get(t, 0) + 1
    lines = ["topic_id\tdownloaded\tpool_size\tpool_depth"]
    for row in stats.rows:
        dl = str(downloaded.get(row.topic_id, 0)) if manifest is not None else "-"
        lines.append(f"{row.topic_id}\t{dl}\t{row.size}\t{row.depth}")
    lines.append(f"average\t-\t{stats.mean_size:.1f}\t{stats.mean_depth:.1f}")
    lines.append(f"total\t-\t{stats.total_size}\t-")
    lines.append(f"distinct\t-\t{stats.union_size}\t-")
    return "\n".join(lines) + "\n"


def _overlap_tsv(pools: dict[str, Pool]) -> str:
    lines = ["n_topics\tn_docs"]
    for n, count in overlap_histogram(pools).items():
        lines.append(f"{n}\t{count}")
    return "\n".join(lines) + "\n"


def cmd_pool(args: argparse.Namespace) -> None:
    topics = [
        t
        for t in parse_topics(_read(args.topics), path=args.topics)
        if not t.is_noise
    ]
    if not topics:
        raise ValidationError("no judgeable topics in the topic file")
    manifest = _load_manifest(args.manifest) if args.manifest else None
    out = _out_dir(args)

    strategy = args.strategy
    if strategy in ("depth-k", "size-k"):
        runs = _load_runs(args.runs)
        build = pool_depth_k if strategy == "depth-k" else pool_size_k
        pools = {t.id: build(runs, t, args.k) for t in topics}
    elif strategy == "biased":
        if not args.google_run:
            raise ValidationError("biased pooling needs --google-run")
        if manifest is None:
            raise ValidationError("biased pooling needs --manifest for noise docs")
        runs = _load_runs(args.runs)
        google = parse_run(_read(args.google_run), path=args.google_run)
        spec = PoolSpec(
            strategy=Strategy.BIASED,
            k=args.k,
            k_g=args.kg,
            k_n=args.kn,
            google_system_id=google.system_id,
            noise_seed=args.seed,
        )
        noise_docs = manifest.noise_doc_ids()
        pools = {
            t.id: pool_biased(runs, google, noise_docs, t, spec) for t in topics
        }
    elif strategy == "two-stage":
        if not args.stage2_runs:
            raise ValidationError("two-stage pooling needs --stage2-runs")
        if not args.google_system:
            raise ValidationError("two-stage pooling needs --google-system")
        if manifest is None:
            raise ValidationError("two-stage pooling needs --manifest for noise docs")
        complete_runs = _load_runs(args.runs)
        pooled_runs = _load_runs(args.stage2_runs)
        spec1 = PoolSpec(strategy=Strategy.SIZE_K, k=args.k)
        spec2 = PoolSpec(
            strategy=Strategy.BIASED,
            k=args.k2,
            k_g=args.kg,
            k_n=args.kn,
            google_system_id=args.google_system,
            noise_seed=args.seed,
        )
        pools = two_stage_pools(
            complete_runs,
            pooled_runs,
            manifest.noise_doc_ids(),
            topics,
            spec1,
            spec2,
        )
        stage1 = {t.id: pool_size_k(complete_runs, t, args.k) for t in topics}
        _write(out, "stage1-stats.tsv", _stats_tsv(stage1, manifest))
    else:  # pragma: no cover - argparse restricts choices
        raise ValidationError(f"unknown strategy {strategy!r}")

    _write(out, "pools.tsv", write_pools(pools))
    _write(out, "pool-stats.tsv", _stats_tsv(pools, manifest))
    _write(out, "overlap.tsv", _overlap_tsv(pools))


# ---------------------------------------------------------------------------
# sanitize


def cmd_sanitize(args: argparse.Namespace) -> None:
    docs_dir = Path(args.docs)
    if not docs_dir.is_dir():
        raise ValidationError(f"document directory not found: {docs_dir}")
    out = _out_dir(args)
    cleaned_dir = out / "cleaned"
    cleaned_dir.mkdir(exist_ok=True)
    meta_lines = []
    for path in sorted(docs_dir.iterdir()):
        if not path.is_file():
            continue
        doc = clean_document(path.name, path.read_bytes())
        (cleaned_dir / path.name).write_text(doc.body, "utf-8")
        meta_lines.append(
            json.dumps(
                {
                    "doc_id": doc.doc_id,
                    "size": doc.original_bytes,
                    "truncated": doc.truncated,
                },
                sort_keys=True,
            )
        )
    _write(out, "metadata.jsonl", "\n".join(meta_lines) + ("\n" if meta_lines else ""))
    print(f"cleaned {len(meta_lines)} documents into {cleaned_dir}")


# ---------------------------------------------------------------------------
# assign / merge / agree / noise-check


def cmd_assign(args: argparse.Namespace) -> None:
    pools = parse_pools(_read(args.pools), path=args.pools)
    manifest = _load_manifest(args.manifest) if args.manifest else None
    assessor_ids = tuple(x.strip() for x in args.assessors.split(",") if x.strip())
    if len(assessor_ids) != 2:
        raise ValidationError("--assessors needs exactly two comma-separated ids")
    assignments = []
    for topic_id in sorted(pools):
        assignments.extend(
            assign_judging(
                pools[topic_id],
                manifest,
                seed=args.seed,
                assessor_ids=assessor_ids,
            )
        )
    out = _out_dir(args)
    payload = assignments_to_json(assignments, args.seed)
    _write(out, "assignments.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _load_assignments(path: str):
    try:
        payload = json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed assignments file: {exc}", path=path)
    return assignments_from_json(payload)


def cmd_merge(args: argparse.Namespace) -> None:
    assignments, seed, _, _ = _load_assignments(args.assignments)
    judgments = _load_judgment_log(args.judgments)
    qrels = merge_judgments(
        assignments, judgments, args.seed if args.seed is not None else seed,
        allow_incomplete=args.force,
    )
    _write(_out_dir(args), "qrels.txt", write_qrels(qrels))


def cmd_agree(args: argparse.Namespace) -> None:
    assignments, _, _, _ = _load_assignments(args.assignments)
    latest = latest_judgments(_load_judgment_log(args.judgments))
    by_topic: dict[str, list] = {}
    for a in assignments:
        by_topic.setdefault(a.topic_id, []).append(a)
    lines = ["topic_id\tshared_docs\tkappa"]
    for topic_id in sorted(by_topic):
        group = sorted(by_topic[topic_id], key=lambda a: a.assessor_id)
        if len(group) != 2:
            lines.append(f"{topic_id}\t0\t-")
            continue
        a1, a2 = group
        shared = sorted(a1.shared_docs() & a2.shared_docs())
        j1, j2 = {}, {}
        for d in shared:
            k1 = (a1.assessor_id, topic_id, d)
            k2 = (a2.assessor_id, topic_id, d)
            if k1 in latest and k2 in latest:
                j1[d] = latest[k1].grade
                j2[d] = latest[k2].grade
        if not j1:
            lines.append(f"{topic_id}\t0\t-")
            continue
        try:
            kappa = cohen_kappa(j1, j2, weighted=args.weighted)
            lines.append(f"{topic_id}\t{len(j1)}\t{kappa:.4f}")
        except ValidationError:
            lines.append(f"{topic_id}\t{len(j1)}\t-")
    _write(_out_dir(args), "kappa.tsv", "\n".join(lines) + "\n")


def cmd_noise_check(args: argparse.Namespace) -> None:
    judgments = _load_judgment_log(args.judgments)
    if args.manifest:
        noise_docs = _load_manifest(args.manifest).noise_doc_ids()
    elif args.pools:
        pools = parse_pools(_read(args.pools), path=args.pools)
        noise_docs = set()
        for pool in pools.values():
            noise_docs |= pool.by_provenance(Provenance.NOISE)
    else:
        raise ValidationError("noise-check needs --manifest or --pools")
    report = noise_quality_check(judgments, noise_docs, threshold=args.threshold)
    lines = [
        "scope\tjudged\trelevant\tfraction\tflagged",
        f"overall\t{report.total_judged}\t{report.total_relevant}"
        f"\t{report.fraction:.2%}\t-",
    ]
    for a in report.assessors:
        lines.append(
            f"{a.assessor_id}\t{a.judged}\t{a.relevant}\t{a.fraction:.2%}"
            f"\t{'yes' if a.flagged else 'no'}"
        )
    _write(_out_dir(args), "noise-report.tsv", "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# eval / sweep


def _parse_measure_flags(measures: str, ks: str) -> list[MeasureSpec]:
    names = [m.strip() for m in measures.split(",") if m.strip()]
    cutoffs = [c.strip() for c in ks.split(",") if c.strip()]
    if len(names) != len(cutoffs):
        raise ValidationError(
            f"--measures lists {len(names)} names but --k lists {len(cutoffs)} cutoffs"
        )
    specs = []
    for name, cutoff in zip(names, cutoffs):
        if cutoff == "-":
            specs.append(MeasureSpec(name, None))
        else:
            try:
                specs.append(MeasureSpec(name, int(cutoff)))
            except ValueError:
                raise ValidationError(f"bad cutoff {cutoff!r} for measure {name!r}")
    return specs


def _binary(qrels: Qrels) -> Qrels:
    return conflate(qrels) if qrels.scale is Scale.GRADED3 else qrels


def cmd_eval(args: argparse.Namespace) -> None:
    runs = _load_runs(args.runs)
    qrels = _binary(parse_qrels(_read(args.qrels), path=args.qrels))
    manifest = _load_manifest(args.manifest) if args.manifest else None
    specs = _parse_measure_flags(args.measures, args.k)
    results, summaries = evaluate_matrix(runs, qrels, manifest, specs)

    lines = ["system_id\ttopic_id\tmeasure\tk\tvalue\tflag"]
    for r in results:
        k = "-" if r.k is None else str(r.k)
        lines.append(
            f"{r.system_id}\t{r.topic_id}\t{r.measure}\t{k}"
            f"\t{r.value:.4f}\t{r.flag or '-'}"
        )
    out = _out_dir(args)
    _write(out, "eval-topics.tsv", "\n".join(lines) + "\n")

    labels = [s.label for s in specs]
    header = "system_id\t" + "\t".join(
        f"{label}_mean\t{label}_sd" for label in labels
    )
    lines = ["# sd: sample standard deviation (n-1)", header]
    for s in summaries:
        cells = "\t".join(
            f"{s.means[label]:.4f}\t{s.sds[label]:.4f}" for label in labels
        )
        lines.append(f"{s.system_id}\t{cells}")
    _write(out, "eval-summary.tsv", "\n".join(lines) + "\n")


def _parse_sizes(flag: str) -> tuple[int, ...]:
    flag = flag.strip()
    try:
        if ":" in flag:
            start_s, stop_s, step_s = flag.split(":")
            start, stop, step = int(start_s), int(stop_s), int(step_s)
            if step < 1:
                raise ValidationError("size step must be positive")
            return tuple(range(start, stop + 1, step))
        return tuple(int(x) for x in flag.split(","))
    except ValueError:
        raise ValidationError(f"bad --sizes value {flag!r} (use start:stop:step or a comma list)")


def cmd_sweep(args: argparse.Namespace) -> None:
    student_runs = _load_runs(args.student_runs)
    pooling_runs = _load_runs(args.pooling_runs)
    google = parse_run(_read(args.google_run), path=args.google_run)
    qrels = parse_qrels(_read(args.qrels), path=args.qrels)
    manifest = _load_manifest(args.manifest) if args.manifest else None
    if manifest is None:
        raise ValidationError("sweep needs --manifest for noise docs")
    sizes = _parse_sizes(args.sizes) if args.sizes else DEFAULT_SWEEP_SIZES
    specs = _parse_measure_flags(args.measures, args.k)
    report = pool_sweep(
        student_runs,
        pooling_runs,
        google,
        manifest.noise_doc_ids(),
        qrels,
        sizes,
        specs,
        k_g=args.kg,
        k_n=args.kn,
        noise_seed=args.seed,
        manifest=manifest,
    )
    header = ["size_from", "size_to"]
    for label in report.measures:
        header += [
            f"{label}_mean_incr",
            f"{label}_max_incr",
            f"{label}_tau",
            f"{label}_systems",
            f"{label}_zero_baseline",
            f"{label}_tied_pairs",
        ]
    lines = ["\t".join(header)]
    for row in report.rows:
        cells = [str(row.size_from), str(row.size_to)]
        for label in report.measures:
            c = row.cells[label]
            cells += [
                f"{c.mean_pct:.2f}%",
                f"{c.max_pct:.2f}%",
                f"{c.tau:.3f}",
                str(c.n_systems),
                str(c.n_zero_baseline),
                str(c.n_tied_pairs),
            ]
        lines.append("\t".join(cells))
    _write(_out_dir(args), "sweep.tsv", "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# serve


def cmd_serve(args: argparse.Namespace) -> None:
    import uvicorn

    from .service import create_app

    state = CampaignState.load(Path(args.campaign))
    app = create_app(state, export_on_complete=args.export_on_complete)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")


# ---------------------------------------------------------------------------
# parser


def build_parser() -> _Parser:
    parser = _Parser(prog="irkit", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="global random seed")
    common.add_argument("--out-dir", default=".", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pool", parents=[common], help="build pools from run files")
    p.add_argument("--strategy", choices=["depth-k", "size-k", "biased", "two-stage"],
                   required=True)
    p.add_argument("--runs", nargs="+", required=True,
                   help="pooling run files (two-stage: the complete-collection runs)")
    p.add_argument("--topics", required=True, help="topic XML file")
    p.add_argument("--manifest", help="crawl manifest (required for biased/two-stage)")
    p.add_argument("--k", type=int, default=100,
                   help="depth (depth-k) or minimum size (size-k/biased; two-stage stage 1)")
    p.add_argument("--k2", type=int, default=160, help="two-stage stage-2 minimum size")
    p.add_argument("--kg", type=int, default=10, help="forced engine-top docs")
    p.add_argument("--kn", type=int, default=10, help="forced noise docs")
    p.add_argument("--google-run", help="engine run file (biased)")
    p.add_argument("--google-system", help="engine system id within --stage2-runs (two-stage)")
    p.add_argument("--stage2-runs", nargs="+",
                   help="runs against the stage-1 collection, engine run included")
    p.set_defaults(func=cmd_pool)

    p = sub.add_parser("sanitize", parents=[common], help="truncate and clean documents")
    p.add_argument("--docs", required=True, help="raw document directory")
    p.set_defaults(func=cmd_sanitize)

    p = sub.add_parser("assign", parents=[common], help="split pools between assessors")
    p.add_argument("--pools", required=True, help="pool file")
    p.add_argument("--manifest", help="crawl manifest for noise validation")
    p.add_argument("--assessors", default="assessor-1,assessor-2",
                   help="two comma-separated assessor ids")
    p.set_defaults(func=cmd_assign)

    p = sub.add_parser("merge", parents=[common], help="merge judgments into qrels")
    p.add_argument("--assignments", required=True)
    p.add_argument("--judgments", required=True, help="judgment log (JSON lines)")
    p.add_argument("--force", action="store_true",
                   help="allow incomplete assignments (drop unjudged docs)")
    p.set_defaults(func=cmd_merge, seed=None)

    p = sub.add_parser("agree", parents=[common], help="per-topic assessor agreement")
    p.add_argument("--assignments", required=True)
    p.add_argument("--judgments", required=True)
    p.add_argument("--weighted", action="store_true",
                   help="linear-weighted kappa instead of unweighted")
    p.set_defaults(func=cmd_agree)

    p = sub.add_parser("noise-check", parents=[common], help="noise-document quality report")
    p.add_argument("--judgments", required=True)
    p.add_argument("--manifest", help="crawl manifest naming noise topics")
    p.add_argument("--pools", help="pool file with noise provenance")
    p.add_argument("--threshold", type=float, default=0.05,
                   help="per-assessor flagging threshold")
    p.set_defaults(func=cmd_noise_check)

    p = sub.add_parser("eval", parents=[common], help="evaluate runs against qrels")
    p.add_argument("--runs", nargs="+", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--manifest", help="crawl manifest (needed for the c measure)")
    p.add_argument("--measures", default="ndcg,ap,p,rr",
                   help="comma list from: ndcg, ap, p, r, rr, c")
    p.add_argument("--k", default="100,100,10,-",
                   help="comma list of cutoffs aligned with --measures ('-' for rr)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", parents=[common], help="pool-size incompleteness sweep")
    p.add_argument("--student-runs", nargs="+", required=True)
    p.add_argument("--pooling-runs", nargs="+", required=True)
    p.add_argument("--google-run", required=True)
    p.add_argument("--qrels", required=True, help="qrels covering the largest pool")
    p.add_argument("--manifest", required=True)
    p.add_argument("--sizes", help="start:stop:step or comma list (default 20:160:10)")
    p.add_argument("--measures", default="ndcg")
    p.add_argument("--k", default="100")
    p.add_argument("--kg", type=int, default=10)
    p.add_argument("--kn", type=int, default=10)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("serve", parents=[common], help="run the judging service")
    p.add_argument("--campaign", required=True, help="campaign directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--export-on-complete", action="store_true",
                   help="export automatically once every assignment is judged")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
        return 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        raise
    except Exception as exc:  # noqa: BLE001 - last-resort exit-code mapping
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
