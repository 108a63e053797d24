"""Classroom-scale IR test-collection toolkit: pooling with forced
engine/noise documents, split-assessor judging, effectiveness measures,
and reliability analysis."""

from .errors import ParseError, ValidationError
from .model import (
    CrawlManifest,
    Pool,
    Provenance,
    Qrels,
    Run,
    RunEntry,
    Scale,
    Topic,
    conflate,
)
from .measures import (
    EvalResult,
    MeasureSpec,
    SystemSummary,
    average_precision_at,
    crawl_ratio_at,
    evaluate_matrix,
    ndcg_at,
    precision_at,
    recall_at,
    reciprocal_rank,
)
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
    Assignment,
    Judgment,
    NoiseReport,
    SweepReport,
    assign_judging,
    cohen_kappa,
    kendall_tau,
    merge_judgments,
    noise_quality_check,
    pool_sweep,
)
from .sanitize import (
    CleanDocument,
    clean_document,
    highlight_terms,
    sanitize_html,
    truncate_doc,
    visible_text,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "CleanDocument",
    "CrawlManifest",
    "EvalResult",
    "Judgment",
    "MeasureSpec",
    "NoiseReport",
    "ParseError",
    "Pool",
    "PoolSpec",
    "Provenance",
    "Qrels",
    "Run",
    "RunEntry",
    "Scale",
    "Strategy",
    "SweepReport",
    "SystemSummary",
    "Topic",
    "ValidationError",
    "assign_judging",
    "average_precision_at",
    "clean_document",
    "cohen_kappa",
    "conflate",
    "crawl_ratio_at",
    "evaluate_matrix",
    "highlight_terms",
    "kendall_tau",
    "merge_judgments",
    "ndcg_at",
    "noise_quality_check",
    "overlap_histogram",
    "pool_biased",
    "pool_depth_k",
    "pool_size_k",
    "pool_stats",
    "pool_sweep",
    "precision_at",
    "recall_at",
    "reciprocal_rank",
    "sanitize_html",
    "truncate_doc",
    "two_stage_pools",
    "visible_text",
]
